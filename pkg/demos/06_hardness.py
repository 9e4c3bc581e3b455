"""Identical riders, unit weights, dyadic probabilities: welfare encodes 3-Partition.

Run: python demos/06_hardness.py
"""
# %%
from dispatchkit import ThreePartitionSpec, gen_hardness, opt_bruteforce
from dispatchkit.core import dyadic_instance

# driver j accepts with prob 1 - 2^-a_j, so a rider's set misses with prob 2^-(sum of a)
yes = ThreePartitionSpec((4, 5, 6, 5, 5, 5, 4, 4, 7), B=15, m=3)
inst, W = gen_hardness(yes)
best = opt_bruteforce(inst, "fa")
print(f"split exists:  optimum {best.welfare!r}  target {W!r}")
print("  sets:", best.assignment.sets, " loads:", [sum(yes.a[j] for j in s) for s in best.assignment.sets])

# %% No triple split: every assignment falls short of the target.
no = ThreePartitionSpec((4, 4, 4, 6, 6, 6), B=15, m=2)
inst, W = gen_hardness(no)
print(f"no split:      optimum {opt_bruteforce(inst, 'fa').welfare!r}  target {W!r}")

# %% Lowering one exponent breaks the balance too.
inst = dyadic_instance((5, 5, 5, 5, 5, 4), 2)
print(f"perturbed:     optimum {opt_bruteforce(inst, 'fa').welfare!r}  target {2 * (1 - 2.0**-15)!r}")
