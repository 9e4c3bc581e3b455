"""Best-accept: exact matching when probabilities are equal, heuristics otherwise.

Run: python demos/04_best_accept.py
"""
# %%
import numpy as np

from dispatchkit import (
    CgConfig,
    DriverView,
    Instance,
    ba_config_lp_bound,
    ba_continuous_greedy,
    ba_demand_oracle,
    ba_greedy,
    ba_homogeneous_solve,
    ed_solve,
    gen_uniform,
    opt_bruteforce,
)

# %% Common acceptance probability: slot l of a rider is worth p (1-p)^l times the weight.
base = gen_uniform(3, 8, seed=5)
homog = Instance(3, 8, base.weights, np.full((3, 8), 0.3))
sol = ba_homogeneous_solve(homog)
print(f"matching {sol.welfare:.6f}  exhaustive {opt_bruteforce(homog, 'ba').welfare:.6f}")
for i, slots in enumerate(sol.meta["slots"]):
    print(f"  rider {i}: " + ", ".join(f"d{j}@{l} (w={homog.weights[i, j]:.2f})" for j, l in slots))

# %% Heterogeneous probabilities.
inst = gen_uniform(3, 9, seed=6)
opt = opt_bruteforce(inst, "ba").welfare
bound = ba_config_lp_bound(inst, eps=0.05)
print(f"\noptimum {opt:.4f}; LP bound {bound.bound:.4f}")
print(f"continuous greedy {ba_continuous_greedy(inst, CgConfig(seed=0, repetitions=20)).welfare:.4f}")
print(f"greedy            {ba_greedy(inst, seed=0).welfare:.4f}")
print(f"exclusive         {ed_solve(inst).welfare:.4f}")

# %% The pricing step on its own: which drivers are worth their price?
view = DriverView.of(inst, 0)
prices = np.full(inst.n, 0.05)
chosen, net = ba_demand_oracle(view, prices, eps=0.01)
print(f"\nat price 0.05 rider 0 wants {chosen}, net {net:.4f}")
