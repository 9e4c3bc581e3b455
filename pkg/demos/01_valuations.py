"""Valuations of one rider's notification set under both contention rules.

Run: python demos/01_valuations.py
"""
# %%
from dispatchkit import DriverView, ba_value, fa_threshold, fa_value, mnl_value, simulate

# three drivers: a strong sure thing, a weak sure thing, a strong coin flip
a, b, c = (1.0, 0.9), (0.2, 0.9), (1.0, 0.5)

for name, drivers in [("{a}", [a]), ("{a,b}", [a, b]), ("{a,c}", [a, c]), ("{a,b,c}", [a, b, c])]:
    v = DriverView.from_pairs(drivers)
    print(f"{name:8s} FA {fa_value(v):.4f}   BA {ba_value(v):.4f}   MNL {mnl_value(v):.4f}")

# %% Adding b hurts under FA: it often wins contention against a with a worse score.
# The break-even weight says so up front: b's weight sits below the threshold of {a}.
t = fa_threshold(DriverView.from_pairs([a]))
print(f"\nthreshold of {{a}}: {t.tau:.3f}; weight of b: {b[0]}")

# %% Simulated contention agrees with the closed forms.
v = DriverView.from_pairs([a, b])
for kind, exact in (("fa", fa_value(v)), ("ba", ba_value(v))):
    mean, se = simulate(v, kind, 200_000, seed=1)
    print(f"{kind}: simulated {mean:.4f} +- {se:.4f}, exact {exact:.4f}")
