"""Choosing one rider's set: bucketed enumeration against exhaustive search.

Run: python demos/02_single_rider_ptas.py
"""
# %%
import time

import numpy as np

from dispatchkit import DriverView, PtasConfig, brute_single, ptas_select
from dispatchkit.core import rng_from_seed
from dispatchkit.fa_single import ptas_candidate_count

rng = rng_from_seed(3)
view = DriverView(rng.random(14), rng.random(14), tuple(range(14)))

best_set, best = brute_single(view)
print(f"exhaustive optimum {best:.5f} with drivers {best_set}")

# %% Coarser buckets enumerate fewer candidates and may lose a little value.
for delta in (0.05, 0.1, 0.3, 0.6):
    cfg = PtasConfig(delta)
    t0 = time.perf_counter()
    chosen, val = ptas_select(view, cfg)
    ms = (time.perf_counter() - t0) * 1e3
    print(f"delta {delta:4.2f}: {ptas_candidate_count(view, cfg):7d} candidates, ratio {val / best:.5f}, {ms:6.1f} ms")

# %% Ratio distribution over many small instances.
ratios = []
for _ in range(300):
    v = DriverView(rng.random(10), rng.random(10), tuple(range(10)))
    ratios.append(ptas_select(v, PtasConfig(0.3))[1] / brute_single(v)[1])
print(f"\ndelta 0.3 over 300 instances: min {min(ratios):.4f}, mean {np.mean(ratios):.5f}")
