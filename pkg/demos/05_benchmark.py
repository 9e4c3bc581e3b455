"""A small sweep: ratios to the exact optimum, then binned for plotting.

Run: python demos/05_benchmark.py   (set DISPATCHKIT_THREADS to cap workers)
"""
# %%
import csv
import io
from collections import defaultdict

from dispatchkit import bench_run, histogram_export

text = bench_run(
    sizes=[(3, 9)],
    algorithms=["ed", "fa-greedy", "fa-multi", "opt-fa", "ba-greedy", "ba-cg", "opt-ba"],
    instances=20,
    seed=0,
    repetitions=20,
)

# %% Mean ratio per algorithm and protocol.
ratios = defaultdict(list)
for row in csv.DictReader(io.StringIO(text)):
    ratios[(row["algorithm"], row["protocol"])].append(float(row["ratio"]))
for (alg, proto), r in sorted(ratios.items(), key=lambda kv: (kv[0][1], sum(kv[1]))):
    print(f"{proto}  {alg:10s} mean ratio {sum(r) / len(r):.4f}")

# %% Plot-ready histogram (render with any plotting tool).
print()
print(histogram_export(text, bins=8).to_csv())
