"""Benchmark sweeps: generate instances, run solvers, write ratio CSVs, bin the ratios.

Rows come out in a fixed order (size, instance, algorithm) no matter how many
worker processes run, so two runs with the same seed and ``timing=False``
produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ba_multi import CgConfig, ba_config_lp_bound, ba_continuous_greedy, ba_greedy, ba_homogeneous_solve
from .baselines import OracleBudget, ed_solve, fa_greedy, opt_bruteforce
from .core import gen_uniform
from .fa_multi import FaMultiConfig, fa_multi_solve, solve_config_lp

__all__ = [
    "CSV_COLUMNS",
    "ALGORITHMS",
    "PRESETS",
    "BenchRecord",
    "bench_rows",
    "bench_run",
    "Histogram",
    "histogram_export",
    "worker_count",
]

CSV_COLUMNS = ("instance_id", "seed", "m", "n", "algorithm", "protocol", "objective", "oracle", "ratio", "wall_ms", "certified")

# algorithm -> protocol; ED is scored under every protocol requested alongside it
ALGORITHMS = {
    "ed": None,
    "fa-greedy": "fa",
    "fa-multi": "fa",
    "opt-fa": "fa",
    "ba-homog": "ba",
    "ba-greedy": "ba",
    "ba-cg": "ba",
    "ba-lp-bound": "ba",
    "opt-ba": "ba",
}

PRESETS = {
    "desk-3x9": {
        "sizes": [(3, 9)],
        "algorithms": ["ed", "fa-greedy", "fa-multi", "opt-fa", "ba-greedy", "ba-cg", "opt-ba"],
        "instances": 1000,
    },
}


@dataclass
class BenchRecord:
    instance_id: str
    seed: int
    m: int
    n: int
    algorithm: str
    protocol: str
    objective: float
    oracle: float
    ratio: float
    wall_ms: float
    certified: str

    def row(self) -> list[str]:
        def num(v):
            return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))

        return [
            self.instance_id,
            str(self.seed),
            str(self.m),
            str(self.n),
            self.algorithm,
            self.protocol,
            num(self.objective),
            num(self.oracle),
            num(self.ratio),
            f"{self.wall_ms:.3f}",
            self.certified,
        ]


def _ratio(obj: float, oracle: float) -> float:
    if oracle == 0.0:
        return 1.0 if obj == 0.0 else math.inf
    return obj / oracle


def worker_count() -> int:
    cap = os.environ.get("DISPATCHKIT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


@dataclass(frozen=True)
class _Job:
    instance_id: str
    seed: int
    m: int
    n: int
    algorithms: tuple
    eps: float
    delta: float
    repetitions: int
    steps: int
    timing: bool
    budget: int


def _protocols(algorithms) -> list[str]:
    found = {ALGORITHMS[a] for a in algorithms if ALGORITHMS[a]}
    return [p for p in ("fa", "ba") if p in found] or ["fa"]


def _solve(alg, inst, job):
    """Returns (objective, certified flag) for one algorithm."""
    seed = job.seed
    if alg == "fa-greedy":
        return fa_greedy(inst, seed).welfare, "1"
    if alg == "fa-multi":
        sol = fa_multi_solve(inst, FaMultiConfig(job.eps, job.delta, seed, repetitions=job.repetitions))
        return sol.welfare, "1" if sol.meta["certified"] else "0"
    if alg == "opt-fa":
        return opt_bruteforce(inst, "fa", OracleBudget(job.budget)).welfare, "1"
    if alg == "ba-homog":
        return ba_homogeneous_solve(inst).welfare, "1"
    if alg == "ba-greedy":
        return ba_greedy(inst, seed).welfare, "1"
    if alg == "ba-cg":
        return ba_continuous_greedy(inst, CgConfig(job.steps, seed, job.repetitions)).welfare, "1"
    if alg == "ba-lp-bound":
        res = ba_config_lp_bound(inst, job.eps)
        return res.bound, "1" if res.certified else "0"
    if alg == "opt-ba":
        return opt_bruteforce(inst, "ba", OracleBudget(job.budget)).welfare, "1"
    raise ValueError(f"unknown algorithm {alg!r}")


def _oracle(protocol, inst, job, cache) -> tuple[float, bool]:
    """(denominator, exact?) for the ratio column; LP bounds when brute force is out of budget."""
    if protocol in cache:
        return cache[protocol]
    if (inst.m + 1) ** inst.n <= job.budget:
        out = (opt_bruteforce(inst, protocol, OracleBudget(job.budget)).welfare, True)
    elif protocol == "ba":
        out = (ba_config_lp_bound(inst, job.eps).bound, False)
    else:
        # FA <= 2 MNL pointwise, so twice the MNL configuration-LP bound caps FA OPT
        out = (2.0 * solve_config_lp(inst, FaMultiConfig(job.eps, job.delta)).bound, False)
    cache[protocol] = out
    return out


def _run_job(job: _Job) -> list[BenchRecord]:
    inst = gen_uniform(job.m, job.n, job.seed)
    cache: dict = {}
    rows = []
    protos = _protocols(job.algorithms)
    for alg in job.algorithms:
        t0 = time.perf_counter()
        try:
            if alg == "ed":
                sol = ed_solve(inst)
                results = [(p, sol.welfare, "1") for p in protos]
            else:
                obj, cert = _solve(alg, inst, job)
                results = [(ALGORITHMS[alg], obj, cert)]
        except Exception:  # recorded, the sweep goes on
            results = [(p, math.nan, "error") for p in ([ALGORITHMS[alg]] if ALGORITHMS[alg] else protos)]
        ms = (time.perf_counter() - t0) * 1000.0 if job.timing else 0.0
        for proto, obj, cert in results:
            if alg.startswith("opt-") and not math.isnan(obj):
                cache.setdefault(proto, (obj, True))
            oracle, exact = _oracle(proto, inst, job, cache)
            ratio = math.nan if math.isnan(obj) else _ratio(obj, oracle)
            if not exact and cert != "error":
                cert = "bound"
            rows.append(BenchRecord(job.instance_id, job.seed, job.m, job.n, alg, proto, obj, oracle, ratio, ms, cert))
    return rows


def _jobs(sizes, algorithms, instances, seed, eps, delta, repetitions, steps, timing, budget):
    k = 0
    for m, n in sizes:
        for idx in range(instances):
            s = seed + k
            k += 1
            yield _Job(f"{m}x{n}-{idx:05d}", s, m, n, tuple(algorithms), eps, delta, repetitions, steps, timing, budget)


def bench_rows(
    sizes: Sequence[tuple[int, int]],
    algorithms: Sequence[str],
    instances: int,
    seed: int = 0,
    eps: float = 0.05,
    delta: float = 0.1,
    repetitions: int = 20,
    steps: int = 100,
    timing: bool = True,
    budget: int = 10**7,
    workers: int | None = None,
) -> Iterable[BenchRecord]:
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"unknown algorithms: {', '.join(unknown)}")
    if instances < 0:
        raise ValueError("instances must be >= 0")
    if not algorithms:
        return
    jobs = list(_jobs(sizes, algorithms, instances, seed, eps, delta, repetitions, steps, timing, budget))
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            yield from _run_job(job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order
        for rows in pool.map(_run_job, jobs, chunksize=4):
            yield from rows


def bench_run(sizes, algorithms, instances, seed=0, eps=0.05, delta=0.1, out=None, **kw) -> str | None:
    """Write the CSV (header first) to ``out`` or return it as a string."""
    buf = out if out is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in bench_rows(sizes, algorithms, instances, seed, eps, delta, **kw):
        writer.writerow(rec.row())
    return buf.getvalue() if out is None else None


@dataclass
class Histogram:
    edges: list[float]
    counts: dict = field(default_factory=dict)  # (algorithm, protocol) -> per-bin counts
    below: dict = field(default_factory=dict)
    skipped: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", "protocol", "bin_lo", "bin_hi", "count"])
        for (alg, proto), counts in self.counts.items():
            w.writerow([alg, proto, "-inf", repr(self.edges[0]), self.below[(alg, proto)]])
            for k, c in enumerate(counts):
                w.writerow([alg, proto, repr(self.edges[k]), repr(self.edges[k + 1]), c])
        return buf.getvalue()


def histogram_export(source, bins: int = 10, lo: float = 0.8, hi: float = 1.0) -> Histogram:
    """Bin the ``ratio`` column per (algorithm, protocol) over ``[lo, hi]``.

    ``source`` is CSV text, a path, or an open file.  The last bin is closed
    and also takes ratios a hair above ``hi``; ratios under ``lo`` are
    counted separately.  Rows that do not parse are skipped and counted.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if not lo < hi:
        raise ValueError("need lo < hi")
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (str, os.PathLike)) and "\n" not in str(source) and os.path.exists(source):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = str(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ValueError("not a benchmark CSV (header mismatch)")
    width = (hi - lo) / bins
    edges = [lo + k * width for k in range(bins)] + [hi]
    hist = Histogram(edges)
    ia, ip, ir = CSV_COLUMNS.index("algorithm"), CSV_COLUMNS.index("protocol"), CSV_COLUMNS.index("ratio")
    for row in reader:
        try:
            if len(row) != len(CSV_COLUMNS):
                raise ValueError
            r = float(row[ir])
            if not math.isfinite(r) or r < 0:
                raise ValueError
        except ValueError:
            hist.skipped += 1
            continue
        key = (row[ia], row[ip])
        if key not in hist.counts:
            hist.counts[key] = [0] * bins
            hist.below[key] = 0
        if r < lo:
            hist.below[key] += 1
        else:
            hist.counts[key][min(int((r - lo) / width), bins - 1)] += 1
    return hist
