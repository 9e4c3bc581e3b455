"""Command-line entry point: ``dispatchkit {gen,eval,solve,simulate,bench,hist}``.

Exit codes: 0 success, 1 usage or input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .ba_multi import (
    CgConfig,
    HeterogeneousProbabilities,
    ba_config_lp_bound,
    ba_continuous_greedy,
    ba_greedy,
    ba_homogeneous_solve,
)
from .baselines import BudgetExceeded, OracleBudget, ed_solve, fa_greedy, opt_bruteforce
from .bench import ALGORITHMS, PRESETS, bench_run, histogram_export
from .core import (
    Assignment,
    Instance,
    InstanceError,
    InstanceFormatError,
    Solution,
    ThreePartitionSpec,
    gen_hardness,
    gen_uniform,
    read_assignment,
    read_instance,
    write_assignment,
    write_instance,
)
from .fa_multi import FaMultiConfig, fa_multi_solve
from .fa_single import EnumerationTooLarge, PtasConfig, ptas_select
from .valuation import DriverView, ValuationKind, simulate, value, welfare

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2

SOLVERS = ["fa-single-ptas", "fa-multi", "fa-greedy", "ed", "opt-fa", "opt-ba", "ba-homog", "ba-greedy", "ba-cg", "ba-lp-bound"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _size(text: str) -> tuple[int, int]:
    try:
        m, n = text.lower().split("x")
        return int(m), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MxN, got {text!r}") from None


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------


def cmd_gen(a) -> int:
    if a.three_partition is not None:
        if a.B is None:
            raise UsageError("gen: --three-partition needs --B")
        k = len(a.three_partition)
        inst, W = gen_hardness(ThreePartitionSpec(a.three_partition, a.B, k // 3))
        print(f"threshold W = {W!r}", file=sys.stderr)
    else:
        if a.m is None or a.n is None:
            raise UsageError("gen: --m and --n are required")
        inst = gen_uniform(a.m, a.n, a.seed)
        if a.p is not None:
            inst = Instance(inst.m, inst.n, inst.weights, np.full((inst.m, inst.n), a.p))
    if a.output:
        write_instance(inst, a.output)
    else:
        print(json.dumps(inst.to_dict()))
    return EXIT_OK


def cmd_eval(a) -> int:
    inst = read_instance(a.instance)
    if a.assignment:
        asg = read_assignment(a.assignment)
        errs = asg.errors(inst.n)
        if len(asg.sets) != inst.m:
            errs.append(f"assignment has {len(asg.sets)} sets for {inst.m} riders")
        if errs:
            raise UsageError("eval: invalid assignment: " + "; ".join(errs))
        print(repr(welfare(inst, asg, a.protocol)))
        return EXIT_OK
    if a.rider is None:
        raise UsageError("eval: give --rider/--set or --assignment")
    view = _view(inst, a.rider, a.set)
    print(repr(value(view, a.protocol)))
    return EXIT_OK


def _view(inst, rider, drivers):
    if not 0 <= rider < inst.m:
        raise UsageError(f"rider {rider} out of [0, {inst.m})")
    bad = [j for j in drivers if not 0 <= j < inst.n]
    if bad or len(set(drivers)) != len(drivers):
        raise UsageError(f"--set must list distinct drivers in [0, {inst.n})")
    return DriverView.of(inst, rider, sorted(drivers))


def cmd_solve(a) -> int:
    inst = read_instance(a.instance)
    alg = a.alg
    out = {"algorithm": alg}
    if alg == "fa-single-ptas":
        if not 0 <= a.rider < inst.m:
            raise UsageError(f"rider {a.rider} out of [0, {inst.m})")
        chosen, val = ptas_select(DriverView.of(inst, a.rider), PtasConfig(a.delta))
        sets = [()] * inst.m
        sets[a.rider] = chosen
        asg = Assignment(tuple(sets))
        sol = Solution(asg, welfare(inst, asg, ValuationKind.FA))
        out["value"] = val
    elif alg == "fa-multi":
        sol = fa_multi_solve(inst, FaMultiConfig(a.eps, a.delta, a.seed, a.max_iter, a.pricing, a.repetitions))
        out.update(
            lp_objective=sol.meta["lp_objective"],
            lp_bound=sol.meta["lp_bound"],
            fa_bound=sol.meta["fa_bound"],
            certified=sol.meta["certified"],
        )
    elif alg == "fa-greedy":
        sol = fa_greedy(inst, a.seed)
    elif alg == "ed":
        sol = ed_solve(inst, raw_weights=a.ed_raw_weights)
    elif alg in ("opt-fa", "opt-ba"):
        sol = opt_bruteforce(inst, alg[4:], OracleBudget(a.budget))
    elif alg == "ba-homog":
        if a.p is not None and not np.allclose(inst.probs, a.p, rtol=0.0, atol=1e-12):
            raise HeterogeneousProbabilities(f"instance probabilities are not all equal to --p {a.p}")
        sol = ba_homogeneous_solve(inst)
    elif alg == "ba-greedy":
        sol = ba_greedy(inst, a.seed)
    elif alg == "ba-cg":
        sol = ba_continuous_greedy(inst, CgConfig(a.steps, a.seed, a.repetitions))
    else:  # ba-lp-bound
        res = ba_config_lp_bound(inst, a.eps, a.max_iter)
        out.update(lp_objective=res.objective, lp_bound=res.bound, certified=res.certified)
        print(json.dumps(out))
        return EXIT_OK
    out["welfare"] = sol.welfare
    out["sets"] = [list(s) for s in sol.assignment.sets]
    if a.output:
        write_assignment(sol.assignment, a.output)
    print(json.dumps(out))
    return EXIT_OK


def cmd_simulate(a) -> int:
    inst = read_instance(a.instance)
    view = _view(inst, a.rider, a.set)
    mean, se = simulate(view, a.protocol, a.trials, a.seed)
    exact = value(view, a.protocol)
    z = (mean - exact) / se if se > 0 else (0.0 if mean == exact else math.inf)
    print(json.dumps({"protocol": a.protocol, "trials": a.trials, "mean": mean, "stderr": se, "exact": exact, "z": z}))
    return EXIT_OK


def cmd_bench(a) -> int:
    preset = PRESETS[a.preset] if a.preset else {}
    sizes = a.sizes if a.sizes is not None else preset.get("sizes", [(3, 9)])
    algs = a.algs if a.algs is not None else preset.get("algorithms", [])
    instances = a.instances if a.instances is not None else preset.get("instances", 10)
    unknown = [x for x in algs if x not in ALGORITHMS]
    if unknown:
        raise UsageError(f"bench: unknown algorithms {', '.join(unknown)}")
    kw = dict(repetitions=a.repetitions, steps=a.steps, timing=not a.no_timing, budget=a.budget)
    if a.output and a.output != "-":
        with open(a.output, "w", newline="") as fh:
            bench_run(sizes, algs, instances, a.seed, a.eps, a.delta, out=fh, **kw)
    else:
        bench_run(sizes, algs, instances, a.seed, a.eps, a.delta, out=sys.stdout, **kw)
    return EXIT_OK


def cmd_hist(a) -> int:
    try:
        hist = histogram_export(a.csv, a.bins, a.lo, a.hi)
    except ValueError as exc:
        raise UsageError(f"hist: {exc}") from None
    _emit(hist.to_csv(), a.output)
    if hist.skipped:
        print(f"skipped {hist.skipped} malformed rows", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dispatchkit", description="Non-exclusive ride dispatch solvers and benchmarks.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    g = sub.add_parser("gen", help="write a random or 3-Partition instance")
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--p", type=float, help="overwrite every acceptance probability with this value")
    g.add_argument("--three-partition", type=_int_list, metavar="A1,A2,...")
    g.add_argument("--B", type=int, help="target triple sum for --three-partition")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="value of one rider's set, or welfare of an assignment file")
    e.add_argument("--protocol", choices=["fa", "ba", "mnl"], default="fa")
    e.add_argument("--instance", required=True)
    e.add_argument("--rider", type=int)
    e.add_argument("--set", type=_int_list, default=[])
    e.add_argument("--assignment")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("solve", help="run one solver on an instance file")
    s.add_argument("--alg", choices=SOLVERS, required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--rider", type=int, default=0, help="rider optimized by fa-single-ptas")
    s.add_argument("--repetitions", type=int, default=1)
    s.add_argument("--steps", type=int, default=100, help="continuous-greedy step count T")
    s.add_argument("--max-iter", type=int, default=200, help="column-generation iteration cap")
    s.add_argument("--pricing", choices=["fptas", "exact-bruteforce"], default="fptas")
    s.add_argument("--p", type=float, help="expected common probability for ba-homog")
    s.add_argument("--budget", type=int, default=10**7, help="state cap for opt-*")
    s.add_argument("--ed-raw-weights", action="store_true", help="match ED on w instead of p*w")
    s.add_argument("-o", "--output", help="also write the assignment JSON here")
    s.set_defaults(func=cmd_solve)

    m = sub.add_parser("simulate", help="Monte Carlo contention check against the exact value")
    m.add_argument("--protocol", choices=["fa", "ba"], default="fa")
    m.add_argument("--instance", required=True)
    m.add_argument("--rider", type=int, required=True)
    m.add_argument("--set", type=_int_list, required=True)
    m.add_argument("--trials", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", help="algorithm sweep, CSV to stdout or -o")
    b.add_argument("--preset", choices=sorted(PRESETS))
    b.add_argument("--sizes", type=lambda t: [_size(x) for x in t.split(",") if x], metavar="MxN,...")
    b.add_argument("--algs", type=lambda t: [x for x in t.split(",") if x], metavar="ALG,...")
    b.add_argument("--instances", type=int)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--eps", type=float, default=0.05)
    b.add_argument("--delta", type=float, default=0.1)
    b.add_argument("--repetitions", type=int, default=20)
    b.add_argument("--steps", type=int, default=100)
    b.add_argument("--budget", type=int, default=10**7)
    b.add_argument("--no-timing", action="store_true", help="write 0 in wall_ms (byte-stable output)")
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_bench)

    h = sub.add_parser("hist", help="bin the ratio column of a bench CSV")
    h.add_argument("--csv", required=True)
    h.add_argument("--bins", type=int, default=10)
    h.add_argument("--lo", type=float, default=0.8)
    h.add_argument("--hi", type=float, default=1.0)
    h.add_argument("-o", "--output")
    h.set_defaults(func=cmd_hist)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HeterogeneousProbabilities, BudgetExceeded, EnumerationTooLarge, InstanceError, RuntimeError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
