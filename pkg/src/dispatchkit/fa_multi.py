"""Multi-rider FA: configuration LP over the MNL surrogate, rounding, pruning.

Pipeline: column generation solves the configuration LP whose columns are
(rider, driver set) pairs valued by MNL revenue; pricing is an additive-eps
Lagrangian demand oracle built from a knapsack-constrained MNL FPTAS.  The
per-(rider, driver) marginals of the LP solution are rounded independently
per driver, and every rider's proposed set is pruned with the single-rider PTAS.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Assignment, Instance, Solution, check, rng_from_seed
from .fa_single import PtasConfig, prune
from .optlib import LinearProgram, lp_solve
from .valuation import DriverView, ValuationKind, _mnl, subset_values, welfare

__all__ = [
    "FaMultiConfig",
    "FractionalSolution",
    "revenue_ordered_optimum",
    "mnl_knapsack_fptas",
    "demand_oracle_mnl",
    "demand_exhaustive",
    "column_generation",
    "solve_config_lp",
    "independent_rounding",
    "round_and_prune",
    "fa_multi_solve",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FaMultiConfig:
    eps: float = 0.05
    delta: float = 0.1
    seed: int = 0
    max_iter: int = 200
    pricing: str = "fptas"  # or "exact-bruteforce"
    repetitions: int = 1
    # columns are added whenever their reduced profit exceeds this
    column_tol: float = 1e-9

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.pricing not in ("fptas", "exact-bruteforce"):
            raise ValueError(f"unknown pricing mode {self.pricing!r}")
        if self.max_iter < 1 or self.repetitions < 1:
            raise ValueError("max_iter and repetitions must be >= 1")


@dataclass
class FractionalSolution:
    """Configuration-LP solution restricted to the generated columns."""

    n: int
    columns: list[list[tuple[tuple[int, ...], float]]]
    objective: float
    bound: float
    certified: bool
    iterations: int
    n_columns: int = 0
    history: list[float] = field(default_factory=list)
    # final master duals: driver prices and rider values
    alpha: np.ndarray = None
    beta: np.ndarray = None

    @property
    def m(self) -> int:
        return len(self.columns)

    def marginals(self) -> np.ndarray:
        x = np.zeros((self.m, self.n))
        for i, cols in enumerate(self.columns):
            for s, y in cols:
                for j in s:
                    x[i, j] += y
        return x


# ---------------------------------------------------------------------------
# MNL pricing
# ---------------------------------------------------------------------------


def _rev(ws, ps, members) -> float:
    return _mnl([ws[j] for j in members], [ps[j] for j in members])


def _revenue_ordered(ws, ps, items) -> tuple[list[int], float]:
    """Best prefix of ``items`` sorted by weight (desc), which is the unconstrained MNL optimum."""
    order = sorted(items, key=lambda j: (-ws[j], j))
    best, best_k = 0.0, 0
    num = den = 0.0
    for k, j in enumerate(order, 1):
        num += ws[j] * ps[j]
        den += ps[j]
        r = num / (1.0 + den)
        if r > best:
            best, best_k = r, k
    return order[:best_k], best


def revenue_ordered_optimum(view: DriverView) -> tuple[tuple[int, ...], float]:
    ws, ps = view.weights.tolist(), view.probs.tolist()
    members, val = _revenue_ordered(ws, ps, range(len(ws)))
    return tuple(sorted(view.drivers[j] for j in members)), val


def _knapsack(values, costs, budget, eta) -> list[int]:
    """0/1 knapsack within factor ``1 - eta`` of optimal value (value-scaling DP).

    Every item must be individually affordable; returns item positions.
    """
    k = len(values)
    vmax = max(values)
    mu = eta * vmax / k
    sv = [int(math.floor(v / mu)) for v in values]
    top = sum(sv)
    cost = np.full(top + 1, math.inf)
    cost[0] = 0.0
    take = np.zeros((k, top + 1), dtype=bool)
    for t in range(k):
        s = sv[t]
        if s == 0:
            continue
        cand = cost[: top + 1 - s] + costs[t]
        better = cand < cost[s:]
        cost[s:][better] = cand[better]
        take[t, s:] = better
    feasible = np.flatnonzero(cost <= budget + 1e-12)
    v = int(feasible[-1])
    chosen = []
    for t in range(k - 1, -1, -1):
        if v and take[t, v]:
            chosen.append(t)
            v -= sv[t]
    return chosen


def _fptas(ws, ps, alpha, budget, eps, hint=None) -> list[int]:
    items = [j for j in range(len(ws)) if alpha[j] <= budget + 1e-12 and ws[j] * ps[j] > 0]
    if not items:
        return []
    hi_set, hi = _revenue_ordered(ws, ps, items)
    if sum(alpha[j] for j in hi_set) <= budget + 1e-12:
        return hi_set

    # feasible starting points: singletons, affordable revenue-ordered prefixes, caller's hint
    order = sorted(items, key=lambda j: (-ws[j], j))
    starts = [[j] for j in items]
    spent = 0.0
    for k, j in enumerate(order):
        spent += alpha[j]
        if spent > budget + 1e-12:
            break
        starts.append(order[: k + 1])
    if hint and sum(alpha[j] for j in hint) <= budget + 1e-12:
        starts.append(list(hint))
    best = max(starts, key=lambda s: _rev(ws, ps, s))
    lo = _rev(ws, ps, best)

    # parametric search: R(S) >= rho  iff  sum_{S} p (w - rho) >= rho
    eta = eps / 2.0
    while lo < (1.0 - eta) * hi:
        rho = math.sqrt(lo * hi)
        cand = [j for j in items if ws[j] > rho]
        if not cand:
            hi = rho
            continue
        vals = [ps[j] * (ws[j] - rho) for j in cand]
        picked = [cand[t] for t in _knapsack(vals, [alpha[j] for j in cand], budget, eta)]
        gain = sum(ps[j] * (ws[j] - rho) for j in picked)
        if picked and gain >= rho:
            r = _rev(ws, ps, picked)
            if r > lo:
                lo, best = r, picked
            else:
                lo = rho  # r >= rho up to rounding
        else:
            hi = rho
    return sorted(best)


def mnl_knapsack_fptas(view: DriverView, costs, budget: float, eps: float) -> tuple[int, ...]:
    """Set with cost <= budget whose MNL revenue is within ``1 - eps`` of the best affordable set."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    ws, ps = view.weights.tolist(), view.probs.tolist()
    alpha = [float(a) for a in costs]
    members = _fptas(ws, ps, alpha, float(budget), eps)
    return tuple(view.drivers[j] for j in members)


def _demand_mnl(ws, ps, alpha, eps) -> list[int]:
    best: list[int] = []
    best_net = 0.0
    prev = None
    useful = sum(a for j, a in enumerate(alpha) if ws[j] * ps[j] > 0)
    for r in range(math.ceil(2.0 / eps) + 1):
        budget = r * eps / 2.0
        s = _fptas(ws, ps, alpha, budget, eps / 2.0, hint=prev)
        net = _rev(ws, ps, s) - sum(alpha[j] for j in s)
        if net > best_net:
            best, best_net = s, net
        prev = s
        if budget >= useful:
            break
    return best


def demand_oracle_mnl(view: DriverView, costs, eps: float) -> tuple[int, ...]:
    """Set whose MNL revenue minus cost is within additive ``eps`` of the best."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    ws, ps = view.weights.tolist(), view.probs.tolist()
    alpha = [max(float(a), 0.0) for a in costs]
    return tuple(view.drivers[j] for j in _demand_mnl(ws, ps, alpha, eps))


def _subset_costs(alpha) -> np.ndarray:
    out = np.zeros(1)
    for a in alpha:
        out = np.concatenate([out, out + a])
    return out


def demand_exhaustive(view: DriverView, costs, kind=ValuationKind.MNL) -> tuple[tuple[int, ...], float]:
    """Exact demand set by enumerating all subsets (n <= 22); returns (set, net value)."""
    net = subset_values(view.weights, view.probs, kind) - _subset_costs(costs)
    mask = int(np.argmax(net))
    return tuple(d for k, d in enumerate(view.drivers) if mask >> k & 1), float(net[mask])


# ---------------------------------------------------------------------------
# Column generation
# ---------------------------------------------------------------------------


def column_generation(
    m: int,
    n: int,
    column_value: Callable[[int, Sequence[int]], float],
    price: Callable[[int, np.ndarray], Sequence[int]],
    initial: Sequence[tuple[int, Sequence[int]]],
    oracle_eps: float,
    eps: float,
    max_iter: int,
    tol: float = 1e-9,
) -> FractionalSolution:
    """Solve ``max sum y_{i,S} v_i(S)`` over driver rows (<= 1) and rider rows (= 1).

    ``price(i, alpha)`` must return a set whose net value is within
    ``oracle_eps`` of the best for rider ``i`` at driver prices ``alpha``.
    The returned ``bound`` is a valid upper bound on the full LP optimum:
    the master duals with each rider's dual raised by its worst priced
    violation plus ``oracle_eps``.
    """
    cols: list[tuple[int, tuple[int, ...]]] = []
    vals: list[float] = []
    seen: set = set()

    def add(i, s):
        key = (i, tuple(sorted(int(j) for j in s)))
        if key in seen:
            return False
        seen.add(key)
        cols.append(key)
        vals.append(float(column_value(i, key[1])))
        return True

    for i in range(m):
        add(i, ())
    for i, s in initial:
        add(i, s)

    history = []
    certified = False
    bound = math.inf
    it = 0
    sol = None
    for it in range(1, max_iter + 1):
        A = np.zeros((n + m, len(cols)))
        for k, (i, s) in enumerate(cols):
            A[list(s), k] = 1.0
            A[n + i, k] = 1.0
        lp = LinearProgram(np.array(vals), A, np.ones(n + m), ["<="] * n + ["="] * m)
        sol = lp_solve(lp)
        if sol.status != "optimal":
            raise RuntimeError(f"restricted master LP failed: {sol.status}")
        history.append(sol.objective)
        alpha = np.maximum(sol.duals[:n], 0.0)
        beta = sol.duals[n:]
        added = False
        worst = 0.0
        slack_total = 0.0
        for i in range(m):
            s = tuple(sorted(price(i, alpha)))
            viol = column_value(i, s) - float(alpha[list(s)].sum()) - beta[i]
            worst = max(worst, viol)
            slack_total += max(0.0, viol + oracle_eps)
            if viol > tol and add(i, s):
                added = True
        bound = min(bound, float(beta.sum() + alpha.sum()) + slack_total)
        if not added:
            certified = worst <= eps
            break
    else:
        log.warning("column generation hit the iteration cap (%d) without a certificate", max_iter)

    per_rider: list[list[tuple[tuple[int, ...], float]]] = [[] for _ in range(m)]
    for (i, s), y in zip(cols, sol.x):
        if y > 1e-12:
            per_rider[i].append((s, float(y)))
    return FractionalSolution(
        n=n,
        columns=per_rider,
        objective=float(sol.objective),
        bound=max(bound, float(sol.objective)),
        certified=certified,
        iterations=it,
        n_columns=len(cols),
        history=history,
        alpha=alpha,
        beta=beta,
    )


def solve_config_lp(inst: Instance, cfg: FaMultiConfig | None = None) -> FractionalSolution:
    """Configuration LP with MNL-valued columns, priced by the approximate demand oracle."""
    cfg = cfg or FaMultiConfig()
    check(inst)
    m, n = inst.m, inst.n
    W = inst.weights.tolist()
    P = inst.probs.tolist()

    def column_value(i, s):
        return _mnl([W[i][j] for j in s], [P[i][j] for j in s])

    if cfg.pricing == "exact-bruteforce":
        views = [DriverView.of(inst, i) for i in range(m)]

        def price(i, alpha):
            return demand_exhaustive(views[i], alpha)[0]

        oracle_eps = 0.0
    else:

        def price(i, alpha):
            return _demand_mnl(W[i], P[i], alpha.tolist(), cfg.eps)

        oracle_eps = cfg.eps

    initial = [(i, (j,)) for i in range(m) for j in range(n)]
    initial += [(i, _revenue_ordered(W[i], P[i], range(n))[0]) for i in range(m)]
    return column_generation(
        m, n, column_value, price, initial, oracle_eps, cfg.eps, cfg.max_iter, cfg.column_tol
    )


# ---------------------------------------------------------------------------
# Rounding and pruning
# ---------------------------------------------------------------------------


def independent_rounding(x: np.ndarray, rng: np.random.Generator, draws: int | None = None) -> np.ndarray:
    """Per driver: with prob. ``sum_i x_ij`` pick rider ``i`` w.p. proportional to ``x_ij``, else none.

    One uniform ``u`` per driver does both steps: ``u < sum_i x_ij`` is the
    coin and the position of ``u`` in the cumulative column picks the rider.
    Returns labels (``-1`` = unassigned), shape ``(n,)`` or ``(draws, n)``.
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    m, n = x.shape
    cum = np.cumsum(x, axis=0)
    over = cum[-1] > 1.0
    if over.any():
        # LP round-off can push a driver's total a hair above 1
        cum[:, over] /= cum[-1, over]
    shape = (n,) if draws is None else (draws, n)
    u = rng.random(shape)
    labels = (u[..., None, :] >= cum).sum(axis=-2)
    return np.where(labels >= m, -1, labels)


def _prune_all(inst: Instance, labels, delta: float) -> Assignment:
    cfg = PtasConfig(delta)
    sets = []
    for i in range(inst.m):
        proposed = [j for j, lab in enumerate(labels) if lab == i]
        chosen, _ = prune(DriverView.of(inst, i, proposed), cfg)
        sets.append(chosen)
    return Assignment(tuple(sets))


def round_and_prune(
    inst: Instance, frac: FractionalSolution, cfg: FaMultiConfig | None = None, rng=None
) -> Assignment:
    cfg = cfg or FaMultiConfig()
    rng = rng if rng is not None else rng_from_seed(cfg.seed)
    labels = independent_rounding(frac.marginals(), rng)
    return _prune_all(inst, labels, cfg.delta)


def fa_multi_solve(inst: Instance, cfg: FaMultiConfig | None = None) -> Solution:
    """LP + independent rounding + PTAS pruning; keeps the best of ``cfg.repetitions`` draws."""
    cfg = cfg or FaMultiConfig()
    frac = solve_config_lp(inst, cfg)
    rng = rng_from_seed(cfg.seed)
    best = None
    best_val = -math.inf
    for _ in range(cfg.repetitions):
        asg = round_and_prune(inst, frac, cfg, rng)
        val = welfare(inst, asg, ValuationKind.FA)
        if val > best_val:
            best, best_val = asg, val
    return Solution(
        best,
        best_val,
        {
            "lp_objective": frac.objective,
            "lp_bound": frac.bound,
            # FA <= 2 MNL on every set, so this caps the FA optimum
            "fa_bound": 2.0 * frac.bound,
            "certified": frac.certified,
            "iterations": frac.iterations,
            "columns": frac.n_columns,
        },
    )
