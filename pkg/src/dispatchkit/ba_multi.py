"""Multi-rider BA: exact homogeneous solver, greedy, continuous greedy, demand DP, LP bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baselines import greedy
from .core import Assignment, Instance, Solution, check, rng_from_seed
from .fa_multi import FractionalSolution, column_generation, independent_rounding
from .optlib import max_weight_matching
from .valuation import DriverView, ValuationKind, _ba, welfare

__all__ = [
    "HeterogeneousProbabilities",
    "CgConfig",
    "ba_homogeneous_solve",
    "ba_greedy",
    "multilinear",
    "multilinear_marginals",
    "ba_continuous_greedy",
    "ba_demand_oracle",
    "ba_config_lp_bound",
]

SLOT_CUTOFF = 1e-12


class HeterogeneousProbabilities(ValueError):
    """The exact matching reduction needs one common acceptance probability."""


# ---------------------------------------------------------------------------
# Homogeneous probabilities: matching over (rider, slot) pairs
# ---------------------------------------------------------------------------


def _slot_count(p: float, n: int) -> int:
    if p >= 1.0:
        return 1
    return max(1, min(n, math.ceil(math.log(SLOT_CUTOFF) / math.log1p(-p))))


def ba_homogeneous_solve(inst: Instance, tol: float = 1e-12) -> Solution:
    """Exact BA optimum when every acceptance probability equals the same ``p``.

    Slot ``l`` (0-based) of rider ``i`` pays ``p (1 - p)^l w_ij``: the driver
    in that slot is the ``(l+1)``-th best of the rider's set.
    """
    check(inst)
    if not inst.is_homogeneous(tol):
        spread = float(inst.probs.max() - inst.probs.min())
        raise HeterogeneousProbabilities(
            f"acceptance probabilities differ by up to {spread:.3g}; the matching reduction needs a common p"
        )
    p = float(inst.probs.flat[0])
    m, n = inst.m, inst.n
    if p <= 0.0:
        return Solution(Assignment.empty(m), 0.0, {"p": p, "slots": [[] for _ in range(m)], "matching_weight": 0.0})
    L = _slot_count(p, n)
    coef = p * (1.0 - p) ** np.arange(L)
    # drivers x (rider, slot), column i * L + l
    edge = (inst.weights.T[:, :, None] * coef[None, None, :]).reshape(n, m * L)
    pairs, total = max_weight_matching(edge)
    slots = [[] for _ in range(m)]
    for j, col in pairs:
        slots[col // L].append((j, col % L))
    for s in slots:
        s.sort(key=lambda t: t[1])
    asg = Assignment(tuple(tuple(j for j, _ in s) for s in slots))
    return Solution(
        asg,
        welfare(inst, asg, ValuationKind.BA),
        {"p": p, "slots": slots, "matching_weight": total, "slot_count": L},
    )


def ba_greedy(inst: Instance, seed: int = 0, order=None) -> Solution:
    return greedy(inst, ValuationKind.BA, seed, order)


# ---------------------------------------------------------------------------
# Continuous greedy on the closed-form multilinear extension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CgConfig:
    steps: int = 100
    seed: int = 0
    repetitions: int = 1

    def __post_init__(self):
        if self.steps < 1 or self.repetitions < 1:
            raise ValueError("steps and repetitions must be >= 1")


def _sorted_rows(W):
    return np.argsort(-W, axis=1, kind="stable")


def multilinear(inst: Instance, x) -> float:
    """Expected BA welfare when driver ``j`` joins rider ``i``'s set independently w.p. ``x_ij``.

    Independent thinning composes with acceptance, so this is BA evaluated on
    the full driver set with probabilities ``x_ij * p_ij``.
    """
    x = np.asarray(x, dtype=float)
    q = x * inst.probs
    return float(sum(_ba(inst.weights[i].tolist(), q[i].tolist()) for i in range(inst.m)))


def multilinear_marginals(inst: Instance, x) -> np.ndarray:
    """``G(x, x_ij = 1) - G(x, x_ij = 0)`` for every pair, exactly."""
    x = np.asarray(x, dtype=float)
    W, P = inst.weights, inst.probs
    order = _sorted_rows(W)
    rows = np.arange(inst.m)[:, None]
    ws = W[rows, order]
    ps = P[rows, order]
    qs = x[rows, order] * ps
    n = inst.n
    before = np.ones_like(qs)  # nobody heavier accepted
    before[:, 1:] = np.cumprod(1.0 - qs[:, :-1], axis=1)
    after = np.zeros_like(qs)  # expected best among lighter drivers
    for k in range(n - 2, -1, -1):
        after[:, k] = qs[:, k + 1] * ws[:, k + 1] + (1.0 - qs[:, k + 1]) * after[:, k + 1]
    sorted_marg = before * ps * (ws - after)
    out = np.empty_like(sorted_marg)
    out[rows, order] = sorted_marg
    return out


def _cg_point(inst: Instance, steps: int) -> np.ndarray:
    x = np.zeros((inst.m, inst.n))
    cols = np.arange(inst.n)
    for _ in range(steps):
        marg = multilinear_marginals(inst, x)
        marg[x >= 1.0] = 0.0
        best = np.argmax(marg, axis=0)  # ties to the lower rider index
        gain = marg[best, cols]
        move = gain > 0
        if not move.any():
            break
        x[best[move], cols[move]] = np.minimum(x[best[move], cols[move]] + 1.0 / steps, 1.0)
    return x


def ba_continuous_greedy(inst: Instance, cfg: CgConfig | None = None) -> Solution:
    """Ascend the multilinear extension in ``steps`` steps, then round per driver."""
    cfg = cfg or CgConfig()
    check(inst)
    x = _cg_point(inst, cfg.steps)
    rng = rng_from_seed(cfg.seed)
    best, best_val = None, -math.inf
    for _ in range(cfg.repetitions):
        asg = Assignment.from_labels(independent_rounding(x, rng).tolist(), inst.m)
        val = welfare(inst, asg, ValuationKind.BA)
        if val > best_val:
            best, best_val = asg, val
    return Solution(best, best_val, {"fractional_value": multilinear(inst, x), "x": x})


# ---------------------------------------------------------------------------
# Demand oracle and configuration-LP bound
# ---------------------------------------------------------------------------


def _ba_demand(ws, ps, lam, eps) -> tuple[list[int], float]:
    n = len(ws)
    if n == 0:
        return [], 0.0
    K = eps / n
    keep = [j for j in range(n) if lam[j] <= 1.0 and ws[j] * ps[j] > 0]
    if not keep:
        return [], 0.0
    keep.sort(key=lambda j: (-ws[j], j))
    # prices in integer grid units of K
    units = [int(math.floor(lam[j] / K)) for j in keep]
    top = sum(units)
    k = len(keep)
    V = np.zeros((k + 1, top + 1))
    for t in range(k - 1, -1, -1):
        j, c = keep[t], units[t]
        V[t] = V[t + 1]
        if c <= top:
            cand = ps[j] * ws[j] + (1.0 - ps[j]) * V[t + 1, : top + 1 - c]
            V[t, c:] = np.maximum(V[t + 1, c:], cand)
    b = int(np.argmax(V[0] - K * np.arange(top + 1)))
    chosen = []
    for t in range(k):
        j, c = keep[t], units[t]
        if c <= b and V[t, b] > V[t + 1, b]:
            chosen.append(j)
            b -= c
    chosen.sort()
    net = _ba([ws[j] for j in chosen], [ps[j] for j in chosen]) - sum(lam[j] for j in chosen)
    if net < 0.0:
        return [], 0.0
    return chosen, net


def ba_demand_oracle(view: DriverView, prices, eps: float) -> tuple[tuple[int, ...], float]:
    """Set whose BA value minus price is within additive ``eps`` of the best; returns (set, net)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    lam = [float(v) for v in prices]
    if len(lam) != len(view) or min(lam, default=0.0) < 0:
        raise ValueError("one nonnegative price per driver is required")
    chosen, net = _ba_demand(view.weights.tolist(), view.probs.tolist(), lam, eps)
    return tuple(view.drivers[j] for j in chosen), net


def ba_config_lp_bound(inst: Instance, eps: float = 0.05, max_iter: int = 200, tol: float = 1e-9) -> FractionalSolution:
    """Configuration LP with BA-valued columns priced by the demand DP.

    ``objective`` is the restricted master value; ``bound`` is a valid upper
    bound on the BA optimum (and on the full LP).
    """
    check(inst)
    if not eps > 0:
        raise ValueError("eps must be positive")
    m, n = inst.m, inst.n
    W = inst.weights.tolist()
    P = inst.probs.tolist()

    def column_value(i, s):
        return _ba([W[i][j] for j in s], [P[i][j] for j in s])

    def price(i, alpha):
        return _ba_demand(W[i], P[i], alpha.tolist(), eps)[0]

    initial = [(i, (j,)) for i in range(m) for j in range(n)]
    initial += [(i, tuple(range(n))) for i in range(m)]
    return column_generation(m, n, column_value, price, initial, eps, eps, max_iter, tol)
