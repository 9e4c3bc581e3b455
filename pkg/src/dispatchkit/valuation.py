"""Exact FA / BA / MNL set valuations for a single rider.

FA is evaluated through its integral form: for each notified driver the
probability of winning contention is ``p_j * int_0^1 prod_{k != j} (1 - p_k + p_k t) dt``.
Two polynomials are carried while drivers are added one at a time,

    g(t) = prod_k (1 - p_k + p_k t)
    h(t) = sum_j w_j p_j prod_{k != j} (1 - p_k + p_k t)

so a set of size ``s`` costs O(s^2) and every coefficient stays nonnegative
(no cancellation).  ``F = int h``, and the break-even weight for adding a new
driver is ``A / B`` with ``A = int (1 - t) h`` and ``B = int g``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import Assignment, Instance, rng_from_seed

__all__ = [
    "ValuationKind",
    "DriverView",
    "ThresholdParts",
    "fa_value",
    "ba_value",
    "mnl_value",
    "value",
    "fa_threshold",
    "closure_value",
    "subset_values",
    "closure_table",
    "simulate",
    "welfare",
    "CLOSURE_MAX_DRIVERS",
]

CLOSURE_MAX_DRIVERS = 25
TABLE_MAX_DRIVERS = 22


class ValuationKind(str, enum.Enum):
    FA = "fa"
    BA = "ba"
    MNL = "mnl"


@dataclass(frozen=True, eq=False)
class DriverView:
    """The drivers of one rider's row: weights, probabilities and driver ids."""

    weights: np.ndarray
    probs: np.ndarray
    drivers: tuple[int, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if w.shape != p.shape:
            raise ValueError("weights and probs must have the same length")
        drivers = tuple(int(d) for d in self.drivers)
        if len(drivers) != len(w):
            raise ValueError("one driver id per entry is required")
        if len(set(drivers)) != len(drivers):
            raise ValueError("driver ids must be distinct")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "drivers", drivers)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]], drivers=None) -> "DriverView":
        pairs = list(pairs)
        w = [float(a) for a, _ in pairs]
        p = [float(b) for _, b in pairs]
        return cls(w, p, tuple(range(len(pairs))) if drivers is None else drivers)

    @classmethod
    def of(cls, inst: Instance, rider: int, drivers=None) -> "DriverView":
        if drivers is None:
            drivers = range(inst.n)
        drivers = tuple(int(j) for j in drivers)
        idx = list(drivers)
        return cls(inst.weights[rider, idx], inst.probs[rider, idx], drivers)

    def __len__(self) -> int:
        return len(self.drivers)

    def restrict(self, drivers) -> "DriverView":
        """Sub-view on the given driver ids (which must belong to this view)."""
        pos = {d: k for k, d in enumerate(self.drivers)}
        drivers = tuple(int(d) for d in drivers)
        idx = [pos[d] for d in drivers]
        return DriverView(self.weights[idx], self.probs[idx], drivers)

    def with_probs(self, probs) -> "DriverView":
        return DriverView(self.weights, probs, self.drivers)


@dataclass(frozen=True)
class ThresholdParts:
    A: float
    B: float

    @property
    def tau(self) -> float:
        return self.A / self.B


def _fa_polys(ws: Sequence[float], ps: Sequence[float]) -> tuple[list[float], list[float]]:
    g = [1.0]
    h = [0.0]
    for w, p in zip(ws, ps):
        q = 1.0 - p
        wp = w * p
        ng = [q * c for c in g] + [0.0]
        nh = [q * c for c in h] + [0.0]
        for r, c in enumerate(g):
            ng[r + 1] += p * c
            nh[r] += wp * c
        for r, c in enumerate(h):
            nh[r + 1] += p * c
        g, h = ng, nh
    return g, h


def _fa(ws: Sequence[float], ps: Sequence[float]) -> float:
    if len(ws) == 0:
        return 0.0
    _, h = _fa_polys(ws, ps)
    return sum(c / (r + 1) for r, c in enumerate(h))


def _ba(ws: Sequence[float], ps: Sequence[float]) -> float:
    order = sorted(range(len(ws)), key=lambda k: (-ws[k], k))
    total = 0.0
    survive = 1.0
    for k in order:
        total += survive * ws[k] * ps[k]
        survive *= 1.0 - ps[k]
    return total


def _mnl(ws: Sequence[float], ps: Sequence[float]) -> float:
    if len(ws) == 0:
        return 0.0
    num = sum(w * p for w, p in zip(ws, ps))
    return num / (1.0 + sum(ps))


def fa_value(view: DriverView) -> float:
    """Expected score of a uniformly random acceptor (0 when nobody accepts)."""
    return _fa(view.weights.tolist(), view.probs.tolist())


def ba_value(view: DriverView) -> float:
    """Expected score of the best acceptor (0 when nobody accepts)."""
    return _ba(view.weights.tolist(), view.probs.tolist())


def mnl_value(view: DriverView) -> float:
    """MNL revenue ``sum w_j p_j / (1 + sum p_k)``."""
    return _mnl(view.weights.tolist(), view.probs.tolist())


_SCALAR = {
    ValuationKind.FA: _fa,
    ValuationKind.BA: _ba,
    ValuationKind.MNL: _mnl,
}


def value(view: DriverView, kind) -> float:
    kind = ValuationKind(kind)
    return _SCALAR[kind](view.weights.tolist(), view.probs.tolist())


def fa_threshold(view: DriverView) -> ThresholdParts:
    """Break-even weight of the next driver: marginal >= 0 iff ``w_d >= A / B``.

    The marginal of adding ``d`` is exactly ``p_d * (w_d * B - A)``.
    """
    g, h = _fa_polys(view.weights.tolist(), view.probs.tolist())
    A = sum(c / ((r + 1) * (r + 2)) for r, c in enumerate(h))
    B = sum(c / (r + 1) for r, c in enumerate(g))
    return ThresholdParts(A, B)


def welfare(inst: Instance, asg: Assignment, kind) -> float:
    """Sum of per-rider values of an assignment."""
    kind = ValuationKind(kind)
    f = _SCALAR[kind]
    total = 0.0
    for i, s in enumerate(asg.sets):
        idx = list(s)
        total += f(inst.weights[i, idx].tolist(), inst.probs[i, idx].tolist())
    return total


# ---------------------------------------------------------------------------
# Vectorized evaluation over all subsets (brute-force oracles)
# ---------------------------------------------------------------------------


class _FaState:
    def __init__(self, n):
        self.width = n + 1
        self.inv = 1.0 / np.arange(1, n + 2)

    def start(self, ws, ps):
        g, h = _fa_polys(ws, ps)
        G = np.zeros((1, self.width))
        H = np.zeros((1, self.width))
        G[0, : len(g)] = g
        H[0, : len(h)] = h
        return G, H

    def add(self, state, w, p):
        G, H = state
        q = 1.0 - p
        G2 = q * G
        G2[:, 1:] += p * G[:, :-1]
        H2 = q * H + (w * p) * G
        H2[:, 1:] += p * H[:, :-1]
        return np.concatenate([G, G2]), np.concatenate([H, H2])

    def finish(self, state):
        return state[1] @ self.inv


class _MnlState:
    def __init__(self, n):
        pass

    def start(self, ws, ps):
        return np.array([sum(w * p for w, p in zip(ws, ps))]), np.array([float(sum(ps))])

    def add(self, state, w, p):
        N, D = state
        return np.concatenate([N, N + w * p]), np.concatenate([D, D + p])

    def finish(self, state):
        N, D = state
        return N / (1.0 + D)


class _BaState:
    """E[max] = sum_r (u_r - u_{r+1}) * (1 - prod_{accepting pool above u_r}(1 - p))."""

    def __init__(self, weights):
        u = np.unique(np.asarray(weights, dtype=float))[::-1]
        u = u[u > 0]
        self.levels = u
        self.gaps = u - np.append(u[1:], 0.0)

    def start(self, ws, ps):
        Q = np.ones((1, len(self.levels)))
        for w, p in zip(ws, ps):
            Q[0, self.levels <= w] *= 1.0 - p
        return Q

    def add(self, Q, w, p):
        Q2 = Q.copy()
        Q2[:, self.levels <= w] *= 1.0 - p
        return np.concatenate([Q, Q2])

    def finish(self, Q):
        return (1.0 - Q) @ self.gaps


def _make_state(kind, w):
    kind = ValuationKind(kind)
    if kind is ValuationKind.FA:
        return _FaState(len(w))
    if kind is ValuationKind.MNL:
        return _MnlState(len(w))
    return _BaState(w)


def iter_subset_values(w, p, kind, low_bits: int = 16) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(offset, values)`` chunks; ``values[k]`` is the value of the set with bitmask ``offset + k``.

    Bit ``j`` of a mask stands for position ``j`` of ``w`` / ``p``.
    """
    w = [float(x) for x in w]
    p = [float(x) for x in p]
    n = len(w)
    c = min(n, low_bits)
    st = _make_state(kind, w)
    for hp in range(1 << (n - c)):
        hi = [c + b for b in range(n - c) if hp >> b & 1]
        state = st.start([w[j] for j in hi], [p[j] for j in hi])
        for j in range(c):
            state = st.add(state, w[j], p[j])
        yield hp << c, st.finish(state)


def subset_values(w, p, kind) -> np.ndarray:
    """Values of all ``2**n`` subsets indexed by bitmask (n <= 22)."""
    n = len(w)
    if n > TABLE_MAX_DRIVERS:
        raise ValueError(f"subset table limited to {TABLE_MAX_DRIVERS} drivers, got {n}")
    out = np.empty(1 << n)
    for off, vals in iter_subset_values(w, p, kind, low_bits=TABLE_MAX_DRIVERS):
        out[off : off + len(vals)] = vals
    return out


def closure_table(values: np.ndarray) -> np.ndarray:
    """``out[mask] = max over submasks`` of ``values`` (downward monotone closure)."""
    out = np.array(values, dtype=float, copy=True)
    size = len(out)
    n = size.bit_length() - 1
    for b in range(n):
        v = out.reshape(-1, 2, 1 << b)
        np.maximum(v[:, 1, :], v[:, 0, :], out=v[:, 1, :])
    return out


def mask_members(mask: int, n: int) -> tuple[int, ...]:
    return tuple(j for j in range(n) if mask >> j & 1)


def _lex_smallest(masks, n) -> int:
    return min((int(mk) for mk in masks), key=lambda mk: mask_members(mk, n))


def best_subset(view: DriverView, kind) -> tuple[float, tuple[int, ...]]:
    """Exact argmax over all subsets; ties go to the lexicographically smallest driver tuple."""
    n = len(view)
    if n > CLOSURE_MAX_DRIVERS:
        raise ValueError(f"exhaustive search limited to {CLOSURE_MAX_DRIVERS} drivers, got {n}")
    best = -math.inf
    ties: list[int] = []
    for off, vals in iter_subset_values(view.weights, view.probs, kind):
        top = float(vals.max())
        if top > best:
            best = top
            ties = []
        if top == best:
            ties.extend(int(off + k) for k in np.flatnonzero(vals == top))
    mask = _lex_smallest(ties, n)
    members = mask_members(mask, n)
    return best, tuple(view.drivers[k] for k in members)


def closure_value(view: DriverView, kind) -> tuple[float, tuple[int, ...]]:
    """Best value over all subsets of the view and one subset attaining it."""
    return best_subset(view, kind)


# ---------------------------------------------------------------------------
# Monte Carlo contention simulator
# ---------------------------------------------------------------------------


def simulate(view: DriverView, kind, trials: int, seed: int, batch: int = 100_000) -> tuple[float, float]:
    """Sample acceptances and resolve contention; returns (mean payoff, standard error)."""
    kind = ValuationKind(kind)
    if kind is ValuationKind.MNL:
        raise ValueError("simulate supports the FA and BA protocols only")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng_from_seed(seed)
    w = view.weights
    p = view.probs
    total = 0.0  # exact-ish running sum
    m2 = 0.0  # pooled sum of squared deviations
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        if len(w) == 0:
            pay = np.zeros(b)
        else:
            acc = rng.random((b, len(w))) < p
            if kind is ValuationKind.BA:
                pay = np.where(acc, w, 0.0).max(axis=1)
            else:
                # argmax of i.i.d. keys over acceptors is a uniform acceptor
                keys = np.where(acc, rng.random((b, len(w))), -1.0)
                pick = keys.argmax(axis=1)
                pay = np.where(acc.any(axis=1), w[pick], 0.0)
        bsum = math.fsum(pay)
        bmean = bsum / b
        bm2 = math.fsum((pay - bmean) ** 2)
        if done:
            delta = bmean - total / done
            m2 += bm2 + delta * delta * done * b / (done + b)
        else:
            m2 = bm2
        total += bsum
        done += b
    mean = total / trials
    if trials == 1:
        return mean, 0.0
    return mean, math.sqrt(m2 / (trials - 1) / trials)
