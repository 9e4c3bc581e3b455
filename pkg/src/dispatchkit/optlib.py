"""Dense revised simplex with dual prices, and max-weight bipartite matching.

Both solvers are small, deterministic and dependency-free beyond numpy; the
configuration LPs they serve have at most a few hundred rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "LinearProgram",
    "LpSolution",
    "lp_solve",
    "max_weight_matching",
]

_TOL = 1e-9


@dataclass
class LinearProgram:
    """maximize ``c @ x`` subject to ``A[r] @ x (<=|=|>=) b[r]`` and ``x >= 0``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: Sequence[str] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, len(self.c))
        if A.ndim != 2 or A.shape[1] != len(self.c):
            raise ValueError(f"A has shape {A.shape}, expected (rows, {len(self.c)})")
        self.A = A
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.senses is None:
            self.senses = ["<="] * len(self.b)
        self.senses = list(self.senses)
        if self.A.shape[0] != len(self.b) or len(self.senses) != len(self.b):
            raise ValueError("row counts of A, b and senses disagree")
        bad = set(self.senses) - {"<=", "=", ">="}
        if bad:
            raise ValueError(f"unknown constraint senses {bad}")
        for name in ("c", "A", "b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entry in {name}")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray = None
    duals: np.ndarray = None
    objective: float = math.nan
    iterations: int = 0
    basis: tuple = field(default=())

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Simplex:
    """Revised simplex on ``max c x, A x = b, x >= 0`` with an explicit basis.

    Dantzig pricing; after a run of degenerate pivots the rule switches to
    Bland's smallest-index rule for the rest of the solve, which rules out cycling.
    """

    def __init__(self, A, b, max_iter):
        self.A = A
        self.b = b
        self.max_iter = max_iter
        self.iterations = 0

    def run(self, c, basis, allowed):
        A, b = self.A, self.b
        bland = False
        degenerate = 0
        while True:
            if self.iterations >= self.max_iter:
                return "iteration_limit"
            B = A[:, basis]
            try:
                xB = np.linalg.solve(B, b)
                y = np.linalg.solve(B.T, c[basis])
            except np.linalg.LinAlgError:
                return "numerical"
            d = c - A.T @ y
            d[basis] = 0.0
            d[~allowed] = 0.0
            cand = np.flatnonzero(d > _TOL)
            if cand.size == 0:
                return "optimal"
            e = int(cand[0]) if bland else int(cand[np.argmax(d[cand])])
            u = np.linalg.solve(B, A[:, e])
            rows = np.flatnonzero(u > _TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = np.maximum(xB[rows], 0.0) / u[rows]
            best = ratios.min()
            tied = rows[ratios <= best + _TOL * max(1.0, best)]
            leave = int(min(tied, key=lambda r: basis[r]))
            basis[leave] = e
            self.iterations += 1
            if best <= _TOL:
                degenerate += 1
                if degenerate > 50:
                    bland = True
            else:
                degenerate = 0


def lp_solve(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    """Two-phase revised simplex; returns primal values and row duals.

    Duals follow the usual sign convention for a maximization: nonnegative on
    ``<=`` rows, nonpositive on ``>=`` rows, free on equalities.
    """
    A0, b0, c0 = lp.A, lp.b, lp.c
    nrow, nvar = A0.shape
    senses = lp.senses

    # structural | slack/surplus | artificial
    slack_rows = [r for r in range(nrow) if senses[r] != "="]
    ns = len(slack_rows)
    S = np.zeros((nrow, ns))
    for k, r in enumerate(slack_rows):
        S[r, k] = 1.0 if senses[r] == "<=" else -1.0
    A = np.hstack([A0, S])
    b = b0.copy()
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign

    basis = [-1] * nrow
    for k, r in enumerate(slack_rows):
        if A[r, nvar + k] > 0:
            basis[r] = nvar + k
    art_rows = [r for r in range(nrow) if basis[r] < 0]
    na = len(art_rows)
    Art = np.zeros((nrow, na))
    for k, r in enumerate(art_rows):
        Art[r, k] = 1.0
        basis[r] = nvar + ns + k
    A = np.hstack([A, Art])
    ntot = nvar + ns + na
    is_art = np.zeros(ntot, dtype=bool)
    is_art[nvar + ns :] = True

    if max_iter is None:
        max_iter = 50 * (nrow + ntot) + 1000
    sx = _Simplex(A, b, max_iter)

    if na:
        c1 = np.where(is_art, -1.0, 0.0)
        status = sx.run(c1, basis, np.ones(ntot, dtype=bool))
        if status != "optimal":
            return LpSolution(status, iterations=sx.iterations)
        xB = np.linalg.solve(A[:, basis], b)
        if -float(c1[basis] @ xB) > 1e-7 * max(1.0, np.abs(b).max()):
            return LpSolution("infeasible", iterations=sx.iterations)
        # pivot zero-level artificials out where a real column can replace them
        for r in range(nrow):
            if not is_art[basis[r]]:
                continue
            Binv_r = np.linalg.solve(A[:, basis].T, np.eye(nrow)[r])
            row = Binv_r @ A
            for j in range(nvar + ns):
                if j not in basis and abs(row[j]) > 1e-7:
                    basis[r] = j
                    break

    c = np.concatenate([c0, np.zeros(ns + na)])
    status = sx.run(c, basis, ~is_art)
    if status != "optimal":
        return LpSolution(status, iterations=sx.iterations)

    B = A[:, basis]
    xB = np.linalg.solve(B, b)
    y = np.linalg.solve(B.T, c[basis])
    x = np.zeros(ntot)
    x[basis] = xB
    x = np.where(np.abs(x) < 1e-12, 0.0, x)
    primal = x[:nvar]
    duals = y * sign
    obj = float(c0 @ primal)

    # certify: primal feasibility, dual feasibility, zero gap
    resid = A0 @ primal - b0
    viol = 0.0
    for r in range(nrow):
        if senses[r] == "<=":
            viol = max(viol, resid[r])
        elif senses[r] == ">=":
            viol = max(viol, -resid[r])
        else:
            viol = max(viol, abs(resid[r]))
    viol = max(viol, -primal.min(initial=0.0))
    dual_obj = float(b0 @ duals)
    scale = 1.0 + abs(obj)
    if viol > 1e-8 * max(1.0, np.abs(b0).max(initial=0.0)) or abs(obj - dual_obj) > 1e-6 * scale:
        return LpSolution("numerical", primal, duals, obj, sx.iterations, tuple(basis))
    return LpSolution("optimal", primal, duals, obj, sx.iterations, tuple(basis))


def _hungarian_min(cost: np.ndarray) -> np.ndarray:
    """Assign every row (rows <= cols) to a distinct column at minimum total cost.

    Shortest augmenting paths with row/column potentials, O(r^2 c).
    """
    r, c = cost.shape
    INF = math.inf
    u = np.zeros(r + 1)
    v = np.zeros(c + 1)
    match_col = np.zeros(c + 1, dtype=int)  # column -> row (1-based, 0 = free)
    way = np.zeros(c + 1, dtype=int)
    for i in range(1, r + 1):
        match_col[0] = i
        j0 = 0
        minv = np.full(c + 1, INF)
        used = np.zeros(c + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match_col[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            upd = free & (cur < minv[1:])
            minv[1:][upd] = cur[upd]
            way[1:][upd] = j0
            cand = np.where(free, minv[1:], INF)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            used_idx = np.flatnonzero(used)
            u[match_col[used_idx]] += delta
            v[used_idx] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if match_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match_col[j0] = match_col[j1]
            j0 = j1
    row_to_col = np.full(r, -1)
    for j in range(1, c + 1):
        if match_col[j]:
            row_to_col[match_col[j] - 1] = j - 1
    return row_to_col


def max_weight_matching(weights, allow_unmatched: bool = True, tol: float = 1e-12):
    """Maximum-weight matching of a bipartite graph given as an r x c weight matrix.

    Returns ``(pairs, total)`` with ``pairs`` a sorted list of (row, col).
    With ``allow_unmatched`` (the default) pairs whose weight is <= ``tol`` are
    dropped; they never add weight since all weights are nonnegative.
    """
    W = np.asarray(weights, dtype=float)
    if W.ndim != 2:
        raise ValueError("weights must be a 2-d matrix")
    if W.size and (not np.all(np.isfinite(W)) or W.min() < 0):
        raise ValueError("weights must be finite and nonnegative")
    r, c = W.shape
    if r == 0 or c == 0:
        return [], 0.0
    transposed = r > c
    M = W.T if transposed else W
    assign = _hungarian_min(-M)
    pairs = []
    for i, j in enumerate(assign):
        if j < 0:
            continue
        pair = (int(j), i) if transposed else (i, int(j))
        if allow_unmatched and W[pair] <= tol:
            continue
        pairs.append(pair)
    pairs.sort()
    total = float(sum(W[p] for p in pairs))
    return pairs, total
