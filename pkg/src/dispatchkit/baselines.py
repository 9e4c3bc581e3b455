"""Reference solvers: exclusive dispatch, per-driver greedy, exhaustive optimum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Assignment, Instance, Solution, check, rng_from_seed
from .optlib import max_weight_matching
from .valuation import _SCALAR, ValuationKind, subset_values, welfare

__all__ = [
    "OracleBudget",
    "BudgetExceeded",
    "ed_solve",
    "greedy",
    "fa_greedy",
    "opt_bruteforce",
]


class BudgetExceeded(ValueError):
    """The exhaustive enumeration needs more states than the budget allows."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(f"enumeration needs {required} states, budget is {budget}")


@dataclass(frozen=True)
class OracleBudget:
    max_states: int = 10**7

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be positive")


def ed_solve(inst: Instance, raw_weights: bool = False) -> Solution:
    """Exclusive dispatch: at most one driver per rider via max-weight matching.

    Edges are weighted ``p * w`` (expected score of a single exclusive offer),
    or plain ``w`` with ``raw_weights``.  The reported welfare is always the
    expected score ``sum p * w`` of the chosen pairs.
    """
    check(inst)
    edge = inst.weights if raw_weights else inst.weights * inst.probs
    pairs, _ = max_weight_matching(edge)
    sets = [[] for _ in range(inst.m)]
    for i, j in pairs:
        sets[i].append(j)
    asg = Assignment(tuple(tuple(s) for s in sets))
    return Solution(asg, welfare(inst, asg, ValuationKind.FA), {"edge_weights": "w" if raw_weights else "p*w"})


def greedy(inst: Instance, kind, seed: int = 0, order=None) -> Solution:
    """Visit drivers once in a seeded random order; give each to the rider with the
    largest positive marginal value (ties to the lower rider index)."""
    check(inst)
    kind = ValuationKind(kind)
    f = _SCALAR[kind]
    if order is None:
        order = rng_from_seed(seed).permutation(inst.n)
    order = [int(j) for j in order]
    if sorted(order) != list(range(inst.n)):
        raise ValueError("order must be a permutation of the drivers")
    W = inst.weights.tolist()
    P = inst.probs.tolist()
    ws = [[] for _ in range(inst.m)]
    ps = [[] for _ in range(inst.m)]
    cur = [0.0] * inst.m
    sets = [[] for _ in range(inst.m)]
    for j in order:
        best_gain, best_i, best_val = 0.0, -1, 0.0
        for i in range(inst.m):
            v = f(ws[i] + [W[i][j]], ps[i] + [P[i][j]])
            if v - cur[i] > best_gain:
                best_gain, best_i, best_val = v - cur[i], i, v
        if best_i >= 0:
            ws[best_i].append(W[best_i][j])
            ps[best_i].append(P[best_i][j])
            cur[best_i] = best_val
            sets[best_i].append(j)
    asg = Assignment(tuple(tuple(s) for s in sets))
    return Solution(asg, welfare(inst, asg, kind), {"order": order})


def fa_greedy(inst: Instance, seed: int = 0, order=None) -> Solution:
    return greedy(inst, ValuationKind.FA, seed, order)


def opt_bruteforce(inst: Instance, kind, budget: OracleBudget | None = None, chunk: int = 1 << 18) -> Solution:
    """Exact optimum over every driver -> {rider, unused} map.

    Labels are read as base-(m+1) digits with driver 0 most significant and
    ``m`` meaning unused; the first maximal label vector in that order wins.
    """
    check(inst)
    kind = ValuationKind(kind)
    budget = budget or OracleBudget()
    m, n = inst.m, inst.n
    required = (m + 1) ** n
    if required > budget.max_states:
        raise BudgetExceeded(required, budget.max_states)
    tables = [subset_values(inst.weights[i], inst.probs[i], kind) for i in range(m)]
    place = (m + 1) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    bit = (1 << np.arange(n, dtype=np.int64))
    best_val = -np.inf
    best_code = 0
    for start in range(0, required, chunk):
        codes = np.arange(start, min(start + chunk, required), dtype=np.int64)
        digits = (codes[:, None] // place) % (m + 1)
        total = np.zeros(len(codes))
        for i in range(m):
            total += tables[i][((digits == i) * bit).sum(axis=1)]
        k = int(np.argmax(total))
        if total[k] > best_val:
            best_val, best_code = float(total[k]), int(codes[k])
    labels = [(best_code // int(place[j])) % (m + 1) for j in range(n)]
    asg = Assignment.from_labels(labels, m)
    return Solution(asg, welfare(inst, asg, kind), {"states": required})
