"""Single-rider FA: bucketed PTAS and brute-force optimizer.

For every guess ``k`` of where the optimal break-even weight falls between
consecutive sorted weights, the PTAS keeps all drivers at least as heavy as
``w_k``, discards those lighter than ``w_{k+1} / 3``, splits the remaining
band into geometric buckets of ratio ``1 + delta`` and tries every per-bucket
count, taking the highest-probability drivers inside each bucket.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .valuation import DriverView, ValuationKind, _fa, best_subset

__all__ = [
    "PtasConfig",
    "EnumerationTooLarge",
    "ptas_select",
    "ptas_candidate_count",
    "brute_single",
    "prune",
]


class EnumerationTooLarge(ValueError):
    """The count-vector enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class PtasConfig:
    delta: float = 0.1
    max_bucket_count: int = 10**8

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.max_bucket_count < 1:
            raise ValueError("max_bucket_count must be positive")

    @property
    def n_buckets(self) -> int:
        return max(1, math.ceil(math.log(3.0) / math.log1p(self.delta)))


def _bucket_of(w: float, lo: float, ratio: float, L: int) -> int:
    if lo <= 0.0:
        return 0
    # half-open [lo r^l, lo r^(l+1)); last bucket closed on the right
    b = int(math.floor(math.log(w / lo) / math.log(ratio)))
    return min(max(b, 0), L - 1)


def _bands(ws, ps, cfg: PtasConfig):
    """Yield (high set, buckets) per guess ``k``; buckets are sorted by (p desc, index)."""
    n = len(ws)
    order = sorted(range(n), key=lambda j: (-ws[j], j))
    L = cfg.n_buckets
    ratio = 1.0 + cfg.delta
    for k in range(n - 1):
        wk, wk1 = ws[order[k]], ws[order[k + 1]]
        high = [j for j in range(n) if ws[j] >= wk]
        hs = set(high)
        lo = wk1 / 3.0
        buckets = [[] for _ in range(L)]
        for j in range(n):
            if j not in hs and lo <= ws[j] <= wk1:
                buckets[_bucket_of(ws[j], lo, ratio, L)].append(j)
        buckets = [sorted(b, key=lambda j: (-ps[j], j)) for b in buckets if b]
        yield high, buckets


def _count(buckets) -> int:
    return math.prod(len(b) + 1 for b in buckets)


def ptas_candidate_count(view: DriverView, cfg: PtasConfig) -> int:
    """Number of count vectors the PTAS enumerates (summed over guesses)."""
    ws, ps = view.weights.tolist(), view.probs.tolist()
    return sum(_count(b) for _, b in _bands(ws, ps, cfg))


def ptas_select(view: DriverView, cfg: PtasConfig | None = None) -> tuple[tuple[int, ...], float]:
    """Return a set within a ``1 - delta`` factor of the best FA value, and its value."""
    cfg = cfg or PtasConfig()
    n = len(view)
    if n == 0:
        return (), 0.0
    ws, ps = view.weights.tolist(), view.probs.tolist()
    cache: dict[int, float] = {}

    def evaluate(members) -> float:
        mask = 0
        for j in members:
            mask |= 1 << j
        val = cache.get(mask)
        if val is None:
            mem = sorted(members)
            val = _fa([ws[j] for j in mem], [ps[j] for j in mem])
            cache[mask] = val
        return val

    best_val = -math.inf
    best_mask = 0

    def offer(members):
        nonlocal best_val, best_mask
        val = evaluate(members)
        mask = sum(1 << j for j in set(members))
        if val > best_val or (val == best_val and mask < best_mask):
            best_val, best_mask = val, mask

    # boundary candidates: whole pool and every singleton
    offer(range(n))
    for j in range(n):
        offer([j])
    for high, buckets in _bands(ws, ps, cfg):
        total = _count(buckets)
        if total > cfg.max_bucket_count:
            raise EnumerationTooLarge(
                f"{total} count vectors exceed the cap {cfg.max_bucket_count}; use a larger delta"
            )
        for counts in itertools.product(*(range(len(b) + 1) for b in buckets)):
            chosen = list(high)
            for b, c in zip(buckets, counts):
                chosen.extend(b[:c])
            offer(chosen)
    members = [j for j in range(n) if best_mask >> j & 1]
    return tuple(view.drivers[j] for j in members), best_val


def brute_single(view: DriverView) -> tuple[tuple[int, ...], float]:
    """Exact FA optimum over all subsets (n <= 25); ties to the lexicographically smallest set."""
    val, subset = best_subset(view, ValuationKind.FA)
    return subset, val


def prune(view: DriverView, cfg: PtasConfig | None = None) -> tuple[tuple[int, ...], float]:
    """Best-effort subset of a proposed set: the PTAS run on the restricted view."""
    if len(view) == 0:
        return (), 0.0
    return ptas_select(view, cfg)
