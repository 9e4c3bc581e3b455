"""Instance data model, generators and JSON serialization.

Weights are expected to be normalized to ``[0, 1]``; callers holding raw
scores should divide by the largest score first.  Random instances use
numpy's Philox4x32-10 bit generator (counter based), keyed by the integer
seed, so the same seed reproduces the same instance on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Instance",
    "Assignment",
    "Solution",
    "ThreePartitionSpec",
    "InstanceError",
    "InstanceFormatError",
    "validate",
    "check",
    "rng_from_seed",
    "gen_uniform",
    "gen_hardness",
    "read_instance",
    "write_instance",
    "read_assignment",
    "write_assignment",
]

MAX_DYADIC_EXPONENT = 52


class InstanceError(ValueError):
    """Raised when an instance or partition spec violates its invariants."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class InstanceFormatError(ValueError):
    """Raised when an instance or assignment file cannot be parsed."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """One dispatch cycle: ``m`` riders, ``n`` drivers.

    ``weights[i, j]`` is the match score of rider ``i`` with driver ``j`` and
    ``probs[i, j]`` the probability that driver ``j`` accepts rider ``i``.
    """

    m: int
    n: int
    weights: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "probs", _frozen(self.probs))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.m == other.m
            and self.n == other.n
            and self.weights.shape == other.weights.shape
            and self.probs.shape == other.probs.shape
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Weights and probabilities seen by rider ``i``."""
        return self.weights[i], self.probs[i]

    def is_homogeneous(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.probs - self.probs.flat[0]) <= tol))

    def to_dict(self) -> dict:
        return {
            "m": int(self.m),
            "n": int(self.n),
            "weights": [[float(v) for v in r] for r in self.weights],
            "probs": [[float(v) for v in r] for r in self.probs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        for key in ("m", "n", "weights", "probs"):
            if key not in d:
                raise InstanceFormatError(f"schema error: missing key {key!r}")
        try:
            w = np.array(d["weights"], dtype=float)
            p = np.array(d["probs"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(f"schema error: non-numeric matrix entry ({exc})") from None
        if w.ndim != 2 or p.ndim != 2:
            raise InstanceFormatError("schema error: 'weights' and 'probs' must be 2-d arrays")
        if not isinstance(d["m"], int) or not isinstance(d["n"], int):
            raise InstanceFormatError("schema error: 'm' and 'n' must be integers")
        return cls(d["m"], d["n"], w, p)


@dataclass(frozen=True)
class Assignment:
    """Disjoint notification sets, one tuple of driver indices per rider."""

    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "sets", tuple(tuple(sorted(int(j) for j in s)) for s in self.sets)
        )

    @classmethod
    def empty(cls, m: int) -> "Assignment":
        return cls(tuple(() for _ in range(m)))

    @classmethod
    def from_labels(cls, labels: Sequence[int], m: int) -> "Assignment":
        """Build from a driver -> rider map; labels outside ``[0, m)`` mean unused."""
        sets = [[] for _ in range(m)]
        for j, lab in enumerate(labels):
            if 0 <= lab < m:
                sets[lab].append(j)
        return cls(tuple(tuple(s) for s in sets))

    def errors(self, n: int | None = None) -> list[str]:
        errs = []
        seen: dict[int, int] = {}
        for i, s in enumerate(self.sets):
            for j in s:
                if n is not None and not 0 <= j < n:
                    errs.append(f"driver index {j} of rider {i} out of [0, {n})")
                if j in seen and seen[j] != i:
                    errs.append(f"driver {j} notified for riders {seen[j]} and {i}")
                seen[j] = i
        return errs

    def is_valid(self, n: int | None = None) -> bool:
        return not self.errors(n)

    def to_dict(self) -> dict:
        return {"sets": [list(s) for s in self.sets]}


@dataclass
class Solution:
    """What every solver returns: the notification sets, their welfare, solver details."""

    assignment: Assignment
    welfare: float
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ThreePartitionSpec:
    """A 3-Partition instance: ``3m`` integers to split into triples summing to ``B``."""

    a: tuple[int, ...]
    B: int
    m: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))

    def errors(self) -> list[str]:
        errs = []
        if self.m < 1:
            errs.append("m must be >= 1")
        if len(self.a) != 3 * self.m:
            errs.append(f"expected {3 * self.m} integers, got {len(self.a)}")
        if sum(self.a) != self.m * self.B:
            errs.append(f"sum(a) = {sum(self.a)} != m*B = {self.m * self.B}")
        for j, x in enumerate(self.a):
            if not 4 * x > self.B or not 2 * x < self.B:
                errs.append(f"a[{j}] = {x} violates B/4 < a_j < B/2")
            if x > MAX_DYADIC_EXPONENT:
                errs.append(f"a[{j}] = {x} exceeds {MAX_DYADIC_EXPONENT}; 1 - 2^-a is not exact")
        return errs

    @property
    def threshold(self) -> float:
        """Welfare reached exactly when every rider's load equals ``B``."""
        return self.m * (1.0 - 2.0 ** (-self.B))


def validate(inst: Instance) -> list[str]:
    """Return every violated instance invariant; an empty list means valid."""
    errs = []
    if inst.m < 1:
        errs.append(f"m = {inst.m} must be >= 1")
    if inst.n < 1:
        errs.append(f"n = {inst.n} must be >= 1")
    for name, arr in (("weights", inst.weights), ("probs", inst.probs)):
        if arr.shape != (inst.m, inst.n):
            errs.append(f"dimension mismatch: {name} has shape {arr.shape}, expected ({inst.m}, {inst.n})")
            continue
        bad = np.argwhere(~((arr >= 0.0) & (arr <= 1.0)))
        label = "weight" if name == "weights" else "probability"
        for i, j in bad[:20]:
            errs.append(f"{label} out of [0,1] at [{i}][{j}]: {arr[i, j]!r}")
        if len(bad) > 20:
            errs.append(f"... {len(bad) - 20} more {label} entries out of [0,1]")
    return errs


def check(inst: Instance) -> Instance:
    errs = validate(inst)
    if errs:
        raise InstanceError(errs)
    return inst


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator used everywhere randomness is needed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def gen_uniform(m: int, n: int, seed: int) -> Instance:
    """All weights then all probabilities drawn i.i.d. U[0, 1], row-major."""
    if m < 1 or n < 1:
        raise InstanceError(f"need m, n >= 1, got ({m}, {n})")
    rng = rng_from_seed(seed)
    w = rng.random((m, n))
    p = rng.random((m, n))
    return Instance(m, n, w, p)


def gen_hardness(spec: ThreePartitionSpec) -> tuple[Instance, float]:
    """Unit-weight, identical-rider instance encoding a 3-Partition question.

    Driver ``j`` accepts with probability ``1 - 2**-a_j``; the returned
    threshold ``W`` is reachable iff the integers split into triples of sum ``B``.
    """
    errs = spec.errors()
    if errs:
        raise InstanceError(errs)
    return dyadic_instance(spec.a, spec.m), spec.threshold


def dyadic_instance(a: Iterable[int], m: int) -> Instance:
    """Unit weights, ``p_j = 1 - 2**-a_j`` for ``m`` identical riders (no 3-Partition checks)."""
    a = [int(x) for x in a]
    if any(x < 1 or x > MAX_DYADIC_EXPONENT for x in a):
        raise InstanceError(f"exponents must lie in [1, {MAX_DYADIC_EXPONENT}]")
    # ldexp keeps 1 - 2^-a exact for a <= 52
    row = [1.0 - np.ldexp(1.0, -x) for x in a]
    n = len(a)
    return Instance(m, n, np.ones((m, n)), np.tile(row, (m, 1)))


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{path}: schema error: top-level value must be an object")
    return data


def read_instance(path) -> Instance:
    try:
        inst = Instance.from_dict(_load_json(path))
    except InstanceFormatError as exc:
        msg = str(exc)
        raise InstanceFormatError(msg if msg.startswith(str(path)) else f"{path}: {msg}") from None
    errs = validate(inst)
    if errs:
        raise InstanceFormatError(f"{path}: " + "; ".join(errs))
    return inst


def write_instance(inst: Instance, path) -> None:
    # json emits float repr, the shortest string that round-trips bit-exactly
    Path(path).write_text(json.dumps(inst.to_dict()) + "\n")


def read_assignment(path) -> Assignment:
    data = _load_json(path)
    if "sets" not in data:
        raise InstanceFormatError(f"{path}: schema error: missing key 'sets'")
    try:
        return Assignment(tuple(tuple(int(j) for j in s) for s in data["sets"]))
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: schema error in 'sets': {exc}") from None


def write_assignment(asg: Assignment, path) -> None:
    Path(path).write_text(json.dumps(asg.to_dict()) + "\n")
