"""Set functions on the nonempty subsets of ``[n]`` and their combinatorial checks.

Subsets are integer bitmasks: bit ``i - 1`` is set when index ``i`` belongs to
the subset. The empty set is never stored; it evaluates to 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from . import kernels

MAX_N = 20


def mask_of(indices: Iterable[int]) -> int:
    """Bitmask of a collection of 1-based indices."""
    mask = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"indices are 1-based, got {i}")
        mask |= 1 << (i - 1)
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def format_mask(mask: int) -> str:
    """``0b101 -> "1,3"``."""
    return ",".join(str(i) for i in indices_of(mask))


def parse_mask(text: str) -> int:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ValueError("empty subset key")
    return mask_of(int(p) for p in parts)


def full_mask(n: int) -> int:
    return (1 << n) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class SetFunction:
    """Nonnegative values on the ``2**n - 1`` nonempty subsets of ``[n]``.

    ``values[mask - 1]`` holds v(s) for the subset with bitmask ``mask``.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"n must be in [1, {MAX_N}], got {self.n}")
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if vals.shape[0] != full_mask(self.n):
            raise ValueError(
                f"expected {full_mask(self.n)} values for n={self.n}, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("set function values must be finite")
        if np.any(vals < 0):
            raise ValueError("set function values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, n: int, fn) -> "SetFunction":
        """Build from ``fn(mask) -> value``."""
        return cls(n, [fn(m) for m in range(1, full_mask(n) + 1)])

    @classmethod
    def from_mapping(cls, n: int, mapping: dict) -> "SetFunction":
        """Build from a mapping keyed by masks, index tuples or ``"1,3"`` strings."""
        vals = np.full(full_mask(n), np.nan)
        for key, value in mapping.items():
            if isinstance(key, str):
                m = parse_mask(key)
            elif isinstance(key, int):
                m = key
            else:
                m = mask_of(key)
            if not 1 <= m <= full_mask(n):
                raise ValueError(f"subset {key!r} out of range for n={n}")
            vals[m - 1] = value
        missing = [format_mask(m + 1) for m in np.flatnonzero(np.isnan(vals))]
        if missing:
            raise ValueError(f"missing values for subsets: {missing}")
        return cls(n, vals)

    def __call__(self, s: int) -> float:
        return eval_at(self, s)

    def __eq__(self, other):
        if not isinstance(other, SetFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))

    @property
    def total(self) -> float:
        """v([n])."""
        return float(self.values[-1])

    def scaled(self, lam: float) -> "SetFunction":
        return SetFunction(self.n, self.values * lam)

    def as_dict(self) -> dict[str, float]:
        return {format_mask(m): float(self.values[m - 1]) for m in range(1, full_mask(self.n) + 1)}


def eval_at(v: SetFunction, s: int) -> float:
    """v(s) for a nonempty subset mask ``s``."""
    if not 1 <= s <= full_mask(v.n):
        raise ValueError(f"subset mask {s} out of range for n={v.n} (empty set excluded)")
    return float(v.values[s - 1])


@dataclass
class PropertyReport:
    """Verdict of a cone-membership check.

    ``margin`` is the smallest signed slack; ``certificate`` is present
    exactly when the property fails.
    """

    name: str
    holds: bool
    margin: float
    certificate: Any = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.holds and self.certificate is not None:
            raise ValueError("a holding property carries no certificate")
        if not self.holds and self.certificate is None:
            raise ValueError("a failing property needs a certificate")


def _tolerance(v: SetFunction, tol: float, rel: bool) -> float:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return tol * v.total if rel else tol


def check_supermodular(v: SetFunction, tol: float = 0.0, rel: bool = False) -> PropertyReport:
    """v(s|t) + v(s&t) >= v(s) + v(t) - tol for every pair of nonempty subsets."""
    atol = _tolerance(v, tol, rel)
    slack, s, t = kernels.supermodular_scan(v.values, v.n)
    holds = slack >= -atol
    cert = None if holds else {"s": format_mask(s), "t": format_mask(t)}
    return PropertyReport("supermodular", holds, float(slack), cert, {"tol": atol})


def check_supermodular_local(v: SetFunction, tol: float = 0.0, rel: bool = False) -> PropertyReport:
    """Same verdict via v(s+i+j) + v(s) >= v(s+i) + v(s+j) for i, j not in s."""
    atol = _tolerance(v, tol, rel)
    slack, s, i, j = kernels.supermodular_local_scan(v.values, v.n)
    holds = slack >= -atol
    cert = None if holds else {"s": format_mask(s), "i": i, "j": j}
    return PropertyReport("supermodular-local", holds, float(slack), cert, {"tol": atol})


def check_submodular_log(v: SetFunction, tol: float = 0.0) -> PropertyReport:
    """v(123) v(i) <= v(ij) v(ik) (1 + tol) for each pivot i, n = 3.

    This is submodularity of entropy written in entropy powers. The margin is
    ``min_i 1 - v(123) v(i) / (v(ij) v(ik))``.
    """
    if v.n != 3:
        raise ValueError("the product-form submodularity check needs n = 3")
    if np.any(v.values <= 0):
        raise ValueError("all values must be positive (log undefined at 0)")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    top = v.total
    worst, worst_pivot = np.inf, None
    for i in (1, 2, 3):
        j, k = [x for x in (1, 2, 3) if x != i]
        lhs = top * v(mask_of([i]))
        rhs = v(mask_of([i, j])) * v(mask_of([i, k]))
        slack = 1.0 - lhs / rhs
        if slack < worst:
            worst, worst_pivot = slack, i
    holds = bool(worst >= -tol)
    cert = None if holds else {"pivot": worst_pivot}
    return PropertyReport("submodular-log", holds, float(worst), cert, {"tol": tol})


def check_partition_superadditive(
    v: SetFunction, parts: Sequence[int], tol: float = 0.0, rel: bool = False
) -> PropertyReport:
    """v([n]) >= sum over parts of v(part) - tol, for an ordinary partition."""
    seen = 0
    for p in parts:
        if not 1 <= p <= full_mask(v.n):
            raise ValueError(f"part {p} is not a nonempty subset of [{v.n}]")
        if seen & p:
            raise ValueError("parts must be pairwise disjoint")
        seen |= p
    if seen != full_mask(v.n):
        raise ValueError("parts must cover [n]")
    atol = _tolerance(v, tol, rel)
    margin = v.total - sum(v(p) for p in parts)
    holds = bool(margin >= -atol)
    cert = None if holds else {"parts": [format_mask(p) for p in parts]}
    return PropertyReport("partition-superadditive", holds, float(margin), cert, {"tol": atol})


def modular(weights: Sequence[float]) -> SetFunction:
    """v(s) = sum of weights over s."""
    w = np.asarray(weights, dtype=np.float64)
    n = len(w)
    return SetFunction.from_callable(n, lambda m: float(sum(w[i - 1] for i in indices_of(m))))


def restrict(v: SetFunction, indices: Sequence[int]) -> SetFunction:
    """The set function on ``[k]`` seen through the chosen 1-based ``indices``."""
    idx = list(indices)
    if len(set(idx)) != len(idx) or not all(1 <= i <= v.n for i in idx):
        raise ValueError("indices must be distinct and within [n]")

    def lift(m):
        return mask_of(idx[i - 1] for i in indices_of(m))

    return SetFunction.from_callable(len(idx), lambda m: v(lift(m)))
