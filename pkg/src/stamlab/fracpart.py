"""Fractional partitions of ``[n]`` and fractional superadditivity.

A fractional partition assigns nonnegative weights to nonempty subsets so
that every index is covered with total weight one. The maximum of
``sum_s beta_s v(s)`` over that polytope decides fractional superadditivity;
it is attained at a vertex, and vertices have rational weights, so for small
``n`` the maximum is computed exactly by enumerating them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from numbers import Real
from typing import Mapping

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .setfn import (
    PropertyReport,
    SetFunction,
    format_mask,
    full_mask,
    indices_of,
    mask_of,
)

MAX_EXACT_N = 6
EXACT_LP_N = 5


@dataclass(frozen=True)
class FractionalPartition:
    """Weights ``beta_s`` keyed by subset mask; zero weights are dropped."""

    n: int
    weights: Mapping[int, Real]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        clean = {}
        for m, w in self.weights.items():
            if not 1 <= m <= full_mask(self.n):
                raise ValueError(f"subset mask {m} out of range for n={self.n}")
            if w < 0:
                raise ValueError(f"negative weight {w} on {format_mask(m)}")
            if w != 0:
                clean[int(m)] = w
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self.weights)

    @property
    def exact(self) -> bool:
        return all(isinstance(w, (int, Fraction)) for w in self.weights.values())

    def coverage(self) -> list:
        """Per-index total weight, index 1 first."""
        cov = [0] * self.n
        for m, w in self.weights.items():
            for i in indices_of(m):
                cov[i - 1] += w
        return cov

    def dense(self) -> np.ndarray:
        vec = np.zeros(full_mask(self.n))
        for m, w in self.weights.items():
            vec[m - 1] = float(w)
        return vec

    def value(self, v: SetFunction) -> float:
        """``sum_s beta_s v(s)``."""
        if v.n != self.n:
            raise ValueError("dimension mismatch")
        return float(sum(float(w) * v.values[m - 1] for m, w in self.weights.items()))

    def key(self) -> tuple:
        return tuple((m, Fraction(w)) for m, w in self.weights.items())

    def __hash__(self):
        return hash((self.n, self.key()))

    def __eq__(self, other):
        if not isinstance(other, FractionalPartition):
            return NotImplemented
        return self.n == other.n and self.key() == other.key()

    def __str__(self):
        body = ", ".join(f"{{{format_mask(m)}}}: {w}" for m, w in self.weights.items())
        return f"FractionalPartition(n={self.n}; {body})"


class Multihypergraph:
    """Multiset of nonempty subsets of ``[n]``, stored as multiplicities."""

    def __init__(self, n: int, edges):
        self.n = n
        counts = Counter()
        if isinstance(edges, Mapping):
            items = edges.items()
        else:
            items = ((e, 1) for e in edges)
        for e, k in items:
            m = e if isinstance(e, int) else mask_of(e)
            if not 1 <= m <= full_mask(n):
                raise ValueError(f"edge {e!r} is not a nonempty subset of [{n}]")
            if k < 0:
                raise ValueError("multiplicities must be nonnegative")
            if k:
                counts[m] += k
        if not counts:
            raise ValueError("multihypergraph must be nonempty")
        self.counts = dict(sorted(counts.items()))

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for m, k in self.counts.items():
            for i in indices_of(m):
                deg[i - 1] += k
        return deg

    @property
    def max_degree(self) -> int:
        return max(self.degrees())

    def is_regular(self) -> bool:
        return len(set(self.degrees())) == 1

    def uniform_partition(self) -> FractionalPartition:
        """Weights multiplicity/r, a fractional partition when the graph is r-regular."""
        r = self.max_degree
        return FractionalPartition(self.n, {m: Fraction(k, r) for m, k in self.counts.items()})

    def __repr__(self):
        body = ", ".join(f"{format_mask(m)}x{k}" for m, k in self.counts.items())
        return f"Multihypergraph(n={self.n}; {body})"


def uniform_hypergraph(n: int, m: int) -> Multihypergraph:
    """All subsets of size ``m``; regular of degree C(n-1, m-1)."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    return Multihypergraph(n, [mask_of(c) for c in combinations(range(1, n + 1), m)])


def leave_one_out(n: int) -> Multihypergraph:
    if n < 2:
        raise ValueError("leave-one-out needs n >= 2")
    return uniform_hypergraph(n, n - 1)


def is_fractional_partition(beta: FractionalPartition, mode: str = "exact", tol: float = 1e-9) -> bool:
    """Row sums of the incidence system equal one, exactly or within ``tol``."""
    cov = beta.coverage()
    if mode == "exact":
        if not beta.exact:
            raise ValueError("exact mode requires rational weights")
        return all(c == 1 for c in cov)
    if mode == "float":
        return all(abs(float(c) - 1.0) <= tol for c in cov)
    raise ValueError(f"unknown mode {mode!r}")


def incidence_matrix(n: int, support) -> np.ndarray:
    """0/1 matrix with rows indexed by ``i`` and columns by the subsets in ``support``."""
    return np.array([[(m >> i) & 1 for m in support] for i in range(n)], dtype=np.int64)


@lru_cache(maxsize=None)
def _extreme_points(n: int) -> tuple[FractionalPartition, ...]:
    raw = kernels.extreme_supports(n)
    uniq = {}
    for cols, weights in raw:
        beta = FractionalPartition(n, dict(zip(cols, weights)))
        uniq.setdefault(beta.key(), beta)
    # canonical order: fewer parts first, then lexicographic masks
    return tuple(sorted(uniq.values(), key=lambda b: (len(b.support), b.support)))


def enumerate_extreme_partitions(n: int) -> list[FractionalPartition]:
    """All vertices of the fractional-partition polytope with exact weights.

    A vertex is the unique strictly positive solution of ``M_G beta = 1`` for a
    support ``G`` whose incidence columns are linearly independent.
    """
    if not 1 <= n <= MAX_EXACT_N:
        raise ValueError(f"exact enumeration supports 1 <= n <= {MAX_EXACT_N}, got {n}")
    return list(_extreme_points(n))


@lru_cache(maxsize=None)
def _vertex_matrix(n: int) -> np.ndarray:
    return np.array([b.dense() for b in _extreme_points(n)])


def _lp_float(v: SetFunction) -> tuple[float, FractionalPartition]:
    n = v.n
    support = list(range(1, full_mask(n) + 1))
    a_eq = incidence_matrix(n, support).astype(float)
    res = linprog(
        -v.values,
        A_eq=a_eq,
        b_eq=np.ones(n),
        bounds=(0, None),
        method="highs-ds",
    )
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    x = np.where(res.x > 1e-12, res.x, 0.0)
    beta = FractionalPartition(n, {m: float(x[m - 1]) for m in support if x[m - 1] > 0})
    return float(-res.fun), beta


def fsa_lp_max(v: SetFunction, mode: str = "auto") -> tuple[float, FractionalPartition]:
    """Maximum of ``sum_s beta_s v(s)`` over all fractional partitions.

    ``mode`` is ``"exact"`` (vertex enumeration, n <= 5 by default, n = 6
    allowed), ``"float"`` (HiGHS simplex) or ``"auto"``.
    """
    if mode == "auto":
        mode = "exact" if v.n <= EXACT_LP_N else "float"
    if mode == "float":
        return _lp_float(v)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if v.n > MAX_EXACT_N:
        raise ValueError(f"exact mode supports n <= {MAX_EXACT_N}")
    vals = _vertex_matrix(v.n) @ v.values
    k = int(np.argmax(vals))
    return float(vals[k]), _extreme_points(v.n)[k]


def check_fsa(v: SetFunction, tol: float = 0.0, mode: str = "auto", rel: bool = False) -> PropertyReport:
    """v([n]) >= sum_s beta_s v(s) for every fractional partition beta."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    atol = tol * v.total if rel else tol
    opt, beta = fsa_lp_max(v, mode)
    margin = v.total - opt
    holds = bool(margin >= -atol)
    return PropertyReport(
        "fractionally-superadditive",
        holds,
        float(margin),
        None if holds else beta,
        {"tol": atol, "opt": opt, "argmax": beta},
    )


def check_regular_epi(v: SetFunction, graph: Multihypergraph, tol: float = 0.0) -> PropertyReport:
    """v([n]) >= (1/r) sum over edges of v(edge), r the maximum degree."""
    if graph.n != v.n:
        raise ValueError("dimension mismatch")
    deg = graph.degrees()
    uncovered = [i + 1 for i, k in enumerate(deg) if k == 0]
    if uncovered:
        raise ValueError(f"indices not covered by the hypergraph: {uncovered}")
    r = max(deg)
    bound = sum(k * v(m) for m, k in graph.counts.items()) / r
    margin = v.total - bound
    holds = bool(margin >= -tol)
    cert = None if holds else {"edges": {format_mask(m): k for m, k in graph.counts.items()}, "r": r}
    return PropertyReport("regular-epi", holds, float(margin), cert, {"tol": tol, "r": r, "bound": bound})


def extreme_point_counts(max_n: int = 5) -> dict[int, int]:
    """Number of vertices for each n up to ``max_n`` (reported, not asserted beyond n = 3)."""
    return {n: len(_extreme_points(n)) for n in range(1, max_n + 1)}


def is_set_partition(beta: FractionalPartition) -> bool:
    """True when all weights are one (an ordinary partition)."""
    return all(w == 1 for w in beta.weights.values())

