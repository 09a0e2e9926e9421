"""Exact Gaussian entropy powers and determinant inequalities.

For independent Gaussians with covariances ``M_k`` the subset-sum entropy
power is ``2*pi*e * det(sum_{k in s} M_k) ** (1/d)``. The constant is left
out by default (it scales every coordinate uniformly and cannot change a cone
verdict).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .setfn import SetFunction, check_supermodular, full_mask, mask_of, PropertyReport

TWO_PI_E = 2.0 * np.pi * np.e
MAX_D = 64
SYM_RTOL = 1e-12
# the search keeps away from singular matrices, where rescaling breaks the PD check
SEARCH_MAX_COND = 1e8


def pd_matrix(entries) -> np.ndarray:
    """Validate a symmetric positive-definite matrix and return it as an array."""
    k = np.array(entries, dtype=np.float64)
    if k.ndim == 0:
        k = k.reshape(1, 1)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {k.shape}")
    if k.shape[0] > MAX_D:
        raise ValueError(f"dimension {k.shape[0]} exceeds cap {MAX_D}")
    scale = max(np.abs(k).max(), np.finfo(float).tiny)
    if np.abs(k - k.T).max() > SYM_RTOL * scale:
        raise ValueError("matrix is not symmetric")
    try:
        np.linalg.cholesky(k)
    except np.linalg.LinAlgError:
        raise ValueError("matrix is not positive definite") from None
    k = 0.5 * (k + k.T)
    k.setflags(write=False)
    return k


def logdet_pd(k: np.ndarray) -> np.ndarray:
    """log det via Cholesky; works on stacks of matrices."""
    try:
        chol = np.linalg.cholesky(k)
    except np.linalg.LinAlgError:
        raise ValueError("subset sum is numerically not positive definite") from None
    return 2.0 * np.log(np.diagonal(chol, axis1=-2, axis2=-1)).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class GaussianEnsemble:
    """Covariances ``M_1 .. M_n`` of independent centred Gaussians in R^d."""

    matrices: tuple
    d: int = field(init=False)

    def __post_init__(self):
        mats = tuple(pd_matrix(m) for m in self.matrices)
        if not mats:
            raise ValueError("ensemble needs at least one matrix")
        dims = {m.shape[0] for m in mats}
        if len(dims) != 1:
            raise ValueError(f"matrices disagree in dimension: {sorted(dims)}")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "d", dims.pop())

    @property
    def n(self) -> int:
        return len(self.matrices)

    def stack(self) -> np.ndarray:
        return np.stack(self.matrices)

    def combination(self, x) -> np.ndarray:
        """``sum_k x_k M_k``."""
        return np.tensordot(np.asarray(x, dtype=np.float64), self.stack(), axes=1)

    def scaled(self, lam: float) -> "GaussianEnsemble":
        return GaussianEnsemble(tuple(lam * m for m in self.matrices))

    def to_dict(self) -> dict:
        return {"d": self.d, "matrices": [m.tolist() for m in self.matrices]}

    def __eq__(self, other):
        if not isinstance(other, GaussianEnsemble):
            return NotImplemented
        return self.n == other.n and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))

    def __hash__(self):
        return hash(self.stack().tobytes())


def entropy_power_gaussian(k) -> float:
    """``2*pi*e * det(K) ** (1/d)``."""
    k = pd_matrix(k)
    return float(TWO_PI_E * np.exp(logdet_pd(k) / k.shape[0]))


def subset_sums(ens: GaussianEnsemble) -> np.ndarray:
    """Array of shape (2**n - 1, d, d) with ``sum_{k in s} M_k`` at ``mask - 1``."""
    n, d = ens.n, ens.d
    sums = np.zeros((full_mask(n) + 1, d, d))
    for m in range(1, full_mask(n) + 1):
        low = m & -m
        sums[m] = sums[m ^ low] + ens.matrices[low.bit_length() - 1]
    return sums[1:]


def nu_G(ens: GaussianEnsemble, include_constant: bool = False) -> SetFunction:
    """``det(sum_{k in s} M_k) ** (1/d)`` for every nonempty ``s``."""
    vals = np.exp(logdet_pd(subset_sums(ens)) / ens.d)
    if include_constant:
        vals = vals * TWO_PI_E
    return SetFunction(ens.n, vals)


def detroot_value(ens: GaussianEnsemble, x) -> float:
    """``v(x) = det(sum_k x_k M_k) ** (1/d)``."""
    return float(np.exp(logdet_pd(ens.combination(x)) / ens.d))


def detroot_value_mp(ens: GaussianEnsemble, x, dps: int = 40):
    """High-precision ``v(x)`` used by the finite-difference oracle."""
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(xi) for xi in x]
        d = ens.d
        m = mpmath.matrix(d, d)
        for xk, mk in zip(xs, ens.matrices):
            for r in range(d):
                for c in range(d):
                    m[r, c] += xk * mpmath.mpf(float(mk[r, c]))
        return mpmath.det(m) ** (mpmath.mpf(1) / d)


def det_value_mp(ens: GaussianEnsemble, x, dps: int = 40):
    with mpmath.workdps(dps):
        return detroot_value_mp(ens, x, dps) ** ens.d


def fd_step(xi: float) -> float:
    return 1e-5 * (1.0 + abs(xi))


def fd_mixed_partial(fun, x, i: int, j: int, dps: int = 40) -> float:
    """Central-difference ``d^2 fun / dx_i dx_j`` (1-based indices).

    ``fun(x)`` should return an mpmath number; the four evaluations are
    combined at ``dps`` digits so the result is limited by truncation
    error only.
    """
    x = [float(t) for t in x]
    hi, hj = fd_step(x[i - 1]), fd_step(x[j - 1])

    def at(si, sj):
        y = list(x)
        y[i - 1] += si * hi
        y[j - 1] += sj * hj
        return fun(y)

    with mpmath.workdps(dps):
        val = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * mpmath.mpf(hi) * mpmath.mpf(hj))
        return float(val)


def _traces(ens: GaussianEnsemble, x, i: int, j: int):
    if i == j:
        raise ValueError("mixed partial needs i != j")
    if not (1 <= i <= ens.n and 1 <= j <= ens.n):
        raise ValueError("indices are 1-based and must be <= n")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (ens.n,) or np.any(x < 0):
        raise ValueError("x must be a nonnegative vector of length n")
    m = ens.combination(x)
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise ValueError("sum_k x_k M_k is singular") from None
    pi = np.linalg.solve(m, ens.matrices[i - 1])
    pj = np.linalg.solve(m, ens.matrices[j - 1])
    return m, np.trace(pi), np.trace(pj), np.trace(pj @ pi)


def detroot_mixed_partial(ens: GaussianEnsemble, x, i: int, j: int) -> float:
    """Closed-form cross partial of ``det(sum x_k M_k) ** (1/d)``.

    ``(1/d) det(M)^(1/d) [ (1/d) tr(M^-1 M_i) tr(M^-1 M_j) - tr(M^-1 M_j M^-1 M_i) ]``
    """
    m, ti, tj, tji = _traces(ens, x, i, j)
    d = ens.d
    root = np.exp(logdet_pd(m) / d)
    return float(root / d * (ti * tj / d - tji))


def det_mixed_partial(ens: GaussianEnsemble, x, i: int, j: int) -> float:
    """``det(M) [ tr(M^-1 M_i) tr(M^-1 M_j) - tr(M^-1 M_j M^-1 M_i) ]``; never negative."""
    m, ti, tj, tji = _traces(ens, x, i, j)
    return float(np.exp(logdet_pd(m)) * (ti * tj - tji))


def check_det_supermodular(a, b, c, tol: float = 0.0) -> PropertyReport:
    """det(A+B+C) + det(A) >= det(A+B) + det(A+C)."""
    a, b, c = pd_matrix(a), pd_matrix(b), pd_matrix(c)
    if not a.shape == b.shape == c.shape:
        raise ValueError("matrices must share their dimension")
    lhs = np.linalg.det(a + b + c) + np.linalg.det(a)
    rhs = np.linalg.det(a + b) + np.linalg.det(a + c)
    margin = float(lhs - rhs)
    holds = margin >= -tol
    cert = None if holds else {"lhs": float(lhs), "rhs": float(rhs)}
    return PropertyReport(
        "det-supermodular", holds, margin, cert, {"lhs": float(lhs), "rhs": float(rhs), "tol": tol}
    )


def counterexample_triple(eps: float) -> GaussianEnsemble:
    """A = diag(2, 1/2), B = diag(1/2, 2), C = eps * I."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return GaussianEnsemble((np.diag([2.0, 0.5]), np.diag([0.5, 2.0]), eps * np.eye(2)))


def supermodularity_counterexample(eps: float = 0.1) -> tuple[SetFunction, float]:
    """det-root set function of the diagonal triple and its supermodularity gap.

    gap = [nu(AB) + nu(AC)] - [nu(A) + nu(ABC)]; positive means a violation.
    """
    nu = nu_G(counterexample_triple(eps))
    gap = nu(0b011) + nu(0b101) - nu(0b001) - nu(0b111)
    return nu, float(gap)


def supermodularity_gap(v: SetFunction) -> float:
    """Largest violation ``v(s) + v(t) - v(s|t) - v(s&t)``; 0 for supermodular v."""
    return -check_supermodular(v).margin


def random_pd(d: int, rng: np.random.Generator, spread: float = 2.0) -> np.ndarray:
    """Random rotation of a diagonal with log-uniform eigenvalues in [e^-spread, e^spread]."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    eig = np.exp(rng.uniform(-spread, spread, size=d))
    k = (q * eig) @ q.T
    return 0.5 * (k + k.T)


def random_ensemble(d: int, n: int, rng: np.random.Generator, spread: float = 2.0) -> GaussianEnsemble:
    return GaussianEnsemble(tuple(random_pd(d, rng, spread) for _ in range(n)))


@dataclass
class SearchResult:
    ensemble: GaussianEnsemble
    gap: float
    relative_gap: float
    start: int
    evaluations: int


def _normalized(ens: GaussianEnsemble) -> GaussianEnsemble:
    # unit scale: the det-root of the full sum equals one
    return ens.scaled(1.0 / nu_G(ens).total)


def _objective(ens: GaussianEnsemble) -> float:
    # bounded by 2, since every value is at most the full-sum value
    nu = nu_G(ens)
    return supermodularity_gap(nu) / nu.total


def _perturb(mat: np.ndarray, rng: np.random.Generator, step: float) -> np.ndarray:
    d = mat.shape[0]
    g = np.eye(d) + step * rng.standard_normal((d, d))
    out = g @ mat @ g.T
    return 0.5 * (out + out.T)


def _climb(start: GaussianEnsemble, rng: np.random.Generator, iters: int):
    best = start
    best_val = _objective(start)
    step, fails = 0.3, 0
    for _ in range(iters):
        k = int(rng.integers(best.n))
        mats = list(best.matrices)
        mats[k] = _perturb(mats[k], rng, step)
        if np.linalg.cond(mats[k]) > SEARCH_MAX_COND:
            continue
        try:
            cand = GaussianEnsemble(tuple(mats))
            val = _objective(cand)
        except ValueError:
            continue
        if val > best_val:
            best, best_val, fails = cand, val, 0
        else:
            fails += 1
            if fails >= 50:
                step = max(step * 0.5, 1e-4)
                fails = 0
    return best, best_val


def _seed_start(d: int, n: int) -> GaussianEnsemble | None:
    if d != 2 or n < 3:
        return None
    mats = list(counterexample_triple(0.1).matrices) + [0.1 * np.eye(2)] * (n - 3)
    return GaussianEnsemble(tuple(mats))


def search_supermodularity_violation(
    d: int, n: int, seed: int = 0, iters: int = 10_000, starts: int = 8, threads: int = 1
) -> SearchResult:
    """Multi-start hill climbing on the supermodularity violation of ``nu_G``.

    The objective is scale free (gap divided by the det-root of the full
    sum) and the returned ensemble is rescaled so that this value equals
    one. For d = 2 the diagonal counterexample triple is one of the starts,
    so the result can never be worse than it.
    """
    if d < 1 or n < 2:
        raise ValueError("need d >= 1 and n >= 2")
    starts = max(1, starts)
    seqs = np.random.SeedSequence(seed).spawn(starts)
    per_start = max(1, iters // starts)

    def run(k):
        rng = np.random.default_rng(seqs[k])
        init = _seed_start(d, n) if k == 0 else None
        if init is None:
            init = random_ensemble(d, n, rng)
        ens, val = _climb(init, rng, per_start)
        return k, ens, val

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(starts)))
    else:
        results = [run(k) for k in range(starts)]
    # deterministic reduction: largest objective, ties to the lowest start index
    k, ens, val = max(results, key=lambda r: (r[2], -r[0]))
    ens = _normalized(ens)
    gap = supermodularity_gap(nu_G(ens))
    return SearchResult(ens, gap, float(val), k, per_start * starts)


@dataclass
class EqualityDiagnostic:
    """How far an ensemble is from the equality case of the EPI."""

    singletons: list
    pair_residuals: dict
    total_residual: float
    proportionality: dict
    equality_holds: bool
    proportional: bool
    tol: float

    def as_dict(self) -> dict:
        return {
            "singletons": self.singletons,
            "pair_residuals": self.pair_residuals,
            "total_residual": self.total_residual,
            "proportionality": self.proportionality,
            "equality_holds": self.equality_holds,
            "proportional": self.proportional,
            "tol": self.tol,
        }


def epi_equality_diagnostic(ens: GaussianEnsemble, tol: float = 1e-9) -> EqualityDiagnostic:
    """Residuals of nu(i, j) = nu(i) + nu(j) and of covariance proportionality.

    For Gaussians the EPI is tight on a pair exactly when the two covariances
    are proportional.
    """
    if ens.n < 2:
        raise ValueError("need at least two matrices")
    nu = nu_G(ens)
    n = ens.n
    single = [nu(mask_of([i])) for i in range(1, n + 1)]
    pairs, prop = {}, {}
    shapes = [m / s for m, s in zip(ens.matrices, single)]
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            key = f"{i},{j}"
            pairs[key] = nu(mask_of([i, j])) - single[i - 1] - single[j - 1]
            prop[key] = float(np.linalg.norm(shapes[i - 1] - shapes[j - 1]))
    total = nu.total - sum(single)
    scale = max(1.0, nu.total)
    eq = all(abs(r) <= tol * scale for r in pairs.values()) and abs(total) <= tol * scale
    proportional = all(p <= tol * max(1.0, float(np.abs(shapes[0]).max())) for p in prop.values())
    return EqualityDiagnostic(single, pairs, float(total), prop, eq, proportional, tol)


def proportional_ensemble(weights: Sequence[float], base=None) -> GaussianEnsemble:
    """``M_k = c_k M_0`` with ``det(M_0) = 1`` so that nu({k}) = c_k."""
    if base is None:
        base = np.eye(1)
    base = pd_matrix(base)
    d = base.shape[0]
    base = base / np.exp(logdet_pd(base) / d)
    return GaussianEnsemble(tuple(float(c) * base for c in weights))
