"""One-dimensional densities: grids, exact interval mixtures, and entropy functionals.

All logarithms are natural, so entropies are in nats and the entropy power of
a real random variable is ``exp(2 h)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import log_ndtr, ndtr

from .setfn import SetFunction, full_mask

log = logging.getLogger(__name__)

TWO_PI_E = 2.0 * np.pi * np.e
NORM_TOL = 1e-6
TINY = 1e-300
FFT_FLOOR = 1e-13
DEFAULT_DX = 1e-3
DEFAULT_WIDTH = 12.0


def _trap(y: np.ndarray, dx: float) -> float:
    if len(y) == 1:
        return 0.0
    return float(dx * (y.sum() - 0.5 * (y[0] + y[-1])))


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Density sampled at ``x0 + k * dx``; the trapezoid integral is one."""

    x0: float
    dx: float
    pdf: np.ndarray

    def __post_init__(self):
        p = np.array(self.pdf, dtype=np.float64).reshape(-1)
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if len(p) < 2:
            raise ValueError("need at least two grid points")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise ValueError("pdf must be finite and nonnegative")
        mass = _trap(p, self.dx)
        if abs(mass - 1.0) > NORM_TOL:
            raise ValueError(f"density integrates to {mass!r}, not 1 within {NORM_TOL}")
        p.setflags(write=False)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "pdf", p)

    @classmethod
    def normalized(cls, x0: float, dx: float, pdf) -> "GridDensity":
        p = np.clip(np.asarray(pdf, dtype=np.float64), 0.0, None)
        mass = _trap(p, dx)
        if not mass > 0:
            raise ValueError("cannot normalize a density with zero mass")
        return cls(x0, dx, p / mass)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(len(self.pdf))

    def __len__(self):
        return len(self.pdf)

    def mean(self) -> float:
        return _trap(self.x * self.pdf, self.dx)

    def variance(self) -> float:
        mu = self.mean()
        return _trap((self.x - mu) ** 2 * self.pdf, self.dx)

    def meta(self) -> dict:
        return {"x0": self.x0, "dx": self.dx, "points": len(self.pdf)}

    def __eq__(self, other):
        if not isinstance(other, GridDensity):
            return NotImplemented
        return self.x0 == other.x0 and self.dx == other.dx and np.array_equal(self.pdf, other.pdf)

    def __hash__(self):
        return hash((self.x0, self.dx, self.pdf.tobytes()))

    def rescaled(self, b: float) -> "GridDensity":
        """Density of ``b X`` for ``b > 0``."""
        if not b > 0:
            raise ValueError("scale must be positive")
        return GridDensity(self.x0 * b, self.dx * b, self.pdf / b)

    def trimmed(self, rel: float = 1e-18) -> "GridDensity":
        """Drop leading/trailing samples below ``rel * max`` and renormalize."""
        keep = np.flatnonzero(self.pdf > rel * self.pdf.max())
        lo, hi = max(keep[0] - 1, 0), min(keep[-1] + 2, len(self.pdf))
        return GridDensity.normalized(self.x0 + lo * self.dx, self.dx, self.pdf[lo:hi])


def _aligned_grid(lo: float, hi: float, dx: float) -> np.ndarray:
    k0 = int(np.floor(lo / dx))
    k1 = int(np.ceil(hi / dx))
    return dx * np.arange(k0, k1 + 1)


def gaussian(var: float = 1.0, mean: float = 0.0, dx: float = DEFAULT_DX,
             width: float = DEFAULT_WIDTH, cell_average: bool = False) -> GridDensity:
    """N(mean, var) on a grid aligned to multiples of ``dx`` spanning ``width`` sd.

    ``cell_average`` stores the mass of each cell divided by ``dx``, which stays
    well defined (and continuous in ``var``) down to ``var -> 0``.
    """
    if not var > 0:
        raise ValueError("variance must be positive")
    sd = np.sqrt(var)
    half = max(width * sd, 2 * dx)
    x = _aligned_grid(mean - half, mean + half, dx)
    if cell_average:
        edges = (np.append(x - dx / 2, x[-1] + dx / 2) - mean) / sd
        p = np.diff(ndtr(edges)) / dx
    else:
        p = np.exp(-0.5 * ((x - mean) / sd) ** 2) / (sd * np.sqrt(2 * np.pi))
    return GridDensity.normalized(x[0], dx, p)


def uniform(a: float = 0.0, b: float = 1.0, dx: float = DEFAULT_DX) -> GridDensity:
    """Uniform on [a, b]; ``b - a`` should be a multiple of ``dx``."""
    if not b > a:
        raise ValueError("need b > a")
    k = int(round((b - a) / dx))
    return GridDensity.normalized(a, (b - a) / k, np.ones(k + 1))


def triangle(a: float = 0.0, b: float = 2.0, dx: float = DEFAULT_DX) -> GridDensity:
    """Symmetric triangular density on [a, b]."""
    k = int(round((b - a) / dx))
    h = (b - a) / k
    x = a + h * np.arange(k + 1)
    mid = 0.5 * (a + b)
    p = np.clip(1.0 - np.abs(x - mid) / (mid - a), 0.0, None)
    return GridDensity.normalized(a, h, p)


def laplace(scale: float = 1.0, dx: float = DEFAULT_DX, width: float = 40.0) -> GridDensity:
    """Laplace(0, scale); ``width`` is in units of ``scale``."""
    x = _aligned_grid(-width * scale, width * scale, dx)
    return GridDensity.normalized(x[0], dx, np.exp(-np.abs(x) / scale) / (2 * scale))


def smoothed_laplace_pdf(x, scale: float = 1.0, var: float = 0.04) -> np.ndarray:
    """Closed form of Laplace(scale) convolved with N(0, var)."""
    s = np.sqrt(var)
    b = scale
    c = var / (2 * b * b)
    left = c - x / b + log_ndtr(x / s - s / b)
    right = c + x / b + log_ndtr(-x / s - s / b)
    return 0.5 / b * (np.exp(left) + np.exp(right))


def smoothed_laplace(scale: float = 1.0, var: float = 0.04, dx: float = DEFAULT_DX,
                     width: float = 40.0) -> GridDensity:
    """Laplace * Gaussian: smooth, strictly positive and log-concave."""
    half = width * scale + 12 * np.sqrt(var)
    x = _aligned_grid(-half, half, dx)
    return GridDensity.normalized(x[0], dx, smoothed_laplace_pdf(x, scale, var))


def _plogp(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    pos = p > TINY
    out[pos] = p[pos] * np.log(p[pos])
    return out


def entropy(f: GridDensity) -> float:
    """Differential entropy ``-int f log f`` in nats (trapezoid, 0 log 0 = 0)."""
    return -_trap(_plogp(f.pdf), f.dx)


def entropy_power(f: GridDensity) -> float:
    return float(np.exp(2.0 * entropy(f)))


def convolve(f: GridDensity, g: GridDensity, max_correction: float = NORM_TOL) -> GridDensity:
    """Density of the independent sum, by FFT with zero padding.

    End samples are given trapezoid weight so that the discrete product
    integrates consistently; the residual mass defect is removed and must stay
    below ``max_correction``.
    """
    if not np.isclose(f.dx, g.dx, rtol=1e-12, atol=0.0):
        raise ValueError(f"grid steps differ: {f.dx} vs {g.dx}")
    a = f.pdf.copy()
    b = g.pdf.copy()
    a[[0, -1]] *= 0.5
    b[[0, -1]] *= 0.5
    h = np.clip(fftconvolve(a, b) * f.dx, 0.0, None)
    # tail samples below the FFT round-off level carry no information
    keep = np.flatnonzero(h >= FFT_FLOOR * h.max())
    h[:keep[0]] = 0.0
    h[keep[-1] + 1:] = 0.0
    mass = _trap(h, f.dx)
    correction = abs(mass - 1.0)
    log.debug("convolve: renormalization correction %.3e", correction)
    if correction > max_correction:
        raise ValueError(f"renormalization correction {correction:.3e} exceeds {max_correction:.1e}")
    return GridDensity(f.x0 + g.x0, f.dx, h / mass)


def _support_check(f: GridDensity) -> None:
    pos = np.flatnonzero(f.pdf > TINY)
    if len(pos) and np.any(f.pdf[pos[0]:pos[-1] + 1] <= TINY):
        raise ValueError("density vanishes inside its support; Fisher information is unstable")


def fisher_information(f: GridDensity) -> float:
    """``4 int ((sqrt f)')^2`` with second-order central differences."""
    _support_check(f)
    r = np.sqrt(f.pdf)
    dr = np.gradient(r, f.dx)
    return 4.0 * _trap(dr * dr, f.dx)


def fisher_information_score(f: GridDensity, rel_floor: float = 1e-12) -> float:
    """``int f'^2 / f`` over the region where ``f > rel_floor * max f``."""
    _support_check(f)
    df = np.gradient(f.pdf, f.dx)
    mask = f.pdf > rel_floor * f.pdf.max()
    integrand = np.zeros_like(f.pdf)
    integrand[mask] = df[mask] ** 2 / f.pdf[mask]
    return _trap(integrand, f.dx)


def ni_product(f: GridDensity) -> float:
    """N(X) I(X); at least 2 pi e, with equality for Gaussians."""
    return entropy_power(f) * fisher_information(f)


@dataclass(frozen=True)
class IntervalMixture:
    """Mixture of uniform densities on disjoint intervals ``(left, left + width)``."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple(sorted((float(l), float(w), float(p)) for l, w, p in self.intervals))
        if not ivs:
            raise ValueError("mixture needs at least one interval")
        for l, w, p in ivs:
            if not w > 0 or not p > 0:
                raise ValueError("widths and weights must be positive")
        if abs(sum(p for _, _, p in ivs) - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        for (l1, w1, _), (l2, _, _) in zip(ivs, ivs[1:]):
            if l1 + w1 > l2:
                raise ValueError("intervals overlap")
        object.__setattr__(self, "intervals", ivs)

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for l, w, p in self.intervals:
            out += np.where((x > l) & (x < l + w), p / w, 0.0)
        return out

    def entropy(self) -> float:
        return float(-sum(p * np.log(p / w) for _, w, p in self.intervals))

    def on_grid(self, dx: float = DEFAULT_DX, pad: int = 2) -> GridDensity:
        """Cell-averaged discretization (exact mass per cell)."""
        lo = self.intervals[0][0]
        hi = self.intervals[-1][0] + self.intervals[-1][1]
        x = _aligned_grid(lo - pad * dx, hi + pad * dx, dx)
        left = x - dx / 2
        right = x + dx / 2
        p = np.zeros_like(x)
        for l, w, wt in self.intervals:
            i0 = max(int(np.searchsorted(right, l)) - 1, 0)
            i1 = min(int(np.searchsorted(left, l + w)) + 1, len(x))
            ov = np.clip(np.minimum(right[i0:i1], l + w) - np.maximum(left[i0:i1], l), 0.0, None)
            p[i0:i1] += wt / w * ov / dx
        return GridDensity.normalized(x[0], dx, p)


@dataclass(frozen=True)
class BCWeights:
    """Weights ``a_1 >= a_2 >= ... >= 0`` summing to one.

    The associated density is uniform on the union of ``(2^n, 2^n + a_n)``.
    """

    a: tuple

    def __post_init__(self):
        a = tuple(float(t) for t in self.a)
        if not a:
            raise ValueError("need at least one weight")
        if any(t < 0 for t in a):
            raise ValueError("weights must be nonnegative")
        if abs(sum(a) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to one, got {sum(a)!r}")
        if any(x < y for x, y in zip(a, a[1:])):
            raise ValueError("weights must be non-increasing")
        object.__setattr__(self, "a", a)

    @classmethod
    def uniform(cls, n: int) -> "BCWeights":
        return cls((1.0 / n,) * n)

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.a)

    def mixture(self) -> IntervalMixture:
        return IntervalMixture(tuple((2.0 ** k, w, w) for k, w in enumerate(self.a, start=1) if w > 0))


def _xlog1x(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    pos = a > 0
    out[pos] = -a[pos] * np.log(a[pos])
    return out


def bc_entropy_formula(weights: BCWeights) -> float:
    """Closed-form entropy of the self-convolution of the interval density (nats)."""
    a = np.asarray(weights.a)
    s = weights.partial_sums
    n = np.arange(1, len(a) + 1)
    ln2 = np.log(2.0)
    la = _xlog1x(a)
    return float(
        -2 * ln2
        + 2 * ln2 * np.sum(s * a)
        + np.sum((n - 0.5) * a * a)
        + np.sum(a * la)
        + 2 * np.sum(s[:-1] * la[1:])
    )


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _segment_neg_plogp(p0: float, p1: float, length: float) -> float:
    # -int p log p over a segment where p is linear from p0 to p1
    if length <= 0 or (p0 <= 0 and p1 <= 0):
        return 0.0
    m, half = 0.5 * (p0 + p1), 0.5 * (p1 - p0)
    if abs(half) <= 0.1 * m:
        p = m + half * _GL_X
        return float(-0.5 * length * np.sum(_GL_W * p * np.log(p)))

    def prim(p):
        return 0.0 if p <= 0 else 0.5 * p * p * np.log(p) - 0.25 * p * p

    return float(-length * (prim(p1) - prim(p0)) / (p1 - p0))


def _trapezoid_pieces(m1: IntervalMixture, m2: IntervalMixture):
    pieces = []
    for l1, w1, p1 in m1.intervals:
        for l2, w2, p2 in m2.intervals:
            lo, hi = min(w1, w2), max(w1, w2)
            pieces.append((l1 + l2, lo, hi, p1 * p2))
    return pieces


def _pieces_density(pieces, x: float) -> float:
    total = 0.0
    for start, lo, hi, wt in pieces:
        t = x - start
        if t <= 0 or t >= lo + hi:
            continue
        if t < lo:
            val = t / (lo * hi)
        elif t <= hi:
            val = 1.0 / hi
        else:
            val = (lo + hi - t) / (lo * hi)
        total += wt * val
    return total


def mixture_sum_entropy(m1: IntervalMixture, m2: IntervalMixture) -> float:
    """Exact entropy of the sum of independent interval-mixture variables.

    The density of the sum is piecewise linear; ``-p log p`` is integrated in
    closed form on each linear piece.
    """
    pieces = _trapezoid_pieces(m1, m2)
    knots = sorted({k for start, lo, hi, _ in pieces for k in (start, start + lo, start + hi, start + lo + hi)})
    vals = [_pieces_density(pieces, k) for k in knots]
    h = 0.0
    for (x0, v0), (x1, v1) in zip(zip(knots, vals), zip(knots[1:], vals[1:])):
        h += _segment_neg_plogp(v0, v1, x1 - x0)
    return h


def bc_selfconv_entropy_exact(weights: BCWeights) -> float:
    """Entropy of X + X' for the interval density, by exact piecewise-linear integration."""
    if len(weights.a) > 12:
        raise ValueError("at most 12 weights are supported")
    m = weights.mixture()
    return mixture_sum_entropy(m, m)


@dataclass
class DeBruijnRow:
    eps: float
    slope_h: float
    slope_N: float
    half_fisher: float
    ni: float

    @property
    def err_h(self) -> float:
        return abs(self.slope_h - self.half_fisher) / self.half_fisher

    @property
    def err_N(self) -> float:
        return abs(self.slope_N - self.ni) / self.ni


@dataclass
class DeBruijnReport:
    rows: list
    entropy: float
    entropy_power: float
    fisher: float
    rtol: float
    grid: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        best = min(self.rows, key=lambda r: r.eps)
        return best.err_h <= self.rtol and best.err_N <= self.rtol

    def as_dict(self) -> dict:
        return {
            "entropy": self.entropy,
            "entropy_power": self.entropy_power,
            "fisher": self.fisher,
            "rtol": self.rtol,
            "holds": self.holds,
            "grid": self.grid,
            "rows": [
                {"eps": r.eps, "slope_h": r.slope_h, "slope_N": r.slope_N,
                 "half_fisher": r.half_fisher, "ni": r.ni, "err_h": r.err_h, "err_N": r.err_N}
                for r in self.rows
            ],
        }


def de_bruijn_check(f: GridDensity, eps_list: Sequence[float] = (1e-3,), rtol: float = 0.02) -> DeBruijnReport:
    """Finite-difference slopes of h and N under Gaussian smoothing of variance eps.

    Expected limits: ``dh/deps -> I/2`` and ``dN/deps -> N I``.
    """
    h0 = entropy(f)
    n0 = np.exp(2 * h0)
    fi = fisher_information(f)
    rows = []
    for eps in eps_list:
        if eps < 4 * f.dx ** 2:
            raise ValueError(f"eps={eps} is below 4 dx^2 = {4 * f.dx ** 2}; refine the grid")
        smoothed = convolve(f, gaussian(eps, dx=f.dx))
        h1 = entropy(smoothed)
        rows.append(DeBruijnRow(eps, (h1 - h0) / eps, (np.exp(2 * h1) - n0) / eps, 0.5 * fi, n0 * fi))
    return DeBruijnReport(rows, h0, float(n0), fi, rtol, f.meta())


def nu_from_densities(fs: Sequence[GridDensity]) -> SetFunction:
    """Entropy powers of all subset sums; each subset reuses the convolution of its prefix."""
    n = len(fs)
    if not 1 <= n <= 8:
        raise ValueError("need 1 <= n <= 8 densities")
    if len({round(f.dx, 15) for f in fs}) != 1:
        raise ValueError("densities must share dx")
    dens = {}
    for m in sorted(range(1, full_mask(n) + 1), key=lambda m: (bin(m).count("1"), m)):
        top = m.bit_length() - 1
        rest = m ^ (1 << top)
        dens[m] = fs[top] if rest == 0 else convolve(dens[rest], fs[top])
    return SetFunction(n, [entropy_power(dens[m]) for m in range(1, full_mask(n) + 1)])


def q_sup_gap(x: GridDensity, y: GridDensity, z: GridDensity) -> float:
    """N(X+Y+Z) + N(Z) - N(X+Z) - N(Y+Z); negative values answer the question in the negative."""
    xz = convolve(x, z)
    yz = convolve(y, z)
    xyz = convolve(xz, y)
    return entropy_power(xyz) + entropy_power(z) - entropy_power(xz) - entropy_power(yz)
