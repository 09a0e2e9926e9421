"""Constructions inside the Stam region.

Scaling and stacking act on points of the region directly; the dimension-2
ray construction builds explicit 1-D witnesses; the dimension-3 report shows
where fractional superadditivity stops describing the closure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import density1d as dens
from . import fracpart, gauss
from .setfn import SetFunction


PROVENANCES = ("gaussian", "density", "synthetic")


@dataclass(frozen=True)
class StamPoint:
    """A set function together with the dimension of the random vectors behind it."""

    values: SetFunction
    dim: int
    provenance: str = "synthetic"
    note: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


def point_from_ensemble(ens: gauss.GaussianEnsemble, include_constant: bool = True) -> StamPoint:
    return StamPoint(gauss.nu_G(ens, include_constant), ens.d, "gaussian")


def scale_point(u: StamPoint, lam: float) -> StamPoint:
    """Multiply every coordinate by ``lam``; witnessed by rescaling each vector by sqrt(lam)."""
    if not lam > 0:
        raise ValueError("scale must be positive")
    note = f"witness vectors scaled by sqrt({lam!r})"
    return replace(u, values=u.values.scaled(lam), note=(u.note + "; " if u.note else "") + note)


def stack_points(a: StamPoint, b: StamPoint, m: int, l: int) -> StamPoint:
    """Coordinatewise ``a^lam b^(1-lam)`` with ``lam = m d / (m d + l d')``.

    This is the point of ``m`` stacked copies of the first family and ``l``
    of the second, a random vector in dimension ``m d + l d'``.
    """
    if m < 1 or l < 1:
        raise ValueError("m and l must be positive integers")
    if a.values.n != b.values.n:
        raise ValueError("points live on different index sets")
    if np.any(a.values.values <= 0) or np.any(b.values.values <= 0):
        raise ValueError("geometric mean is degenerate at a zero coordinate")
    dim = m * a.dim + l * b.dim
    lam = m * a.dim / dim
    vals = np.exp(lam * np.log(a.values.values) + (1 - lam) * np.log(b.values.values))
    prov = a.provenance if a.provenance == b.provenance else "synthetic"
    return StamPoint(SetFunction(a.values.n, vals), dim, prov, f"stack m={m}, l={l}, lambda={lam!r}")


def block_diagonal_ensemble(a: gauss.GaussianEnsemble, b: gauss.GaussianEnsemble, m: int, l: int) -> gauss.GaussianEnsemble:
    """Gaussian witness of ``stack_points``: block-diagonal copies of both ensembles."""
    from scipy.linalg import block_diag

    if a.n != b.n:
        raise ValueError("ensembles must have the same n")
    mats = [block_diag(*([ma] * m + [mb] * l)) for ma, mb in zip(a.matrices, b.matrices)]
    return gauss.GaussianEnsemble(tuple(mats))


def rational_stacking_weights(d: int, d2: int, p: int, q: int) -> tuple[int, int, Fraction]:
    """Copy counts ``m = p d2``, ``l = q d`` giving ``lam = p / (p + q)`` exactly."""
    if p < 0 or q < 0 or p + q == 0:
        raise ValueError("p, q must be nonnegative and not both zero")
    m, l = p * d2, q * d
    lam = Fraction(m * d, m * d + l * d2)
    return m, l, lam


def stacking_weights_for(target: float, d: int, d2: int, tol: float = 1e-3) -> tuple[int, int, Fraction]:
    """Copy counts whose stacking exponent is within ``tol`` of ``target``."""
    if not 0 <= target <= 1:
        raise ValueError("target must lie in [0, 1]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    max_den = 1
    while True:
        frac = Fraction(target).limit_denominator(max_den)
        if abs(float(frac) - target) < tol:
            break
        max_den *= 2
    p, q = frac.numerator, frac.denominator - frac.numerator
    return rational_stacking_weights(d, d2, p, q)


@dataclass
class RayConstruction:
    x: dens.GridDensity
    y: dens.GridDensity
    achieved: StamPoint
    n_weights: int
    smoothing_var: float
    details: dict = field(default_factory=dict)


def _bc_count_for(ratio: float, margin: float, cap: int) -> int:
    need = 0.5 * np.log(ratio) + margin
    for n in range(1, cap + 1):
        if dens.bc_entropy_formula(dens.BCWeights.uniform(n)) >= need:
            return n
    raise ValueError(f"target ratio {ratio:.4g} is out of reach with at most {cap} interval weights")


def _smooth(x: dens.GridDensity, var: float) -> dens.GridDensity:
    if var <= 0:
        return x
    kernel = dens.gaussian(var, dx=x.dx, cell_average=True)
    return dens.convolve(x, kernel).trimmed()


def dim2_ray_construct(u1: float, u2: float, c: float, dx: float = dens.DEFAULT_DX,
                       margin: float = 1.0, max_weights: int = 12, htol: float = 1e-6) -> RayConstruction:
    """Independent X, Y with N(X) = u1, N(Y) = u2 and N(X + Y) >= c.

    X is a rescaled interval density whose self-convolution has large
    entropy; Y is an independent copy smoothed by a Gaussian whose variance is
    found by bisection so that N(Y) = u2. When ``c <= u1 + u2`` a Gaussian
    pair already works.
    """
    if not (u1 > 0 and u2 > 0 and c > 0):
        raise ValueError("u1, u2, c must be positive")
    swapped = u1 > u2
    lo_u, hi_u = (u2, u1) if swapped else (u1, u2)

    if c <= lo_u + hi_u:
        x = dens.gaussian(lo_u / dens.TWO_PI_E, dx=dx)
        y = dens.gaussian(hi_u / dens.TWO_PI_E, dx=dx)
        n_weights, var = 0, 0.0
    else:
        n_weights = _bc_count_for(c / lo_u, margin, max_weights)
        base = dens.BCWeights.uniform(n_weights).mixture().on_grid(dx)
        # calibrate on the grid itself so N(X) is exact for the discretized density
        b = np.sqrt(lo_u) * np.exp(-dens.entropy(base))
        x = base.rescaled(b)
        target = 0.5 * np.log(hi_u)

        def h_of(v):
            return dens.entropy(_smooth(x, v))

        if dens.entropy(x) >= target - htol:
            var = 0.0
        else:
            lo, hi = 0.0, x.dx ** 2
            while h_of(hi) < target:
                lo, hi = hi, 2 * hi
            var = 0.5 * (lo + hi)
            for _ in range(200):
                var = 0.5 * (lo + hi)
                hv = h_of(var)
                if abs(hv - target) < htol:
                    break
                if hv < target:
                    lo = var
                else:
                    hi = var
        y = _smooth(x, var)
        if not np.isclose(x.dx, y.dx, rtol=1e-12):
            raise ValueError("grid mismatch after smoothing")

    nx, ny = dens.entropy_power(x), dens.entropy_power(y)
    nxy = dens.entropy_power(dens.convolve(x, y))
    if n_weights and nxy < c:
        raise ValueError(f"grid too coarse: reached N(X+Y) = {nxy:.4g} < {c}")
    if swapped:
        x, y, nx, ny = y, x, ny, nx
    point = StamPoint(SetFunction(2, [nx, ny, nxy]), 1, "density",
                      f"dim-2 ray witness, {n_weights} interval weights")
    return RayConstruction(x, y, point, n_weights, var, {"dx": x.dx, "swapped": swapped})


@dataclass
class Dim3GapReport:
    a: float
    b: float
    c: float
    fsa_lower: float
    stam_value: float
    witness: gauss.GaussianEnsemble
    witness_residuals: dict
    fsa_checks: dict
    perturbed: dict | None = None

    def as_dict(self) -> dict:
        return {
            "singletons": [self.a, self.b, self.c],
            "fsa_ray": [self.fsa_lower, "inf"],
            "stam_singleton": self.stam_value,
            "witness": self.witness.to_dict(),
            "witness_residuals": self.witness_residuals,
            "fsa_checks": self.fsa_checks,
            "perturbed": self.perturbed,
        }


def _pairwise_additive(a: float, b: float, c: float, top: float) -> SetFunction:
    return SetFunction(3, [a, b, a + b, c, a + c, b + c, top])


def dim3_gap_report(a: float, b: float, c: float, perturb: float = 0.25) -> Dim3GapReport:
    """Compare the FSA ray for u123 with the single value a + b + c allowed in the closure.

    With singletons (a, b, c) and additive pairs, fractional superadditivity
    admits every u123 >= a + b + c, while EPI equality forces proportional
    Gaussian covariances and hence u123 = a + b + c.
    """
    if not (a > 0 and b > 0 and c > 0):
        raise ValueError("a, b, c must be positive")
    total = a + b + c
    witness = gauss.proportional_ensemble([a, b, c])
    nu = gauss.nu_G(witness)
    expected = _pairwise_additive(a, b, c, total)
    labels = ["1", "2", "1,2", "3", "1,3", "2,3", "1,2,3"]
    residuals = {lab: float(nu.values[k] - expected.values[k]) for k, lab in enumerate(labels)}

    checks = {}
    for lab, top in (("at_sum", total), ("above_sum", 2 * total), ("below_sum", total * (1 - 1e-3))):
        rep = fracpart.check_fsa(_pairwise_additive(a, b, c, top), tol=1e-12 * total)
        checks[lab] = {"u123": top, "fsa_holds": rep.holds, "margin": rep.margin}

    perturbed = None
    if perturb:
        # same singletons, non-proportional shapes: leaves the defining set
        d1 = np.diag([np.exp(perturb), np.exp(-perturb)])
        mats = [a * d1, b * np.linalg.inv(d1), c * np.eye(2)]
        diag = gauss.epi_equality_diagnostic(gauss.GaussianEnsemble(tuple(mats)), tol=1e-12)
        perturbed = diag.as_dict()

    return Dim3GapReport(a, b, c, total, total, witness, residuals, checks, perturbed)


def weighted_cesaro(b: Sequence[float], c: Sequence[float], alpha: float = 1.0 + 1e-9) -> np.ndarray:
    """Running weighted means ``S_n = sum c_k b_k / sum c_k``.

    Weights must grow geometrically, ``c_k >= alpha c_{k-1}`` with
    ``alpha > 1``. Computed as ``S_n = S_{n-1} + (b_n - S_{n-1}) / (1 + r_n)``
    with ``r_n = (sum_{k<n} c_k) / c_n`` so huge weights never overflow a sum.
    """
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if b.shape != c.shape or b.ndim != 1 or len(b) == 0:
        raise ValueError("b and c must be 1-D sequences of equal nonzero length")
    if np.any(~(c > 0)):
        raise ValueError("weights must be strictly positive")
    if alpha < 1 + 1e-9:
        raise ValueError("alpha must exceed one")
    ratios = c[:-1] / c[1:]
    if np.any(ratios > 1 / alpha):
        k = int(np.argmax(ratios > 1 / alpha)) + 2
        raise ValueError(f"weights are not geometrically growing at k={k}")
    out = np.empty_like(b)
    s, r = b[0], 0.0
    out[0] = s
    for k in range(1, len(b)):
        r = (r + 1.0) * ratios[k - 1]
        s = s + (b[k] - s) / (1.0 + r)
        out[k] = s
    return out


@dataclass
class NIProbe:
    steps: list
    grid: list

    @property
    def products(self) -> list[float]:
        return [row["ni"] for row in self.steps]


def ni_monotonicity_probe(f: dens.GridDensity, k: int = 4) -> NIProbe:
    """N, I and N*I along normalized self-convolutions ``(X + X') / sqrt(2)``."""
    if not 0 <= k <= 6:
        raise ValueError("k must be in [0, 6]")
    steps, grids = [], []
    cur = f
    for step in range(k + 1):
        if step:
            cur = dens.convolve(cur, cur).rescaled(1 / np.sqrt(2)).trimmed()
        n, i = dens.entropy_power(cur), dens.fisher_information(cur)
        steps.append({"step": step, "N": n, "I": i, "ni": n * i})
        grids.append(cur.meta())
    return NIProbe(steps, grids)
