"""Reproduction recipes: one function per acceptance criterion.

Every recipe returns a :class:`CriterionResult` holding the numbers it
computed, the verdict and its runtime. ``quick=True`` doubles the grid step of
the density computations and doubles every numerical tolerance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import density1d as dens
from . import explorer, fracpart, gauss
from .setfn import (
    check_submodular_log,
    check_supermodular,
    full_mask,
    format_mask,
    restrict,
)


@dataclass
class CriterionResult:
    number: int
    key: str
    title: str
    passed: bool
    budget: float
    runtime: float = 0.0
    data: dict = field(default_factory=dict)
    violation_found: bool = False

    @property
    def within_budget(self) -> bool:
        return self.runtime < self.budget

    def as_dict(self) -> dict:
        # runtime is left out so that reports are byte-identical across runs
        return {
            "criterion": self.number,
            "key": self.key,
            "title": self.title,
            "passed": self.passed,
            "budget_s": self.budget,
            "within_budget": self.within_budget,
            "data": self.data,
        }

    def line(self) -> str:
        verdict = "PASS" if self.passed and self.within_budget else "FAIL"
        extra = "" if self.within_budget else f" (over budget {self.budget:g}s)"
        return f"[{verdict}] criterion {self.number:2d} {self.title}: {self.runtime:.2f}s{extra}"


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream]))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# 1 ---------------------------------------------------------------------------

def counterexample_closed_form(eps: float) -> dict:
    nu_ac = float(np.sqrt((2 + eps) * (0.5 + eps)))
    return {"A": 1.0, "A+B": 2.5, "A+C": nu_ac, "A+B+C": 2.5 + eps, "gap": nu_ac - 1.0 - eps}


def criterion_1(eps: float = 0.1, quick: bool = False, **_) -> CriterionResult:
    tol = 1e-9 * (2 if quick else 1)
    nu, gap = gauss.supermodularity_counterexample(eps)
    expected = counterexample_closed_form(eps)
    got = {"A": nu(0b001), "A+B": nu(0b011), "A+C": nu(0b101), "A+B+C": nu(0b111), "gap": gap}
    errors = {k: abs(got[k] - expected[k]) for k in got}
    rep = check_supermodular(nu)
    cert_ok = rep.certificate == {"s": "1,2", "t": "1,3"}
    passed = max(errors.values()) <= tol and gap > 0 and not rep.holds and cert_ok
    data = {
        "eps": eps,
        "values": got,
        "closed_form": expected,
        "max_error": max(errors.values()),
        "supermodular_check": rep,
        "tol": tol,
    }
    return CriterionResult(1, "thm2", "det-root supermodularity counterexample", passed, 1.0,
                           data=data, violation_found=gap > 0)


# 2 ---------------------------------------------------------------------------

TRACE_A = np.array([[3.0, 1.0], [1.0, 1.0]])
TRACE_B = np.array([[2.0, 3.0], [3.0, 7.0]])


def criterion_2(quick: bool = False, **_) -> CriterionResult:
    tol = 1e-9 * (2 if quick else 1)
    fd_tol = 1e-6 * (2 if quick else 1)
    a = [[int(t) for t in row] for row in TRACE_A]
    b = [[int(t) for t in row] for row in TRACE_B]
    # integer arithmetic, so these are exact
    half_trace_product = Fraction(a[0][0] + a[1][1]) * (b[0][0] + b[1][1]) / 2
    trace_ab = sum(a[r][k] * b[k][r] for r in range(2) for k in range(2))
    # embed A, B next to the identity and differentiate at x = (1, 0, 0)
    ens = gauss.GaussianEnsemble((np.eye(2), TRACE_A, TRACE_B))
    x = (1.0, 0.0, 0.0)
    partial = gauss.detroot_mixed_partial(ens, x, 2, 3)
    fd = gauss.fd_mixed_partial(lambda y: gauss.detroot_value_mp(ens, y), x, 2, 3)
    passed = (
        half_trace_product == 18
        and trace_ab == 19
        and abs(partial + 0.5) <= tol
        and _rel(partial, fd) <= fd_tol
    )
    data = {
        "half_trace_product": str(half_trace_product),
        "trace_AB": trace_ab,
        "mixed_partial": partial,
        "finite_difference": fd,
        "fd_relative_error": _rel(partial, fd),
    }
    return CriterionResult(2, "trace", "trace example and negative mixed partial", passed, 1.0, data=data)


# 3 ---------------------------------------------------------------------------

def criterion_3(seed: int = 0, quick: bool = False, trials: int = 1000, partials: int = 100, **_) -> CriterionResult:
    tf = 2 if quick else 1
    rng = _rng(seed, 3)
    worst = np.inf
    for k in range(trials):
        d = (2, 3, 4)[k % 3]
        a, b, c = (gauss.random_pd(d, rng) for _ in range(3))
        rep = gauss.check_det_supermodular(a, b, c)
        scale = max(abs(rep.details["lhs"]), abs(rep.details["rhs"]), 1.0)
        worst = min(worst, rep.margin / scale)
    worst_partial, worst_fd = np.inf, 0.0
    for k in range(partials):
        d = (2, 3, 4)[k % 3]
        ens = gauss.random_ensemble(d, 3, rng)
        x = rng.uniform(0.2, 2.0, size=3)
        val = gauss.det_mixed_partial(ens, x, 1, 2)
        fd = gauss.fd_mixed_partial(lambda y: gauss.det_value_mp(ens, y), x, 1, 2)
        scale = float(np.linalg.det(ens.combination(x)))
        worst_partial = min(worst_partial, val / scale)
        worst_fd = max(worst_fd, _rel(val, fd))
    passed = worst >= -1e-9 * tf and worst_partial >= -1e-9 * tf and worst_fd <= 1e-6 * tf
    data = {
        "trials": trials,
        "worst_scaled_margin": float(worst),
        "partials": partials,
        "worst_scaled_partial": float(worst_partial),
        "worst_fd_relative_error": worst_fd,
    }
    return CriterionResult(3, "det", "determinant supermodularity on random triples", passed, 10.0, data=data)


# 4 and 10 -------------------------------------------------------------------

def gaussian_fsa_sweep(seed: int = 0, count: int = 200) -> list[dict]:
    """FSA optimum and submodular-log margins of random Gaussian ensembles."""
    rng = _rng(seed, 4)
    rows = []
    for k in range(count):
        n = (3, 4)[k % 2]
        d = (2, 3)[(k // 2) % 2]
        nu = gauss.nu_G(gauss.random_ensemble(d, n, rng))
        opt, beta = fracpart.fsa_lp_max(nu, "exact")
        sub = min(check_submodular_log(restrict(nu, c)).margin for c in combinations(range(1, n + 1), 3))
        rows.append({"n": n, "d": d, "opt": opt, "total": nu.total,
                     "rel_error": _rel(opt, nu.total), "submodular_log_margin": sub})
    return rows


def criterion_4(seed: int = 0, quick: bool = False, rows=None, **_) -> CriterionResult:
    tol = 1e-7 * (2 if quick else 1)
    rows = rows if rows is not None else gaussian_fsa_sweep(seed)
    worst = max(r["rel_error"] for r in rows)
    passed = worst <= tol
    data = {"ensembles": len(rows), "worst_relative_error": worst, "tol": tol}
    return CriterionResult(4, "thm1", "fractional superadditivity of Gaussian entropy powers", passed, 30.0, data=data)


def criterion_10(seed: int = 0, quick: bool = False, rows=None, **_) -> CriterionResult:
    tol = 1e-7 * (2 if quick else 1)
    rows = rows if rows is not None else gaussian_fsa_sweep(seed)
    worst = min(r["submodular_log_margin"] for r in rows)
    passed = worst >= -tol
    data = {"ensembles": len(rows), "worst_margin": worst, "tol": tol}
    return CriterionResult(10, "submod", "submodularity of entropy in product form", passed, 30.0, data=data)


# 5 ---------------------------------------------------------------------------

def brute_force_vertices(n: int) -> set:
    """Float vertex oracle: every independent column set with a positive solution."""
    cols = list(range(1, full_mask(n) + 1))
    found = set()
    for size in range(1, n + 1):
        for support in combinations(cols, size):
            m = fracpart.incidence_matrix(n, support).astype(float)
            if np.linalg.matrix_rank(m) < size:
                continue
            beta, *_ = np.linalg.lstsq(m, np.ones(n), rcond=None)
            if np.abs(m @ beta - 1).max() > 1e-9 or beta.min() <= 1e-12:
                continue
            found.add(tuple((s, round(float(w), 9)) for s, w in zip(support, beta)))
    return found


def _as_float_key(beta: fracpart.FractionalPartition) -> tuple:
    return tuple((m, round(float(w), 9)) for m, w in beta.weights.items())


def criterion_5(quick: bool = False, oracle_max_n: int = 4, **_) -> CriterionResult:
    counts, agree, exact = {}, {}, True
    for n in range(1, oracle_max_n + 1):
        verts = fracpart.enumerate_extreme_partitions(n)
        counts[n] = len(verts)
        exact &= all(isinstance(w, Fraction) for b in verts for w in b.weights.values())
        exact &= all(fracpart.is_fractional_partition(b, "exact") for b in verts)
        agree[n] = {_as_float_key(b) for b in verts} == brute_force_vertices(n)
    n3 = fracpart.enumerate_extreme_partitions(3)
    half = next((b for b in n3 if not fracpart.is_set_partition(b)), None)
    half_ok = half is not None and half.weights == {0b011: Fraction(1, 2), 0b101: Fraction(1, 2), 0b110: Fraction(1, 2)}
    set_partitions = sum(fracpart.is_set_partition(b) for b in n3)
    passed = counts[2] == 2 and counts[3] == 6 and set_partitions == 5 and half_ok and exact and all(agree.values())
    data = {
        "counts": counts,
        "oracle_agrees": agree,
        "exact_rationals": exact,
        "n3": [{format_mask(m): str(w) for m, w in b.weights.items()} for b in n3],
    }
    return CriterionResult(5, "extreme", "extreme fractional partitions", passed, 5.0, data=data)


# 6 ---------------------------------------------------------------------------

def criterion_6(quick: bool = False, **_) -> CriterionResult:
    tol = 1e-9 * (2 if quick else 1)
    cases = [((1.0,), 0.5), ((0.5, 0.5), 0.5 + 0.5 * np.log(2.0))]
    rows, passed = [], True
    for a, expected in cases:
        w = dens.BCWeights(a)
        formula = dens.bc_entropy_formula(w)
        oracle = dens.bc_selfconv_entropy_exact(w)
        ok = abs(formula - expected) <= tol and abs(formula - oracle) <= tol
        passed &= ok
        rows.append({"weights": list(a), "formula": formula, "oracle": oracle, "expected": expected})
    return CriterionResult(6, "bc", "entropy of self-sums of interval mixtures", bool(passed), 1.0,
                           data={"cases": rows, "tol": tol})


# 7 ---------------------------------------------------------------------------

def criterion_7(quick: bool = False, **_) -> CriterionResult:
    dx = dens.DEFAULT_DX * (2 if quick else 1)
    tol = 1e-3 * (2 if quick else 1)
    ray = explorer.dim2_ray_construct(1.0, 1.0, 10.0, dx=dx)
    nx, ny, nxy = (float(t) for t in ray.achieved.values.values)
    passed = abs(nx - 1) <= tol and abs(ny - 1) <= tol and nxy >= 10.0
    data = {"N_X": nx, "N_Y": ny, "N_XY": nxy, "n_weights": ray.n_weights,
            "smoothing_var": ray.smoothing_var, "dx": dx}
    return CriterionResult(7, "thm4", "dimension-2 ray construction", passed, 60.0, data=data)


# 8 ---------------------------------------------------------------------------

def criterion_8(quick: bool = False, **_) -> CriterionResult:
    tf = 2 if quick else 1
    dx = dens.DEFAULT_DX * tf
    g = dens.gaussian(1.0, dx=dx)
    ni_g = dens.ni_product(g)
    bruijn = dens.de_bruijn_check(g, (1e-3,), rtol=0.02 * tf)
    row = bruijn.rows[0]
    lap = dens.laplace(1.0, dx=dx)
    ni_l = dens.ni_product(lap)
    target_l = 4 * np.e ** 2
    passed = (
        _rel(ni_g, dens.TWO_PI_E) <= 0.005 * tf
        and row.err_N <= 0.02 * tf
        and _rel(ni_l, target_l) <= 0.005 * tf
    )
    data = {
        "gaussian_ni": ni_g,
        "two_pi_e": dens.TWO_PI_E,
        "slope_N": row.slope_N,
        "slope_error": row.err_N,
        "slope_h_error": row.err_h,
        "laplace_ni": ni_l,
        "laplace_target": target_l,
        "dx": dx,
    }
    return CriterionResult(8, "debruijn", "de Bruijn identity and isoperimetry", passed, 10.0, data=data)


# 9 ---------------------------------------------------------------------------

def _qsup_pair(dx: float, order: str) -> float:
    sl = dens.smoothed_laplace(dx=dx)
    g = dens.gaussian(0.01, dx=dx)
    if order == "literal":
        return dens.q_sup_gap(sl, sl, g)
    return dens.q_sup_gap(g, sl, sl)


def criterion_9(quick: bool = False, **_) -> CriterionResult:
    dx = dens.DEFAULT_DX * (2 if quick else 1)
    gap = _qsup_pair(dx, "literal")
    grid_error = abs(gap - _qsup_pair(2 * dx, "literal"))
    # the same three densities with the Gaussian as the first argument
    alt = _qsup_pair(dx, "swapped")
    alt_error = abs(alt - _qsup_pair(2 * dx, "swapped"))
    probe = explorer.ni_monotonicity_probe(dens.smoothed_laplace(dx=dx), k=1)
    ni0, ni1 = probe.products
    drop = ni0 - ni1
    probe_ok = drop > 0.01 * (ni0 - dens.TWO_PI_E)
    gap_ok = gap < 0 and abs(gap) > 10 * grid_error
    data = {
        "gap": gap,
        "grid_error": grid_error,
        "gap_negative_and_resolved": gap_ok,
        "gaussian_first_gap": alt,
        "gaussian_first_grid_error": alt_error,
        "ni_step0": ni0,
        "ni_step1": ni1,
        "ni_drop": drop,
        "dx": dx,
    }
    return CriterionResult(9, "prop-no", "smoothed-Laplace certificate", bool(gap_ok and probe_ok), 60.0,
                           data=data, violation_found=gap_ok)


# 11 --------------------------------------------------------------------------

def criterion_11(seed: int = 0, quick: bool = False, pairs: int = 100, **_) -> CriterionResult:
    tol = 1e-12 * (2 if quick else 1)
    rng = _rng(seed, 11)
    a_ens = gauss.random_ensemble(2, 3, rng)
    b_ens = gauss.random_ensemble(3, 3, rng)
    pa, pb = explorer.point_from_ensemble(a_ens), explorer.point_from_ensemble(b_ens)
    stacked = explorer.stack_points(pa, pb, 1, 2)
    witness = explorer.point_from_ensemble(explorer.block_diagonal_ensemble(a_ens, b_ens, 1, 2))
    witness_err = float(np.max(np.abs(stacked.values.values / witness.values.values - 1)))

    between = True
    for _ in range(pairs):
        d1, d2 = (int(t) for t in rng.integers(1, 4, size=2))
        u = explorer.point_from_ensemble(gauss.random_ensemble(d1, 3, rng))
        w = explorer.point_from_ensemble(gauss.random_ensemble(d2, 3, rng))
        m, l = (int(t) for t in rng.integers(1, 4, size=2))
        s = explorer.stack_points(u, w, m, l).values.values
        lo = np.minimum(u.values.values, w.values.values) * (1 - tol)
        hi = np.maximum(u.values.values, w.values.values) * (1 + tol)
        between &= bool(np.all((s >= lo) & (s <= hi)))

    lam_ok = all(
        explorer.rational_stacking_weights(d, d2, p, q)[2] == Fraction(p, p + q)
        for d in (1, 2, 3) for d2 in (1, 2, 5) for p in range(0, 4) for q in range(0, 4) if p + q
    )
    passed = witness_err <= tol and between and lam_ok
    data = {"witness_relative_error": witness_err, "pairs": pairs, "betweenness": between,
            "rational_lambda_exact": lam_ok, "stacked_dim": stacked.dim}
    return CriterionResult(11, "thm3", "stacking and geometric-mean betweenness", passed, 5.0, data=data)


# 12 --------------------------------------------------------------------------

def criterion_12(quick: bool = False, **_) -> CriterionResult:
    k = np.arange(1, 51)
    c = 2.0 ** k
    s = explorer.weighted_cesaro(1.0 / k, c)
    constants = (0.0, 1.0, 3.7, 1e-300, 12345.678)
    fixed = all(np.all(explorer.weighted_cesaro(np.full(50, v), c) == v) for v in constants)
    passed = s[-1] < 0.05 and fixed
    return CriterionResult(12, "cesaro", "weighted Cesaro means", bool(passed), 1.0,
                           data={"S_50": float(s[-1]), "constants_fixed": bool(fixed)})


# 13 --------------------------------------------------------------------------

def criterion_13(quick: bool = False, **_) -> CriterionResult:
    tol = 1e-12 * (2 if quick else 1)
    rep = explorer.dim3_gap_report(1.0, 1.0, 1.0)
    resid = max(abs(r) for r in rep.witness_residuals.values())
    checks = rep.fsa_checks
    passed = (
        rep.fsa_lower == 3.0
        and rep.stam_value == 3.0
        and resid <= tol
        and checks["at_sum"]["fsa_holds"]
        and checks["above_sum"]["fsa_holds"]
        and not checks["below_sum"]["fsa_holds"]
    )
    data = dict(rep.as_dict(), max_residual=resid)
    return CriterionResult(13, "thm5", "dimension-3 gap report", bool(passed), 1.0, data=data)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11, 12: criterion_12, 13: criterion_13,
}

# repro subcommand name -> criteria it regenerates
RECIPES = {
    "thm1": (4, 10),
    "thm2": (1,),
    "thm3": (11,),
    "thm4": (6, 7),
    "thm5": (13,),
    "det": (2, 3),
    "cesaro": (12,),
    "extreme": (5,),
    "debruijn": (8,),
    "prop-no": (9,),
    "all": tuple(range(1, 14)),
}


def run_criteria(numbers, seed: int = 0, quick: bool = False, **kwargs) -> list[CriterionResult]:
    """Run the given criteria in order; the Gaussian sweep is shared by 4 and 10."""
    out, rows = [], None
    for k in numbers:
        fn = CRITERIA[k]
        t0 = time.perf_counter()
        extra = dict(kwargs)
        if k in (4, 10):
            if rows is None:
                rows = gaussian_fsa_sweep(seed)
            extra["rows"] = rows
        res = fn(seed=seed, quick=quick, **extra)
        res.runtime = time.perf_counter() - t0
        out.append(res)
    return out
