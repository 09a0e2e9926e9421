from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stamlab import density1d as dens
from stamlab import explorer, gauss
from stamlab.fracpart import check_fsa
from stamlab.setfn import SetFunction

TPE = gauss.TWO_PI_E
seeds = st.integers(0, 2 ** 32 - 1)


def point(vals, dim=1):
    return explorer.StamPoint(SetFunction(2, vals), dim)


def test_scale_point():
    u = point([1.0, 1.0, 2.0])
    np.testing.assert_array_equal(explorer.scale_point(u, 4.0).values.values, [4.0, 4.0, 8.0])
    np.testing.assert_array_equal(explorer.scale_point(u, 1.0).values.values, u.values.values)
    twice = explorer.scale_point(explorer.scale_point(u, 2.0), 3.0)
    np.testing.assert_allclose(twice.values.values, explorer.scale_point(u, 6.0).values.values)
    with pytest.raises(ValueError):
        explorer.scale_point(u, 0.0)


def test_scaling_matches_gaussian_witness():
    ens = gauss.random_ensemble(2, 2, np.random.default_rng(0))
    u = explorer.point_from_ensemble(ens)
    np.testing.assert_allclose(explorer.scale_point(u, 3.0).values.values,
                               explorer.point_from_ensemble(ens.scaled(3.0)).values.values, rtol=1e-14)


def test_stack_reference_example():
    a = explorer.point_from_ensemble(gauss.GaussianEnsemble((np.eye(1), np.eye(1))))
    b = explorer.point_from_ensemble(gauss.GaussianEnsemble((4 * np.eye(1), 4 * np.eye(1))))
    np.testing.assert_allclose(a.values.values, [TPE, TPE, 2 * TPE])
    s = explorer.stack_points(a, b, 1, 1)
    np.testing.assert_allclose(s.values.values, [2 * TPE, 2 * TPE, 4 * TPE], rtol=1e-15)
    assert s.dim == 2
    with pytest.raises(ValueError):
        explorer.stack_points(a, b, 2, 0)


def test_stack_rejects_zero_coordinates():
    with pytest.raises(ValueError, match="degenerate"):
        explorer.stack_points(point([0.0, 1.0, 1.0]), point([1.0, 1.0, 2.0]), 1, 1)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_stack_matches_block_diagonal_witness(seed, d1, d2, m, l):
    rng = np.random.default_rng(seed)
    ea, eb = gauss.random_ensemble(d1, 3, rng), gauss.random_ensemble(d2, 3, rng)
    s = explorer.stack_points(explorer.point_from_ensemble(ea), explorer.point_from_ensemble(eb), m, l)
    w = explorer.point_from_ensemble(explorer.block_diagonal_ensemble(ea, eb, m, l))
    assert s.dim == w.dim == m * d1 + l * d2
    np.testing.assert_allclose(s.values.values, w.values.values, rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_stack_idempotent_and_between(seed, m, l):
    rng = np.random.default_rng(seed)
    a = explorer.point_from_ensemble(gauss.random_ensemble(2, 3, rng))
    b = explorer.point_from_ensemble(gauss.random_ensemble(1, 3, rng))
    same = explorer.stack_points(a, a, m, l)
    np.testing.assert_allclose(same.values.values, a.values.values, rtol=1e-13)
    s = explorer.stack_points(a, b, m, l).values.values
    lo = np.minimum(a.values.values, b.values.values)
    hi = np.maximum(a.values.values, b.values.values)
    assert np.all(s >= lo * (1 - 1e-13)) and np.all(s <= hi * (1 + 1e-13))


def test_rational_stacking_weights():
    assert explorer.rational_stacking_weights(1, 1, 1, 1) == (1, 1, Fraction(1, 2))
    assert explorer.rational_stacking_weights(2, 3, 1, 2) == (3, 4, Fraction(1, 3))
    assert explorer.rational_stacking_weights(1, 1, 2, 1)[2] == Fraction(2, 3)
    with pytest.raises(ValueError):
        explorer.rational_stacking_weights(1, 1, 0, 0)
    assert explorer.stacking_weights_for(0.7, 1, 1)[2] == Fraction(7, 10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(1, 4), st.integers(1, 4), st.sampled_from([1e-2, 1e-4, 1e-6]))
def test_stacking_weights_approximate_any_target(target, d, d2, tol):
    m, l, lam = explorer.stacking_weights_for(target, d, d2, tol)
    assert abs(float(lam) - target) < tol
    if m and l:
        assert lam == Fraction(m * d, m * d + l * d2)


def test_dim2_ray_reference():
    ray = explorer.dim2_ray_construct(1.0, 1.0, 10.0, dx=2e-3)
    nx, ny, nxy = ray.achieved.values.values
    assert abs(nx - 1) <= 1e-3 and abs(ny - 1) <= 1e-3 and nxy >= 10
    assert check_fsa(ray.achieved.values, tol=1e-12, rel=True).holds


def test_dim2_ray_unequal_targets_use_smoothing():
    ray = explorer.dim2_ray_construct(2.0, 0.5, 4.0, dx=2e-3)
    nx, ny, nxy = ray.achieved.values.values
    np.testing.assert_allclose([nx, ny], [2.0, 0.5], rtol=1e-3)
    assert nxy >= 4 and ray.smoothing_var > 0 and ray.details["swapped"]
    assert check_fsa(ray.achieved.values, tol=1e-12, rel=True).holds


def test_dim2_ray_fast_path_and_errors():
    ray = explorer.dim2_ray_construct(1.0, 1.0, 2.0)
    assert ray.n_weights == 0
    np.testing.assert_allclose(ray.achieved.values.values, [1.0, 1.0, 2.0], rtol=1e-6)
    with pytest.raises(ValueError, match="out of reach"):
        explorer.dim2_ray_construct(0.5, 3.0, 1e6)
    with pytest.raises(ValueError):
        explorer.dim2_ray_construct(-1.0, 1.0, 10.0)


@pytest.mark.parametrize("abc", [(1.0, 1.0, 1.0), (1.0, 2.0, 3.0)])
def test_dim3_gap_report(abc):
    rep = explorer.dim3_gap_report(*abc)
    total = sum(abc)
    assert rep.fsa_lower == rep.stam_value == total
    assert max(abs(r) for r in rep.witness_residuals.values()) <= 1e-12 * total
    assert rep.fsa_checks["at_sum"]["fsa_holds"] and rep.fsa_checks["above_sum"]["fsa_holds"]
    assert not rep.fsa_checks["below_sum"]["fsa_holds"]
    assert rep.perturbed["pair_residuals"]["1,2"] > 0
    assert not rep.perturbed["equality_holds"]


def test_weighted_cesaro():
    k = np.arange(1, 51)
    c = 2.0 ** k
    np.testing.assert_array_equal(explorer.weighted_cesaro(np.ones(50), c), np.ones(50))
    s = explorer.weighted_cesaro(1.0 / k, c)
    assert s[-1] < 0.05
    assert np.all(np.diff(s[9:]) < 0)
    direct = np.cumsum(c * (1.0 / k)) / np.cumsum(c)
    np.testing.assert_allclose(s, direct, rtol=1e-13)
    alt = explorer.weighted_cesaro(0.3 + (-1.0) ** k / k, 3.0 ** k)
    assert abs(alt[-1] - 0.3) < 0.05


def test_weighted_cesaro_rejects_slow_growth():
    with pytest.raises(ValueError, match="geometrically"):
        explorer.weighted_cesaro([1.0, 1.0, 1.0], [1.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        explorer.weighted_cesaro([1.0], [0.0])


def test_ni_probe():
    probe = explorer.ni_monotonicity_probe(dens.smoothed_laplace(dx=2e-3), 3)
    ni = probe.products
    assert ni[1] < ni[0] - 0.01 * (ni[0] - TPE)
    assert all(x >= TPE * (1 - 5e-3) for x in ni)
    flat = explorer.ni_monotonicity_probe(dens.gaussian(1.0), 2).products
    np.testing.assert_allclose(flat, TPE, rtol=5e-3)
    with pytest.raises(ValueError):
        explorer.ni_monotonicity_probe(dens.gaussian(1.0), 7)
