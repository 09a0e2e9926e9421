import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stamlab import density1d as dens
from stamlab.setfn import check_supermodular


def test_normalization_is_validated():
    with pytest.raises(ValueError):
        dens.GridDensity(0.0, 0.1, np.ones(5))
    f = dens.GridDensity.normalized(0.0, 0.1, np.ones(11))
    np.testing.assert_allclose(np.trapezoid(f.pdf, dx=f.dx), 1.0)


@pytest.mark.parametrize("var", [0.25, 1.0, 4.0])
def test_gaussian_entropy_and_fisher(var):
    g = dens.gaussian(var)
    np.testing.assert_allclose(dens.entropy(g), 0.5 * np.log(dens.TWO_PI_E * var), atol=1e-9)
    np.testing.assert_allclose(dens.entropy_power(g), dens.TWO_PI_E * var, rtol=1e-8)
    np.testing.assert_allclose(dens.fisher_information(g), 1 / var, rtol=1e-5)
    np.testing.assert_allclose(dens.fisher_information_score(g), 1 / var, rtol=1e-5)
    np.testing.assert_allclose(dens.ni_product(g), dens.TWO_PI_E, rtol=1e-5)


def test_closed_form_entropies():
    np.testing.assert_allclose(dens.entropy(dens.uniform(0.0, 1.0)), 0.0, atol=1e-12)
    np.testing.assert_allclose(dens.entropy(dens.uniform(0.0, 3.0)), np.log(3.0), atol=1e-12)
    np.testing.assert_allclose(dens.entropy(dens.triangle(0.0, 2.0)), 0.5, atol=1e-5)
    np.testing.assert_allclose(dens.entropy(dens.laplace(1.0)), 1 + np.log(2.0), atol=1e-6)


def test_laplace_isoperimetric_product():
    np.testing.assert_allclose(dens.ni_product(dens.laplace(1.0)), 4 * np.e ** 2, rtol=5e-3)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5.0))
def test_rescaling_shifts_entropy(b):
    f = dens.triangle(0.0, 2.0, dx=2e-3)
    np.testing.assert_allclose(dens.entropy(f.rescaled(b)), dens.entropy(f) + np.log(b), atol=1e-12)
    np.testing.assert_allclose(f.rescaled(b).variance(), b * b * f.variance(), rtol=1e-12)


def test_convolving_gaussians_adds_variances():
    h = dens.convolve(dens.gaussian(1.0), dens.gaussian(0.5))
    np.testing.assert_allclose(h.variance(), 1.5, rtol=1e-9)
    np.testing.assert_allclose(dens.entropy_power(h), dens.TWO_PI_E * 1.5, rtol=1e-8)


def test_convolution_needs_equal_steps():
    with pytest.raises(ValueError, match="grid steps"):
        dens.convolve(dens.gaussian(dx=1e-3), dens.gaussian(dx=2e-3))


def test_uniform_self_sum_is_triangle():
    u = dens.uniform(0.0, 1.0)
    h = dens.entropy(dens.convolve(u, u))
    np.testing.assert_allclose(h, 0.5, atol=1e-5)


FAMILIES = [
    lambda: dens.uniform(0.0, 1.0),
    lambda: dens.triangle(0.0, 2.0),
    lambda: dens.gaussian(0.3),
    lambda: dens.laplace(0.5, width=30.0),
]


@pytest.mark.parametrize("i", range(4))
@pytest.mark.parametrize("j", range(4))
def test_epi_on_grid(i, j):
    f, g = FAMILIES[i](), FAMILIES[j]()
    lhs = dens.entropy_power(dens.convolve(f, g))
    assert lhs >= dens.entropy_power(f) + dens.entropy_power(g) - 1e-6


def test_gaussian_set_function_is_modular():
    nu = dens.nu_from_densities([dens.gaussian(v) for v in (0.5, 1.0, 2.0)])
    expected = dens.TWO_PI_E * np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5])
    np.testing.assert_allclose(nu.values, expected, rtol=1e-8)
    assert check_supermodular(nu, tol=1e-6, rel=True).holds


def test_q_sup_gap_vanishes_for_gaussians():
    g1, g2, g3 = dens.gaussian(0.5), dens.gaussian(1.0), dens.gaussian(0.01)
    np.testing.assert_allclose(dens.q_sup_gap(g1, g2, g3), 0.0, atol=1e-6)


def test_smoothed_laplace_closed_form():
    f = dens.smoothed_laplace()
    np.testing.assert_allclose(np.trapezoid(dens.smoothed_laplace_pdf(f.x), dx=f.dx), 1.0, rtol=1e-9)
    np.testing.assert_allclose(f.variance(), 2.0 + 0.04, rtol=1e-6)
    x = np.array([-3.0, -1.0, 0.5, 2.0])
    np.testing.assert_allclose(dens.smoothed_laplace_pdf(x, var=1e-10), 0.5 * np.exp(-np.abs(x)), rtol=1e-4)


def test_bc_weights_validation():
    with pytest.raises(ValueError, match="sum to one"):
        dens.BCWeights((0.5, 0.4))
    with pytest.raises(ValueError, match="non-increasing"):
        dens.BCWeights((0.25, 0.75))
    np.testing.assert_allclose(dens.BCWeights.uniform(4).partial_sums, [0.25, 0.5, 0.75, 1.0])


def test_bc_reference_values():
    np.testing.assert_allclose(dens.bc_entropy_formula(dens.BCWeights((1.0,))), 0.5, atol=1e-15)
    np.testing.assert_allclose(dens.bc_entropy_formula(dens.BCWeights((0.5, 0.5))), 0.5 + 0.5 * np.log(2), atol=1e-15)


def weight_vectors(max_len=5):
    return st.lists(st.floats(0.05, 1.0), min_size=1, max_size=max_len).map(
        lambda xs: tuple(sorted((x / sum(xs) for x in xs), reverse=True)))


@settings(max_examples=40, deadline=None)
@given(weight_vectors())
def test_bc_formula_matches_exact_oracle(a):
    a = a[:-1] + (1.0 - sum(a[:-1]),)
    if any(x < y for x, y in zip(a, a[1:])):
        return
    w = dens.BCWeights(a)
    np.testing.assert_allclose(dens.bc_entropy_formula(w), dens.bc_selfconv_entropy_exact(w), atol=1e-9)


def test_bc_formula_matches_grid():
    w = dens.BCWeights((0.5, 0.3, 0.2))
    m = w.mixture().on_grid(5e-4)
    np.testing.assert_allclose(dens.entropy(dens.convolve(m, m)), dens.bc_entropy_formula(w), atol=2e-3)


def test_interval_mixture_entropy():
    m = dens.BCWeights((0.5, 0.5)).mixture()
    # two disjoint intervals of width 1/2, density one on each
    np.testing.assert_allclose(m.entropy(), 0.0, atol=1e-15)


def test_de_bruijn_slopes():
    rep = dens.de_bruijn_check(dens.gaussian(1.0), (1e-3, 1e-2))
    assert rep.holds
    np.testing.assert_allclose(rep.rows[0].slope_N, dens.TWO_PI_E, rtol=1e-3)
    with pytest.raises(ValueError, match="refine"):
        dens.de_bruijn_check(dens.gaussian(1.0), (1e-7,))


def test_fisher_decreases_under_convolution():
    f = dens.smoothed_laplace()
    h = dens.convolve(f, dens.gaussian(0.5))
    assert dens.fisher_information(h) < dens.fisher_information(f)
    assert 1 / dens.fisher_information(h) >= 1 / dens.fisher_information(f) + 1 / 2.0 - 1e-4
