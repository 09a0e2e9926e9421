import numpy as np
import pytest

from stamlab import _kernels_py, kernels

compiled = pytest.importorskip("stamlab._kernels")


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_scans_match_fallback(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        vals = rng.uniform(0, 5, size=2 ** n - 1)
        assert compiled.supermodular_scan(vals, n) == _kernels_py.supermodular_scan(vals, n)
        assert compiled.supermodular_local_scan(vals, n) == _kernels_py.supermodular_local_scan(vals, n)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_extreme_supports_match_fallback(n):
    assert compiled.extreme_supports(n) == _kernels_py.extreme_supports(n)


def test_read_only_input_accepted():
    vals = np.arange(1.0, 8.0)
    vals.setflags(write=False)
    assert compiled.supermodular_scan(vals, 3) == _kernels_py.supermodular_scan(vals, 3)


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
