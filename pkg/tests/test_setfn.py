import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stamlab.setfn import (
    PropertyReport,
    SetFunction,
    check_partition_superadditive,
    check_submodular_log,
    check_supermodular,
    check_supermodular_local,
    format_mask,
    indices_of,
    mask_of,
    modular,
    parse_mask,
    restrict,
)


def setfunctions(min_n=1, max_n=5):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.lists(
            st.floats(0.0, 10.0, allow_nan=False), min_size=2 ** n - 1, max_size=2 ** n - 1
        ).map(lambda vals: SetFunction(n, vals))
    )


def test_mask_helpers_round_trip():
    assert mask_of([1, 3]) == 0b101
    assert indices_of(0b101) == (1, 3)
    assert format_mask(0b101) == "1,3"
    assert parse_mask(" 3, 1 ") == 0b101
    with pytest.raises(ValueError):
        parse_mask("")
    with pytest.raises(ValueError):
        mask_of([0])


def test_setfunction_validation():
    with pytest.raises(ValueError, match="expected 3 values"):
        SetFunction(2, [1.0, 2.0])
    with pytest.raises(ValueError, match="nonnegative"):
        SetFunction(2, [1.0, -1.0, 2.0])
    with pytest.raises(ValueError, match="finite"):
        SetFunction(2, [1.0, np.inf, 2.0])
    v = SetFunction(2, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        v.values[0] = 5.0


def test_eval_and_mapping():
    v = SetFunction.from_mapping(2, {"1": 1.0, (2,): 2.0, 0b11: 4.0})
    assert v(0b01) == 1.0 and v(0b10) == 2.0 and v.total == 4.0
    with pytest.raises(ValueError, match="empty set excluded"):
        v(0)
    with pytest.raises(ValueError, match="missing"):
        SetFunction.from_mapping(2, {"1": 1.0})


def test_report_certificate_invariant():
    with pytest.raises(ValueError):
        PropertyReport("x", True, 0.0, certificate={"s": "1"})
    with pytest.raises(ValueError):
        PropertyReport("x", False, -1.0)


def test_modular_is_supermodular_with_zero_margin():
    v = modular([1.0, 2.0, 3.0])
    rep = check_supermodular(v)
    assert rep.holds and rep.margin == 0.0 and rep.certificate is None
    assert v.total == 6.0


def test_supermodular_certificate_points_at_violation():
    # v(1,2) too large compared with v(1) + v(2) - ...: submodular-ish pair
    v = SetFunction(2, [1.0, 1.0, 1.5])
    rep = check_supermodular(v)
    assert not rep.holds
    assert rep.certificate == {"s": "1", "t": "2"}
    np.testing.assert_allclose(rep.margin, -0.5)
    loc = check_supermodular_local(v)
    assert not loc.holds and loc.certificate == {"s": "", "i": 1, "j": 2}


def test_tolerance_modes():
    v = SetFunction(2, [1.0, 1.0, 1.999])
    assert not check_supermodular(v).holds
    assert check_supermodular(v, tol=1e-3).holds
    assert check_supermodular(v, tol=1e-3, rel=True).holds
    assert not check_supermodular(v, tol=1e-4, rel=True).holds
    with pytest.raises(ValueError):
        check_supermodular(v, tol=-1.0)


@settings(max_examples=200, deadline=None)
@given(setfunctions(max_n=5))
def test_local_and_global_checks_agree(v):
    g = check_supermodular(v)
    loc = check_supermodular_local(v)
    assert g.holds == loc.holds
    if g.holds:
        assert g.margin == 0.0 or g.margin >= 0


@settings(max_examples=100, deadline=None)
@given(setfunctions(max_n=4), st.floats(0.01, 100.0))
def test_scaling_preserves_verdicts(v, lam):
    w = v.scaled(lam)
    assert check_supermodular(w, tol=1e-9, rel=True).holds == check_supermodular(v, tol=1e-9, rel=True).holds


def test_submodular_log():
    v = SetFunction(3, [1.0, 1.0, 2.0, 1.0, 2.0, 2.0, 3.0])
    rep = check_submodular_log(v)
    assert rep.holds
    np.testing.assert_allclose(rep.margin, 0.25)
    bad = SetFunction(3, [1.0, 1.0, 2.0, 1.0, 2.0, 2.0, 5.0])
    rep = check_submodular_log(bad)
    assert not rep.holds and rep.certificate == {"pivot": 1}
    with pytest.raises(ValueError, match="n = 3"):
        check_submodular_log(modular([1.0, 1.0]))
    with pytest.raises(ValueError, match="positive"):
        check_submodular_log(SetFunction(3, [0.0, 1, 1, 1, 1, 1, 1]))


def test_partition_superadditive():
    v = modular([1.0, 2.0, 3.0])
    assert check_partition_superadditive(v, [0b001, 0b110]).holds
    with pytest.raises(ValueError, match="disjoint"):
        check_partition_superadditive(v, [0b011, 0b110])
    with pytest.raises(ValueError, match="cover"):
        check_partition_superadditive(v, [0b001])
    w = SetFunction(2, [1.0, 1.0, 1.5])
    rep = check_partition_superadditive(w, [0b01, 0b10])
    assert not rep.holds and rep.certificate == {"parts": ["1", "2"]}


def test_restrict_relabels_indices():
    v = modular([1.0, 10.0, 100.0, 1000.0])
    r = restrict(v, [4, 2])
    np.testing.assert_array_equal(r.values, [1000.0, 10.0, 1010.0])
    with pytest.raises(ValueError):
        restrict(v, [1, 1])
