import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from stablelp.density import StableParams
from stablelp.extension import (
    ExtensionField, d_dt_extend, extend, extend_by_subordination, invariance_check, semigroup_check,
)
from stablelp.fixtures import fixture
from stablelp.grid import GridFunction, make_grid


@pytest.mark.parametrize("t", [0.01, 0.5, 1.0, 3.0])
def test_cos_is_eigenfunction(cos_fixture, p15, t):
    # |xi| = 1 so Q_t cos = e^{-t} cos for every alpha
    u = extend(cos_fixture, p15, t, boundary="periodic")
    assert np.max(np.abs(u.values - np.exp(-t) * cos_fixture.values)) < 1e-12
    du = d_dt_extend(cos_fixture, p15, t, boundary="periodic")
    assert np.max(np.abs(du.values + np.exp(-t) * cos_fixture.values)) < 1e-12


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_subordination_route(alpha):
    pa = StableParams(alpha)
    f = fixture("gauss", half_extent=32.0, spacing=1 / 32)
    for t in (0.3, 1.0):
        a = extend(f, pa, t)
        b = extend_by_subordination(f, pa, t)
        assert np.max(np.abs(a.values - b.values)) < 1e-5


def test_constant_is_fixed(p15):
    one = fixture("one", half_extent=16.0, spacing=1 / 16)
    u = extend(one, p15, 2.0)
    assert np.max(np.abs(u.values - 1)) < 1e-13


def test_semigroup(p15):
    assert semigroup_check(fixture("indicator"), p15, 1.0) < 1e-12


def test_mass_invariance(p15):
    r = invariance_check(fixture("gauss", half_extent=16.0, spacing=1 / 16), p15, 1.0)
    assert r["lhs"] == pytest.approx(r["rhs"], rel=1e-5)


def test_t_must_be_positive(p15):
    with pytest.raises(ValueError):
        extend(fixture("gauss"), p15, 0.0)


def test_field_matches_extend(p15):
    f = fixture("coswin", half_extent=16.0, spacing=1 / 16)
    fld = ExtensionField(f, p15)
    for t in (0.1, 1.0):
        assert np.max(np.abs(fld.slice(t).values - extend(f, p15, t).values)) < 1e-13


def test_dt_matches_difference(p15):
    f = fixture("gauss", half_extent=16.0, spacing=1 / 16)
    h = 1e-5
    num = (extend(f, p15, 1 + h).values - extend(f, p15, 1 - h).values) / (2 * h)
    assert np.max(np.abs(num - d_dt_extend(f, p15, 1.0).values)) < 1e-8


vals = arrays(np.float64, 129, elements=st.floats(-5, 5, allow_nan=False, width=64))


@given(vals, st.floats(0.05, 20.0), st.floats(0.5, 1.9))
def test_maximum_principle(v, t, alpha):
    f = GridFunction(v, 1 / 8, 8.0)
    u = extend(f, StableParams(alpha), t)
    assert np.abs(u.values).max() <= np.abs(v).max() * (1 + 1e-9) + 1e-12


@given(vals, vals, st.floats(-3, 3), st.floats(0.1, 5.0))
def test_linear(a, b, c, t):
    p = StableParams(1.5)
    fa, fb = GridFunction(a, 1 / 8, 8.0), GridFunction(b, 1 / 8, 8.0)
    lhs = extend(fa.with_values(a + c * b), p, t).values
    rhs = extend(fa, p, t).values + c * extend(fb, p, t).values
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * (1 + np.abs(a).max() + abs(c) * np.abs(b).max())
