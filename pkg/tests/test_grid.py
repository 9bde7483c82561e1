import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from stablelp.grid import (
    GridError, GridFunction, TimeGrid, convolve, default_timegrid, fourier, inverse_fourier, lp_norm,
    make_grid,
)

small = dict(half_extent=8.0, spacing=1 / 16)


def gauss(x):
    return np.exp(-x * x)


def test_shape_and_centre():
    g = make_grid(gauss, 4.0, 0.5)
    assert g.n == 17
    assert g.x[8] == 0.0
    assert g.x[0] == -4.0 and g.x[-1] == 4.0


def test_rejects_bad_grids():
    with pytest.raises(GridError):
        GridFunction(np.zeros(5), 0.5, 4.0)
    with pytest.raises(GridError):
        GridFunction(np.full(17, np.nan), 0.5, 4.0)
    with pytest.raises(GridError):
        make_grid(gauss, 4.0, 0.5, dim=3)


def test_values_are_read_only():
    g = make_grid(gauss, **small)
    with pytest.raises(ValueError):
        g.values[0] = 1.0


def test_gaussian_norms():
    # ||e^{-x^2}||_2^2 = sqrt(pi/2), ||.||_1 = sqrt(pi)
    g = make_grid(gauss, **small)
    assert lp_norm(g, 1) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert lp_norm(g, 2) == pytest.approx((np.pi / 2) ** 0.25, rel=1e-12)


def test_fourier_of_gaussian():
    # transform of e^{-x^2} is sqrt(pi) e^{-xi^2/4}
    g = make_grid(gauss, **small)
    F = fourier(g)
    assert np.max(np.abs(F.values - np.sqrt(np.pi) * np.exp(-F.x ** 2 / 4))) < 1e-12


def test_convolve_gaussians():
    g = make_grid(gauss, **small)
    c = convolve(g, g)
    exact = np.sqrt(np.pi / 2) * np.exp(-c.x ** 2 / 2)
    assert np.max(np.abs(c.values - exact)[g.inner()]) < 1e-12


def test_convolve_with_constant_tail():
    one = make_grid(lambda x: np.ones_like(x), tail_value=1.0, **small)
    g = make_grid(gauss, **small)
    c = convolve(one, g)
    assert c.tail_value == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert np.max(np.abs(c.values - np.sqrt(np.pi))) < 1e-12


def test_timegrid_exponential_integral():
    tg = default_timegrid()
    exact = np.exp(-tg.t_min) - np.exp(-tg.t_max)
    assert tg.integrate(np.exp(-tg.nodes)) == pytest.approx(exact, rel=1e-8)


def test_timegrid_refined_keeps_range():
    tg = TimeGrid.log_spaced(1e-2, 10, 16)
    r = tg.refined(3)
    assert len(r) == 46
    assert r.nodes[0] == pytest.approx(tg.nodes[0]) and r.nodes[-1] == pytest.approx(tg.nodes[-1])


def test_csv_round_trip():
    g = make_grid(gauss, 2.0, 0.25)
    back = GridFunction.from_csv(g.to_csv())
    assert back.same_grid(g)
    assert np.max(np.abs(back.values - g.values)) < 1e-14


vals = arrays(np.float64, 33, elements=st.floats(-10, 10, allow_nan=False, width=64))


@given(vals, st.floats(-5, 5), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_lp_norm_homogeneous(v, c, p):
    g = GridFunction(v, 0.25, 4.0)
    assert lp_norm(g.with_values(c * v), p) == pytest.approx(abs(c) * lp_norm(g, p), rel=1e-9, abs=1e-12)


@given(vals, vals, st.sampled_from([1.0, 2.0, 4.0]))
def test_lp_norm_triangle(a, b, p):
    g, h = GridFunction(a, 0.25, 4.0), GridFunction(b, 0.25, 4.0)
    assert lp_norm(g.with_values(a + b), p) <= lp_norm(g, p) + lp_norm(h, p) + 1e-9


@given(vals)
def test_fourier_round_trip(v):
    g = GridFunction(v, 0.25, 4.0)
    back = inverse_fourier(fourier(g))
    assert np.max(np.abs(back.values - v)) < 1e-10 * max(1.0, np.abs(v).max())


@given(vals, vals)
def test_convolve_commutes(a, b):
    g, h = GridFunction(a, 0.25, 4.0), GridFunction(b, 0.25, 4.0)
    scale = max(1.0, np.abs(a).max() * np.abs(b).max())
    assert np.max(np.abs(convolve(g, h).values - convolve(h, g).values)) < 1e-10 * scale


@given(vals)
def test_plancherel_discrete(v):
    g = GridFunction(v, 0.25, 4.0)
    F = fourier(g)
    lhs = np.sum(np.abs(F.values) ** 2) * F.spacing / (2 * np.pi)
    assert lhs == pytest.approx(lp_norm(g, 2) ** 2, rel=1e-9, abs=1e-12)
