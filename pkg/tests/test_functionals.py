import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from stablelp import functionals as lp
from stablelp.checks import arrow_constant
from stablelp.density import StableParams
from stablelp.extension import ExtensionField
from stablelp.fixtures import fixture
from stablelp.grid import GridFunction, TimeGrid, lp_norm


def jump_energy_cos0(r, alpha):
    """``int_{|h|<r} (cos h - 1)^2 |h|^{-1-alpha} dh`` (energy of cos at x = 0)."""
    f = lambda h: (1 - np.cos(h)) ** 2 * h ** (-1 - alpha)
    edges = [0.0] + [k * np.pi for k in range(1, int(min(r, 400) / np.pi) + 1)] + [min(r, 400.0)]
    val = sum(integrate.quad(f, a, b, epsabs=1e-16, epsrel=1e-11)[0] for a, b in zip(edges[:-1], edges[1:]) if b > a)
    if r > 400:
        # beyond 400: (1 - cos)^2 averages to 3/2
        val += 1.5 * (400.0 ** -alpha - r ** -alpha) / alpha
    return 2 * val


@pytest.fixture(scope="module")
def cos_reports(cos_fixture):
    out = {}
    for a in (1.0, 1.5):
        out[a] = lp.compute_functionals(cos_fixture, StableParams(a), lp.SQUARE_FUNCTIONS, boundary="periodic")
    return out


def _at0(rep):
    g = rep.values
    return float(g.values[g.n // 2])


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_g_up_of_cos(cos_reports, cos_fixture, alpha):
    g = cos_reports[alpha]["g_up"].values
    assert np.max(np.abs(g.values - np.abs(cos_fixture.values) / 2)) < 1e-7


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_gamma_slice_of_cos(cos_fixture, alpha):
    L = lp.LPFunctionals(cos_fixture, StableParams(alpha), ("g_arrow_alpha",), boundary="periodic")
    for t in (0.2, 1.0, 4.0):
        sl = L.sp.crop(L.gamma_slice(t))
        ref = np.exp(-2 * t) * jump_energy_cos0(t ** (2 / alpha), alpha)
        assert sl[sl.size // 2] == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_pointwise_gamma_of_cos(cos_fixture, alpha):
    fld = ExtensionField(cos_fixture, StableParams(alpha), boundary="periodic")
    t = 1.0
    ref = np.exp(-2 * t) * jump_energy_cos0(1.0, alpha)
    assert lp.gamma_alpha(fld, t, 0.0) == pytest.approx(ref, rel=1e-6)
    full = lp.gamma_full(fld, t, 0.0)
    ref_full = np.exp(-2 * t) * jump_energy_cos0(np.inf, alpha)
    assert abs(full["value"] - ref_full) <= full["error_bar"] + 1e-6 * ref_full


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_g_arrow_alpha_of_cos(cos_reports, alpha):
    # G_arrow_alpha(0)^2 = int t e^{-2t} E(t^{2/alpha}) dt
    fn = lambda t: t * np.exp(-2 * t) * jump_energy_cos0(t ** (2 / alpha), alpha)
    ref = sum(integrate.quad(fn, a, b, epsrel=1e-10)[0] for a, b in ((0, 1), (1, 8), (8, 60)))
    assert _at0(cos_reports[alpha]["g_arrow_alpha"]) == pytest.approx(np.sqrt(ref), rel=1e-5)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_l2_constant_of_cos(cos_reports, cos_fixture, alpha):
    # all energy of cos sits at |xi| = 1: the ratio is the L^2 constant exactly
    # norm over one period: the periodic grid repeats its end point
    v = cos_fixture.values[:-1]
    r = cos_reports[alpha]["g_arrow_alpha"].norm(2.0) / np.sqrt(np.sum(v * v) * cos_fixture.spacing)
    assert r == pytest.approx(arrow_constant(alpha), rel=1e-6)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_l_star_equals_g_arrow_alpha_in_l2(cos_reports, alpha):
    r = cos_reports[alpha]
    assert r["l_star"].norm(2.0) == pytest.approx(r["g_arrow_alpha"].norm(2.0), rel=1e-6)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_pointwise_orderings(cos_reports, alpha):
    r = cos_reports[alpha]
    tol = 1e-12
    assert np.all(r["g_alpha"].full >= r["g_up"].full - tol)
    assert np.all(r["g_arrow"].full >= r["g_arrow_alpha"].full - tol)
    assert np.all(r["g_full"].full >= r["g_alpha"].full - tol)
    gs = r["g_star"].full ** 2
    parts = r["g_star_up"].full ** 2 + r["g_star_arrow"].full ** 2
    assert np.max(np.abs(gs - parts)) < 1e-10 * gs.max()


def test_area_below_g_star_at_lambda0():
    pa = StableParams(1.5)
    lam0 = lp.lambda_zero(pa)
    reps = lp.compute_functionals(fixture("gauss", 32.0, 1 / 32), pa, ("area", "g_star_arrow"), lam=lam0)
    assert np.all(reps["area"].full ** 2 <= 2 ** lam0 * reps["g_star_arrow"].full ** 2 * (1 + 1e-9))


def test_g_up_ratio_is_half():
    f = fixture("gauss")
    L = lp.LPFunctionals(f, StableParams(1.5), ("g_up",))
    r = L.run()["g_up"]
    ratio = r.norm(2.0) / lp_norm(f, 2.0)
    assert ratio == pytest.approx(0.5, abs=1e-3)
    # the shortfall is the zero Fourier mode, (int f)^2 / P, plus the t-range tail
    w0 = np.pi / (L.sp.period * np.sqrt(np.pi / 2))
    assert ratio == pytest.approx(0.5 * np.sqrt(1 - w0 - r.extras["t_tail_l2"]), abs=1e-7)


def test_unknown_functional_rejected(p15):
    with pytest.raises(ValueError):
        lp.LPFunctionals(fixture("gauss"), p15, ("nope",))


@pytest.mark.parametrize("lam,alpha", [(1.75, 1.5), (2.0, 1.0), (3.0, 1.2)])
def test_lambda_kernel_mass(lam, alpha):
    masses = [lp.LambdaKernel(lam, t, alpha).l1_norm() for t in (1e-3, 1.0, 50.0)]
    np.testing.assert_allclose(masses, 2 / (lam - 1), rtol=1e-9)


def test_kernel_comparability_finite(p15):
    r = lp.kernel_comparability(p15)
    assert np.isfinite(r["c"]) and r["c"] > 1
    assert lp.kernel_comparability(p15, lam=1.5)["c"] == np.inf


def test_hl_maximal_indicator():
    f = fixture("indicator")
    m = lp.hl_maximal(f).values
    assert m(0.0) == pytest.approx(1.0, abs=1e-12)
    assert m(2.0) == pytest.approx(1 / 3, abs=f.spacing)
    assert m(5.0) == pytest.approx(1 / 3 * 3 / 6, abs=f.spacing)


def test_n_alpha_of_constant(p15):
    one = fixture("one", half_extent=16.0, spacing=1 / 16)
    n = lp.n_alpha_maximal(one, p15).values.values
    np.testing.assert_allclose(n, 1.0, atol=1e-12)


def test_n_alpha_refinement_and_bounds(p15):
    f = fixture("indicator", half_extent=32.0, spacing=1 / 32)
    rep = lp.LPFunctionals(f, p15, ("n_alpha",)).n_alpha()
    assert rep.extras["refinement_change"] < 1e-3
    assert np.all(rep.values.values >= np.abs(f.values) - 1e-12)
    assert rep.values.values.max() <= 1 + 1e-9


vals = arrays(np.float64, 257, elements=st.floats(-3, 3, allow_nan=False, width=64))


@given(vals, st.floats(-4, 4))
def test_hl_maximal_properties(v, c):
    f = GridFunction(v, 1 / 16, 8.0)
    m = lp.hl_maximal(f).values.values
    assert np.all(m >= np.abs(v) - 1e-12)
    mc = lp.hl_maximal(f.with_values(c * v)).values.values
    np.testing.assert_allclose(mc, abs(c) * m, rtol=1e-9, atol=1e-12)


@given(vals)
def test_square_functions_nonnegative_and_finite(v):
    f = GridFunction(v, 1 / 16, 8.0)
    tg = TimeGrid.log_spaced(1e-3, 1e2, 48)
    reps = lp.compute_functionals(f, StableParams(1.5), ("g_up", "g_alpha", "area"), tgrid=tg, pad=4)
    for r in reps.values():
        assert np.all(np.isfinite(r.full)) and np.all(r.full >= 0)
    assert np.all(reps["g_alpha"].full >= reps["g_up"].full - 1e-12)
