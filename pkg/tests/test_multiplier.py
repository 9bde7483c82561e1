import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import special

from stablelp import multiplier as mult
from stablelp.density import StableParams
from stablelp.fixtures import fixture
from stablelp.grid import GridError, GridFunction


@pytest.fixture(scope="module")
def tk():
    return mult.test_kernel(StableParams(1.5))


def test_hilbert_of_gaussian():
    # p.v. int e^{-(x-y)^2} / y dy = 2 sqrt(pi) D(x), D the Dawson function
    errs = []
    for dx in (1 / 16, 1 / 32):
        tf = mult.apply_T(fixture("gauss", half_extent=16.0, spacing=dx), mult.pv_inv_x())
        errs.append(np.max(np.abs(tf.values - 2 * np.sqrt(np.pi) * special.dawsn(tf.x))))
    assert errs[1] < 5e-5
    # third order in the spacing
    assert 6 < errs[0] / errs[1] < 10


def test_hilbert_l2_constant():
    assert mult.norm_ratio(fixture("gauss"), mult.pv_inv_x(), 2.0) == pytest.approx(np.pi, abs=1e-4)


def test_kernel_not_evaluated_at_zero(tk):
    with pytest.raises(GridError):
        tk(np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        mult.KernelSpec(lambda x: x, symmetry="twisted")


def test_on_grid_symmetry(tk):
    v = tk.on_grid(0.25, 4.0)
    assert v[16] == 0.0
    np.testing.assert_array_equal(v, -v[::-1])
    e = mult.inv_abs().on_grid(0.25, 4.0)
    np.testing.assert_array_equal(e, e[::-1])


def test_cancelation(tk):
    assert mult.check_cancelation(tk) == 0.0
    # int_{1<|x|<e} 1/|x| dx = 2
    assert mult.check_cancelation(mult.inv_abs(), [(1.0, np.e)]) == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        mult.check_cancelation(tk, [(2.0, 1.0)])


def test_growth_constants(tk):
    g = mult.check_growth(tk, StableParams(1.5))
    assert g["cond_i_const"] == pytest.approx(1.0, abs=1e-12)
    assert g["cond_ii_const"] <= 1.0 + 1e-12


def test_decomposition_sums_to_kernel(tk):
    k1, k2 = mult.decompose(tk)
    x = np.array([-3.0, -1.2, -0.4, 0.3, 1.0, 1.3, 1.9, 5.0])
    np.testing.assert_allclose(k1(x) + k2(x), tk(x), rtol=1e-14)
    assert np.all(k2(np.array([0.3, -0.9])) == 0)
    assert np.all(k1(np.array([1.5, -2.0])) == 0)


def test_smooth_step():
    s = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(mult.smooth_step(s), [0, 0, 0.5, 1, 1], atol=1e-15)


def test_decay_bound_routes_agree(tk):
    _, k2 = mult.decompose(tk)
    b = mult.dtQt_kernel_bound(k2, StableParams(1.5), 1.25)
    assert b["route_gap"] < 1e-4
    assert b["holds"] and b["drift"] < 0.05


def test_fat_tail_rejected():
    p = StableParams(1.5)
    _, k2 = mult.decompose(mult.fat_tail(p))
    with pytest.raises(mult.TailTooFat):
        mult.dtQt_kernel_bound(k2, p)


def test_tail_integrals_decay(tk):
    p = StableParams(1.5)
    lam = 1.25
    _, k2 = mult.decompose(tk)

    def const(dx):
        ti = mult.tail_integrals(k2, p, spacing=dx)
        return [max(abs(v) * x ** lam for x, parts in ti.items() for v in [parts[k]]) for k in range(3)]

    c, cf = const(1 / 64), const(1 / 128)
    for a, b in zip(c, cf):
        assert np.isfinite(a)
        assert abs(a - b) / a < 0.05


def test_even_kernel_has_no_pv():
    with pytest.raises(mult.PrincipalValueUndefined):
        mult.apply_T(fixture("gauss", 8.0, 1 / 16), mult.inv_abs())


def test_verdict_violated_for_even_kernel():
    p = StableParams(1.5)
    rep = mult.certify(mult.inv_abs(), p, {"gauss": fixture("gauss", 16.0, 1 / 32)})
    assert rep.verdict == "violated"
    assert rep.to_dict()["verdict"] == "violated"


def test_csv_kernel_round_trip(tmp_path, tk):
    g = GridFunction(tk.on_grid(1 / 16, 32.0), 1 / 16, 32.0)
    path = tmp_path / "k.csv"
    path.write_text(g.to_csv())
    k = mult.kernel_from_csv(path, "odd")
    x = np.array([0.5, 2.0, 17.3, -4.1])
    np.testing.assert_allclose(k(x), tk(x), rtol=2e-4)
    assert mult.check_cancelation(k) == 0.0


def test_registry():
    p = StableParams(1.5)
    for name in ("test", "weakened", "pv_inv_x", "inv_abs", "fat_tail"):
        assert mult.get_kernel(name, p).name == name
    with pytest.raises(KeyError):
        mult.get_kernel("nope", p)


vals = arrays(np.float64, 129, elements=st.floats(-3, 3, allow_nan=False, width=64))


@given(vals, vals, st.floats(-3, 3))
def test_apply_T_linear(a, b, c):
    k = mult.pv_inv_x()
    fa, fb = GridFunction(a, 1 / 8, 8.0), GridFunction(b, 1 / 8, 8.0)
    lhs = mult.apply_T(fa.with_values(a + c * b), k).values
    rhs = mult.apply_T(fa, k).values + c * mult.apply_T(fb, k).values
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * (1 + np.abs(a).max() + abs(c) * np.abs(b).max())


@given(st.integers(-20, 20))
def test_apply_T_translation_equivariant(shift):
    dx = 1 / 8
    k = mult.test_kernel(StableParams(1.5))
    f = fixture("gauss", 8.0, dx)
    g = fixture("gauss", 8.0, dx, shift=shift * dx)
    tf, tg = mult.apply_T(f, k).values, mult.apply_T(g, k).values
    # compare away from the ends of the output grid
    m = tf.size // 4
    if shift >= 0:
        a, b = tg[m + shift: -m + shift or None], tf[m: -m]
    else:
        a, b = tg[m + shift: -m + shift], tf[m: -m]
    # the shifted fixture is truncated differently at the grid edge: e^{-64} level
    assert np.max(np.abs(a - b)) < 1e-12
