import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablelp.symbols import phi, phi_direct, phi_infinity, truncated_multiplier


def phi_oracle(z, alpha, dps=40):
    """``2 int_0^z (1 - cos u) u^{-1-alpha} du`` in high precision.

    Power series on [0, min(z, 1)], then ``4 sin^2(u/2)`` (no cancellation)
    integrated panel by panel between multiples of pi.
    """
    with mp.workdps(dps):
        z, a = mp.mpf(z), mp.mpf(alpha)
        z0 = min(z, mp.mpf(1))
        s = mp.nsum(lambda k: (-1) ** (k + 1) * z0 ** (2 * k - a) / (mp.factorial(2 * k) * (2 * k - a)), [1, mp.inf])
        val = 2 * s
        if z > 1:
            edges = [mp.mpf(1)] + [k * mp.pi for k in range(1, int(z / mp.pi) + 1) if k * mp.pi > 1] + [z]
            f = lambda u: 4 * mp.sin(u / 2) ** 2 * u ** (-1 - a)
            val += sum(mp.quad(f, [lo, hi]) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo)
        return float(val)


ZS = [1e-5, 1e-3, 0.02, 0.5, 1.0, 3.7, 4.0, 10.0, 39.5, 40.5, 120.0, 600.0]


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.2, 1.5, 1.8, 1.95])
def test_phi_against_oracle(alpha):
    for z in ZS:
        ref = phi_oracle(z, alpha)
        assert float(phi(z, alpha)) == pytest.approx(ref, rel=1e-10, abs=1e-14), z


@pytest.mark.parametrize("alpha", [0.8, 1.5])
def test_phi_direct_agrees(alpha):
    for z in (0.3, 2.0, 25.0, 200.0):
        assert phi_direct(z, alpha) == pytest.approx(phi_oracle(z, alpha), rel=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 1.9])
def test_phi_limit(alpha):
    # Phi(inf) = pi / (Gamma(1 + alpha) sin(pi alpha / 2))
    ref = float(mp.pi / (mp.gamma(1 + alpha) * mp.sin(mp.pi * alpha / 2)))
    assert phi_infinity(alpha) == pytest.approx(ref, rel=1e-14)
    assert float(phi(np.inf, alpha)) == pytest.approx(ref, rel=1e-14)
    # approach from below: Phi(z) = Phi(inf) - 2 z^{-alpha} / alpha + O(z^{-1-alpha})
    z = 1e9
    assert float(phi(z, alpha)) == pytest.approx(ref - 2 * z ** -alpha / alpha, rel=1e-12)


def test_truncated_multiplier_limits():
    xi = np.array([0.0, 0.5, 2.0])
    m = truncated_multiplier(xi, 1.5, np.inf)
    assert m[0] == 0.0
    np.testing.assert_allclose(m[1:], -phi_infinity(1.5) * xi[1:] ** 1.5, rtol=1e-14)


@given(st.floats(0.3, 1.95), st.floats(1e-4, 1e3), st.floats(1.0001, 3.0))
def test_phi_increasing(alpha, z, k):
    assert float(phi(k * z, alpha)) >= float(phi(z, alpha)) * (1 - 1e-12)


@given(st.floats(0.3, 1.95), st.floats(1e-3, 1e4))
def test_phi_bounded_by_limit(alpha, z):
    assert 0 < float(phi(z, alpha)) <= phi_infinity(alpha) * (1 + 2 / z ** alpha)
