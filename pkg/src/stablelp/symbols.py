"""Fourier symbols of truncated jump operators.

For ``L_r g(x) = int_{|h|<r} (g(x+h) - g(x)) |h|^{-1-alpha} dh`` in d=1 the
multiplier is ``-|xi|^alpha * phi_alpha(r |xi|)`` with

    phi_alpha(z) = 2 int_0^z (1 - cos u) u^{-1-alpha} du.

This lets the squared-difference energy be computed for all x at once:
``Gamma(g)(x) = L_r[g^2](x) - 2 g(x) L_r[g](x)``.
"""
from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

_SERIES_MAX = 4.0
_ASYM_MIN = 40.0


def phi_infinity(alpha: float) -> float:
    """``2 int_0^inf (1 - cos u) u^{-1-alpha} du``."""
    return np.pi / (special.gamma(1 + alpha) * np.sin(np.pi * alpha / 2))


def _phi_series(z, alpha, nterms=22):
    """Power series, Horner in z^2; terms stay below ~10 for z <= 4."""
    z = np.asarray(z, dtype=float)
    n = np.arange(1, nterms + 1)
    c = (-1.0) ** (n + 1) / (special.factorial(2 * n) * (2 * n - alpha))
    w = z * z
    acc = np.zeros_like(z)
    for ck in c[::-1]:
        acc = acc * w + ck
    return 2 * acc * w * z ** (-alpha)


def _cos_tail_asym(z, nu, nterms=12):
    """``int_z^inf cos(u) u^{-nu} du`` for large z (integration by parts)."""
    z = np.asarray(z, dtype=float)
    inv = 1.0 / z
    acc = np.zeros(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    for k in range(nterms):
        acc += term
        term = term * (-1j * (nu + k)) * inv
    return (1j * np.exp(1j * z) * acc * z ** (-nu)).real


def _cos_tail_quad(z, nu):
    # QAWF reports spurious cycle warnings once the sum has converged to ~1e-16
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda u: u ** (-nu), z, np.inf, weight="cos", wvar=1.0,
                                limlst=200, epsabs=1e-15)
    return val


def phi_direct(z: float, alpha: float) -> float:
    """Reference value of phi_alpha(z) by adaptive quadrature."""
    if z <= _SERIES_MAX:
        return float(_phi_series([z], alpha)[0])
    return float(phi_infinity(alpha) - 2 * z ** (-alpha) / alpha + 2 * _cos_tail_quad(z, 1 + alpha))


@lru_cache(maxsize=32)
def _mid_spline(alpha: float):
    z = np.linspace(_SERIES_MAX, _ASYM_MIN, 3601)
    vals = np.array([phi_direct(zi, alpha) if zi > _SERIES_MAX else float(_phi_series([zi], alpha)[0])
                     for zi in z])
    return CubicSpline(z, vals)


def phi(z, alpha: float) -> np.ndarray:
    """Vectorised phi_alpha(z) for ``z >= 0`` (``inf`` allowed)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    lo = z <= _SERIES_MAX
    hi = z >= _ASYM_MIN
    mid = ~(lo | hi)
    if lo.any():
        zl = z[lo]
        tiny = zl < 1e-3
        v = np.empty_like(zl)
        zt = zl[tiny]
        v[tiny] = zt ** (2 - alpha) / (2 - alpha) - zt ** (4 - alpha) / (12 * (4 - alpha))
        v[~tiny] = _phi_series(zl[~tiny], alpha)
        out[lo] = v
    if mid.any():
        out[mid] = _mid_spline(alpha)(z[mid])
    if hi.any():
        zh = z[hi]
        finite = np.isfinite(zh)
        v = np.full_like(zh, phi_infinity(alpha))
        zf = zh[finite]
        v[finite] += -2 * zf ** (-alpha) / alpha + 2 * _cos_tail_asym(zf, 1 + alpha)
        out[hi] = v
    return out


def truncated_multiplier(absxi, alpha: float, radius: float) -> np.ndarray:
    """Symbol of ``L_r`` (``radius = inf`` gives the full fractional operator)."""
    absxi = np.asarray(absxi, dtype=float)
    if np.isinf(radius):
        return -absxi ** alpha * phi_infinity(alpha)
    return -absxi ** alpha * phi(radius * absxi, alpha)
