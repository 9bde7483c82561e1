"""The harmonic extension f_t = Q_t f and its t-derivative.

``Q_t`` acts on transforms as multiplication by ``exp(-t |xi|^{alpha/2})``.
Decaying inputs are zero-padded onto a long periodic domain; inputs that are
periodic on the grid (``cos x`` on a multiple of its period) can be extended
exactly with ``boundary="periodic"``.
"""
from __future__ import annotations

import threading

import numpy as np
from scipy import fft as sfft

from .density import ExitLaw, StableParams, stable_law
from .grid import GridError, GridFunction, TimeGrid, default_timegrid

DEFAULT_PAD = 16


class PaddedSpectrum:
    """Transform of ``f - tail`` on a periodic domain ``pad`` times the grid.

    ``full`` arrays live on the padded domain in natural FFT order with
    ``x = 0`` at index 0; :meth:`crop` maps them back to the original grid.
    """

    def __init__(self, f: GridFunction, pad: int = DEFAULT_PAD, boundary: str = "decay"):
        if f.dim != 1 or f.domain != "space":
            raise GridError("1-D space-domain function required")
        self.f = f
        self.dx = f.spacing
        self.tail = f.tail_value
        m = (f.n - 1) // 2
        self.m = m
        vals = np.asarray(f.values, dtype=float) - self.tail
        if boundary == "periodic":
            if abs(vals[0] - vals[-1]) > 1e-9 * max(1.0, np.abs(vals).max()):
                raise GridError("periodic boundary needs f(-L) == f(L)")
            n = f.n - 1
            buf = np.roll(vals[:-1], -m)
        elif boundary == "decay":
            n = sfft.next_fast_len(max(pad, 1) * f.n)
            buf = np.zeros(n)
            buf[: m + 1] = vals[m:]
            buf[n - m:] = vals[:m]
        else:
            raise ValueError(f"unknown boundary {boundary!r}")
        self.boundary = boundary
        self.n = n
        self.period = n * self.dx
        # real input: half spectrum; mode_weight counts each +-xi pair twice
        self.xi = 2 * np.pi * sfft.rfftfreq(n, self.dx)
        self.absxi = self.xi
        self.mode_weight = np.full(self.xi.size, 2.0)
        self.mode_weight[0] = 1.0
        if n % 2 == 0:
            self.mode_weight[-1] = 1.0
        self.fhat = sfft.rfft(buf)

    @property
    def x_full(self) -> np.ndarray:
        return sfft.fftfreq(self.n, 1.0 / self.n) * self.dx

    def apply(self, multiplier) -> np.ndarray:
        """Inverse transform of ``multiplier * fhat`` on the padded domain."""
        return sfft.irfft(multiplier * self.fhat, self.n)

    def fwd(self, full: np.ndarray) -> np.ndarray:
        return sfft.rfft(full)

    def inv(self, spec: np.ndarray) -> np.ndarray:
        return sfft.irfft(spec, self.n)

    def crop(self, full: np.ndarray) -> np.ndarray:
        idx = np.arange(-self.m, self.m + 1) % self.n
        return full[idx]

    def to_grid(self, full, tail=0.0) -> GridFunction:
        return self.f.with_values(self.crop(full) + tail, tail_value=tail)


def _check_t(t):
    if not t > 0:
        raise ValueError("t must be positive")


def extend(f: GridFunction, params: StableParams, t: float, boundary="decay", pad=DEFAULT_PAD) -> GridFunction:
    """``Q_t f`` on the grid of ``f``."""
    _check_t(t)
    sp = PaddedSpectrum(f, pad, boundary)
    a = sp.absxi ** params.half
    return sp.to_grid(sp.apply(np.exp(-t * a)), tail=f.tail_value)


def d_dt_extend(f: GridFunction, params: StableParams, t: float, boundary="decay", pad=DEFAULT_PAD) -> GridFunction:
    """``d/dt Q_t f``; constants are annihilated."""
    _check_t(t)
    sp = PaddedSpectrum(f, pad, boundary)
    a = sp.absxi ** params.half
    return sp.to_grid(sp.apply(-a * np.exp(-t * a)), tail=0.0)


def extend_by_subordination(f: GridFunction, params: StableParams, t: float, n_nodes=1200,
                            boundary="decay", pad=DEFAULT_PAD) -> GridFunction:
    """``int_0^inf P_s f mu_t(ds)`` with P_s f = f * p(s,.,0), s on a log grid.

    The s-quadrature is applied to the multipliers ``exp(-s|xi|^alpha)`` of
    ``P_s`` before the inverse transform (the map is linear).
    """
    _check_t(t)
    sp = PaddedSpectrum(f, pad, boundary)
    u = np.linspace(np.log(1e-6 * t * t), np.log(1e12 * t * t), n_nodes)
    s = np.exp(u)
    w = np.full(n_nodes, u[1] - u[0]) * s * ExitLaw(t).pdf(s)
    w[0] /= 2
    w[-1] /= 2
    ax = sp.absxi ** params.alpha
    mult = np.zeros_like(ax)
    for sj, wj in zip(s, w):
        mult += wj * np.exp(-sj * ax)
    mult += float(ExitLaw(t).cdf(s[0])) + float(1 - ExitLaw(t).cdf(s[-1])) * (ax == 0)
    return sp.to_grid(sp.apply(mult), tail=f.tail_value)


def semigroup_check(f: GridFunction, params: StableParams, t: float, pad=DEFAULT_PAD) -> float:
    """Max deviation between ``Q_{t/2}(Q_{t/2} f)`` and ``Q_t f``.

    Both routes stay on the padded domain so no tail mass is cropped between
    the two half steps.
    """
    _check_t(t)
    sp = PaddedSpectrum(f, pad)
    a = sp.absxi ** params.half
    half = sp.apply(np.exp(-t / 2 * a))
    twice = sp.inv(np.exp(-t / 2 * a) * sp.fwd(half))
    return float(np.max(np.abs(sp.crop(twice) - sp.crop(sp.apply(np.exp(-t * a))))))


def semigroup_P(f: GridFunction, params: StableParams, s: float, pad=DEFAULT_PAD) -> GridFunction:
    """``P_s f = f * p(s,.,0)`` spectrally."""
    if not s > 0:
        raise ValueError("s must be positive")
    sp = PaddedSpectrum(f, pad)
    return sp.to_grid(sp.apply(np.exp(-s * sp.absxi ** params.alpha)), tail=f.tail_value)


def invariance_check(f: GridFunction, params: StableParams, s: float, rtol=1e-5) -> dict:
    """``(int P_s f, int f)``; the mass of P_s f outside the grid is added exactly.

    Both sides are cell (Riemann) sums.  Raises if they differ by more than
    ``rtol`` relative.
    """
    params.require_1d()
    if f.tail_value:
        raise GridError("invariance needs an integrable f")
    ps = semigroup_P(f, params, s, pad=64)
    dx = f.spacing
    law = stable_law(params.alpha)
    y = f.x
    edge = f.half_extent + dx / 2
    outside = np.dot(f.values, law.tail_mass(edge - y, s) + law.tail_mass(edge + y, s)) * dx
    lhs = float(np.sum(ps.values) * dx + outside)
    rhs = float(np.sum(f.values) * dx)
    if abs(lhs - rhs) > rtol * max(abs(rhs), 1e-300) and abs(lhs - rhs) > 1e-14:
        raise AssertionError(f"mass not conserved: {lhs} vs {rhs}")
    return {"lhs": lhs, "rhs": rhs}


class ExtensionField:
    """Lazily built slices ``f_t`` and ``d/dt f_t`` keyed by t.

    Slices are cached; concurrent requests for the same t compute once.
    """

    def __init__(self, base: GridFunction, params: StableParams, tgrid: TimeGrid | None = None,
                 pad: int = DEFAULT_PAD, boundary: str = "decay"):
        self.base = base
        self.params = params
        self.tgrid = tgrid or default_timegrid()
        self.spectrum = PaddedSpectrum(base, pad, boundary)
        self._a = self.spectrum.absxi ** params.half
        self._slices: dict = {}
        self._dslices: dict = {}
        self._lock = threading.Lock()
        self._locks: dict = {}

    def _key_lock(self, key):
        with self._lock:
            return self._locks.setdefault(key, threading.Lock())

    def full_slice(self, t: float) -> np.ndarray:
        """``f_t - tail`` on the padded domain."""
        return self._cached(self._slices, ("f", t), lambda: self.spectrum.apply(np.exp(-t * self._a)))

    def full_dslice(self, t: float) -> np.ndarray:
        return self._cached(self._dslices, ("d", t), lambda: self.spectrum.apply(-self._a * np.exp(-t * self._a)))

    def _cached(self, store, key, make):
        _check_t(key[1])
        hit = store.get(key)
        if hit is not None:
            return hit
        with self._key_lock(key):
            hit = store.get(key)
            if hit is None:
                hit = make()
                hit.setflags(write=False)
                store[key] = hit
            return hit

    def slice(self, t: float) -> GridFunction:
        return self.spectrum.to_grid(self.full_slice(t), tail=self.base.tail_value)

    def dslice(self, t: float) -> GridFunction:
        return self.spectrum.to_grid(self.full_dslice(t), tail=0.0)

    @property
    def slices(self) -> dict:
        return {t: self.slice(t) for t in self.tgrid.nodes}

    @property
    def dslices(self) -> dict:
        return {t: self.dslice(t) for t in self.tgrid.nodes}

    def clear(self):
        with self._lock:
            self._slices.clear()
            self._dslices.clear()
