"""Uniform symmetric grids, discrete Fourier transforms, norms and quadrature.

Every analytic routine in the package carries its samples in a
:class:`GridFunction`.  The continuous transform convention is

    f_hat(xi) = \\int f(x) exp(-i xi x) dx,

approximated by ``dx * sum_j f(x_j) exp(-i xi_k x_j)`` on the dual grid.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft as sfft


class GridError(ValueError):
    """Raised on invalid or mismatched grids."""


def _npoints(half_extent: float, spacing: float) -> int:
    n = 2.0 * half_extent / spacing
    m = int(round(n))
    if abs(n - m) > 1e-9 * max(1.0, n):
        raise GridError(f"2L/dx = {n} is not an integer")
    return m + 1


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on ``[-L, L]^dim`` with spacing ``dx``.

    ``tail_value`` is the constant the function tends to outside the grid
    (used for constants such as ``f = 1``); analytic operators act on
    ``values - tail_value`` and add the constant back.
    """

    values: np.ndarray
    spacing: float
    half_extent: float
    dim: int = 1
    tail_value: float = 0.0
    domain: str = "space"
    _n: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError("dim must be 1 or 2")
        if not (self.spacing > 0 and self.half_extent > 0):
            raise GridError("spacing and half_extent must be positive")
        if self.domain not in ("space", "frequency"):
            raise GridError(f"unknown domain {self.domain!r}")
        n = _npoints(self.half_extent, self.spacing)
        vals = np.array(self.values, copy=True)
        if vals.shape != (n,) * self.dim:
            raise GridError(f"expected shape {(n,) * self.dim}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise GridError("samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_n", n)

    @classmethod
    def from_callable(cls, fn, spacing, half_extent, dim=1, tail_value=0.0):
        g = cls(np.zeros((_npoints(half_extent, spacing),) * dim), spacing, half_extent, dim)
        if dim == 1:
            vals = fn(g.x)
        else:
            xx, yy = np.meshgrid(g.x, g.x, indexing="ij")
            vals = fn(xx, yy)
        return cls(np.asarray(vals), spacing, half_extent, dim, tail_value)

    @property
    def n(self) -> int:
        return self._n

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self._n) - (self._n - 1) // 2) * self.spacing

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self._n == other._n
            and self.dim == other.dim
            and self.domain == other.domain
            and np.isclose(self.spacing, other.spacing, rtol=1e-12, atol=0)
        )

    def with_values(self, values, tail_value=None) -> "GridFunction":
        tv = self.tail_value if tail_value is None else tail_value
        return GridFunction(values, self.spacing, self.half_extent, self.dim, tv, self.domain)

    def inner(self, frac: float = 0.5) -> np.ndarray:
        """Boolean mask of the 1-D points with ``|x| <= frac * L``."""
        return np.abs(self.x) <= frac * self.half_extent + 1e-12

    def __call__(self, x):
        """Cubic interpolation (1-D only); ``tail_value`` outside the grid."""
        from scipy.interpolate import CubicSpline

        if self.dim != 1:
            raise GridError("off-grid evaluation is 1-D only")
        cs = CubicSpline(self.x, self.values)
        x = np.asarray(x, dtype=float)
        out = cs(x)
        return np.where(np.abs(x) <= self.half_extent, out, self.tail_value)

    # -- serialization ---------------------------------------------------

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.is_complex:
            raise GridError("CSV export is for real-valued functions")
        if self.dim == 1:
            w.writerow(["x", "value"])
            for xi, v in zip(self.x, self.values):
                w.writerow([f"{xi:.15g}", f"{v:.15g}"])
        else:
            w.writerow(["x", "y", "value"])
            xs = self.x
            for i, xi in enumerate(xs):
                for j, yj in enumerate(xs):
                    w.writerow([f"{xi:.15g}", f"{yj:.15g}", f"{self.values[i, j]:.15g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "GridFunction":
        text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        if header == ["x", "value"]:
            x, v = body[:, 0], body[:, 1]
            dx = x[1] - x[0]
            L = float(np.round(x[-1] / dx) * dx)
            if not np.allclose(np.diff(x), dx, rtol=1e-9):
                raise GridError("CSV grid is not uniform")
            return cls(v, float(dx), L)
        if header == ["x", "y", "value"]:
            xs = np.unique(body[:, 0])
            n = xs.size
            dx = xs[1] - xs[0]
            return cls(body[:, 2].reshape(n, n), float(dx), float(xs[-1]), dim=2)
        raise GridError(f"unrecognised CSV header {header}")


def make_grid(fn=None, half_extent=64.0, spacing=1.0 / 64, dim=1, tail_value=0.0) -> GridFunction:
    """Sample ``fn`` (or zeros) on the default ``L=64, dx=1/64`` grid."""
    if fn is None:
        fn = (lambda x: np.zeros_like(x)) if dim == 1 else (lambda x, y: np.zeros_like(x))
    return GridFunction.from_callable(fn, spacing, half_extent, dim, tail_value)


def _check_real(f: GridFunction):
    if f.is_complex:
        raise GridError("real-valued function required")
    if np.any(np.isnan(f.values)):
        raise GridError("NaN in samples")


def lp_norm(f: GridFunction, p: float) -> float:
    """Riemann-sum ``L^p`` norm ``(sum |f|^p dx^d)^(1/p)``."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    _check_real(f)
    a = np.abs(f.values)
    if a.max() == 0:
        return 0.0
    # scale out the max to avoid overflow for large p
    m = a.max()
    return float(m * (np.sum((a / m) ** p) * f.spacing ** f.dim) ** (1.0 / p))


def dual_spacing(n: int, spacing: float) -> float:
    return 2.0 * np.pi / (n * spacing)


def fourier(f: GridFunction) -> GridFunction:
    """Discrete approximation of the continuous transform on the dual grid."""
    if f.domain != "space":
        raise GridError("fourier expects a space-domain function")
    axes = tuple(range(f.dim))
    vals = f.values - f.tail_value
    F = sfft.fftshift(sfft.fftn(sfft.ifftshift(vals, axes=axes), axes=axes), axes=axes)
    F = F * f.spacing ** f.dim
    dxi = dual_spacing(f.n, f.spacing)
    return GridFunction(F, dxi, (f.n - 1) / 2 * dxi, f.dim, 0.0, "frequency")


def inverse_fourier(F: GridFunction, real: bool = True) -> GridFunction:
    if F.domain != "frequency":
        raise GridError("inverse_fourier expects a frequency-domain function")
    axes = tuple(range(F.dim))
    dx = dual_spacing(F.n, F.spacing)
    vals = sfft.fftshift(sfft.ifftn(sfft.ifftshift(F.values, axes=axes), axes=axes), axes=axes)
    vals = vals / dx ** F.dim
    if real:
        vals = vals.real
    return GridFunction(vals, dx, (F.n - 1) / 2 * dx, F.dim)


def frequencies(f: GridFunction) -> np.ndarray:
    """Dual-grid frequencies of a space-domain grid (1-D, centred order)."""
    return fourier(f.with_values(np.zeros_like(f.values, dtype=float))).x


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """``(f*g)(x) = int f(y) g(x-y) dy`` by zero-padded FFT.

    A nonzero ``tail_value`` on one operand is handled as
    ``(f - c)*g + c * int g``.
    """
    if not f.same_grid(g) or f.domain != "space":
        raise GridError("convolve requires identical space-domain grids")
    if f.tail_value and g.tail_value:
        raise GridError("at least one operand must decay")
    if g.tail_value:
        f, g = g, f
    c = f.tail_value
    a = f.values - c
    b = g.values
    n = f.n
    m = sfft.next_fast_len(2 * n - 1)
    axes = tuple(range(f.dim))
    shape = (m,) * f.dim
    A = sfft.fftn(a, s=shape, axes=axes)
    B = sfft.fftn(b, s=shape, axes=axes)
    full = sfft.ifftn(A * B, axes=axes)
    if not (np.iscomplexobj(a) or np.iscomplexobj(b)):
        full = full.real
    h = (n - 1) // 2
    sl = (slice(h, h + n),) * f.dim
    out = full[sl] * f.spacing ** f.dim
    tail = 0.0
    if c:
        tail = c * float(np.sum(b) * f.spacing ** f.dim)
        out = out + tail
    return f.with_values(out, tail_value=tail)


# ---------------------------------------------------------------------------
# time quadrature

# third-order Gregory end corrections for the trapezoid rule
_GREGORY = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Log-spaced nodes on ``[t_min, t_max]`` with trapezoid-in-log weights.

    The trapezoid rule in ``u = log t`` carries Gregory end corrections so the
    truncation at ``t_max`` (where integrands are often not yet negligible) is
    fourth-order accurate.
    """

    nodes: np.ndarray
    weights: np.ndarray
    t_min: float
    t_max: float

    def __post_init__(self):
        if np.any(np.diff(self.nodes) <= 0) or self.nodes[0] < self.t_min * (1 - 1e-12):
            raise GridError("nodes must increase inside [t_min, t_max]")
        if np.any(self.weights <= 0):
            raise GridError("weights must be positive")

    @classmethod
    def log_spaced(cls, t_min=1e-4, t_max=1e3, n=256) -> "TimeGrid":
        if not (0 < t_min < t_max) or n < 8:
            raise GridError("need 0 < t_min < t_max and n >= 8")
        u = np.linspace(np.log(t_min), np.log(t_max), n)
        h = u[1] - u[0]
        w = np.ones(n)
        w[:3] = _GREGORY
        w[-3:] = _GREGORY[::-1]
        t = np.exp(u)
        return cls(t, w * h * t, t_min, t_max)

    def integrate(self, values, axis=0):
        """``sum_j w_j g(t_j)`` along ``axis``."""
        v = np.moveaxis(np.asarray(values), axis, -1)
        return v @ self.weights

    def refined(self, factor: int = 3) -> "TimeGrid":
        return TimeGrid.log_spaced(self.t_min, self.t_max, (len(self.nodes) - 1) * factor + 1)

    def __len__(self):
        return len(self.nodes)


def default_timegrid() -> TimeGrid:
    return TimeGrid.log_spaced(1e-4, 1e3, 256)
