"""Convolution kernels with weakened tails: condition checks and certification.

A kernel is checked for cancelation over annuli, for the size and gradient
bounds with tail exponent ``d - 1 + alpha/2``, split as
``kappa = kappa_1 + kappa_2`` with a smooth radial cutoff, and the decay of
``(d/dt Q_t kappa_2)_{t=1} = kappa_2 * psi`` is measured against
``(1 + |x|)^{-lambda}``.  Operator norms ``||f * kappa||_p / ||f||_p`` are
measured on the fixtures.  All routines are 1-D.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sfft
from scipy import integrate, special
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve

from .density import StableParams, psi
from .grid import GridError, GridFunction, lp_norm

log = logging.getLogger(__name__)

CANCELATION_TOL = 1e-6
DEFAULT_RADII = ((1e-2, 1.0), (0.5, 2.0), (1.0, np.e), (1.0, 10.0), (2.0, 64.0))


class TailTooFat(ValueError):
    """Kernel tail decays slower than the admissible exponent."""


class PrincipalValueUndefined(ValueError):
    """Even singular kernel without cancelation."""


@dataclass(frozen=True)
class KernelSpec:
    evaluator: Callable
    symmetry: str = "none"  # "odd" | "even" | "none"
    claimed_tail: str = "weakened"  # "classical" | "weakened"
    name: str = "kernel"
    derivative: Callable | None = None
    # (c, s): kappa(y) ~ c sign(y) |y|^{-s} near 0 (odd kernels), used for the
    # endpoint correction of the principal-value sum
    singularity: tuple | None = None

    def __post_init__(self):
        if self.symmetry not in ("odd", "even", "none"):
            raise ValueError(f"unknown symmetry {self.symmetry!r}")
        if self.claimed_tail not in ("classical", "weakened"):
            raise ValueError(f"unknown tail class {self.claimed_tail!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x == 0):
            raise GridError("kernels are not evaluated at 0")
        return np.asarray(self.evaluator(x), dtype=float)

    def on_grid(self, spacing, half_extent) -> np.ndarray:
        """Samples at ``j * spacing``, ``|j| <= L/dx``, with 0 at the origin."""
        m = int(round(half_extent / spacing))
        x = np.arange(-m, m + 1) * spacing
        out = np.zeros(x.size)
        nz = x != 0
        if self.symmetry == "odd":
            pos = x > 0
            v = self(x[pos])
            out[pos] = v
            out[:m] = -v[::-1]
        elif self.symmetry == "even":
            pos = x > 0
            v = self(x[pos])
            out[pos] = v
            out[:m] = v[::-1]
        else:
            out[nz] = self(x[nz])
        return out

    def reflected(self) -> "KernelSpec":
        """``kappa*(x) = kappa(-x)``."""
        d = None if self.derivative is None else (lambda x, g=self.derivative: -g(-x))
        sing = None if self.singularity is None else (-self.singularity[0], self.singularity[1])
        return KernelSpec(lambda x, k=self.evaluator: k(-x), self.symmetry, self.claimed_tail,
                          self.name + "*", d, sing)


# ---------------------------------------------------------------------------
# registry


def _powmin(x, a, b, use_max=False):
    ax = np.abs(x)
    f = np.maximum if use_max else np.minimum
    return f(ax ** (-a), ax ** (-b))


def _powmin_deriv(x, a, b, use_max=False):
    """Derivative of ``sign(x) * min/max(|x|^-a, |x|^-b)`` (even function)."""
    ax = np.abs(x)
    inner = ax < 1
    # min picks the smaller exponent inside |x| < 1, the larger outside; max the reverse
    lo, hi = min(a, b), max(a, b)
    e = np.where(inner ^ use_max, lo, hi)
    return -e * ax ** (-e - 1)


def test_kernel(params: StableParams, weakened=False) -> KernelSpec:
    """``sign(x) min(|x|^{-1}, |x|^{-alpha/2})`` (``max`` when ``weakened``).

    The ``min`` form has the classical ``1/|x|`` tail and a mild
    ``|x|^{-alpha/2}`` singularity; the ``max`` form has the full ``1/|x|``
    singularity and the weakened ``|x|^{-alpha/2}`` tail.
    """
    b = params.alpha / 2
    name = "weakened" if weakened else "test"
    return KernelSpec(lambda x: np.sign(x) * _powmin(x, 1.0, b, weakened), "odd",
                      "weakened", name, lambda x: _powmin_deriv(x, 1.0, b, weakened),
                      (1.0, 1.0 if weakened else b))


def pv_inv_x() -> KernelSpec:
    return KernelSpec(lambda x: 1.0 / x, "odd", "classical", "pv_inv_x", lambda x: -1.0 / x ** 2, (1.0, 1.0))


def inv_abs() -> KernelSpec:
    return KernelSpec(lambda x: 1.0 / np.abs(x), "even", "classical", "inv_abs",
                      lambda x: -np.sign(x) / x ** 2)


def fat_tail(params: StableParams, excess=0.2) -> KernelSpec:
    """``sign(x) max(|x|^{-1}, |x|^{-(alpha/2 - excess)})``: the tail is too fat."""
    e = params.alpha / 2 - excess
    return KernelSpec(lambda x: np.sign(x) * _powmin(x, 1.0, e, True), "odd", "weakened", "fat_tail",
                      lambda x: _powmin_deriv(x, 1.0, e, True), (1.0, 1.0))


def kernel_from_csv(path, symmetry="odd", name=None) -> KernelSpec:
    """Tabulated kernel (``x,value`` CSV) interpolated by a cubic spline.

    For declared odd/even symmetry only the ``x > 0`` half of the table is
    used and the other half is generated exactly.
    """
    g = GridFunction.from_csv(path)
    x, v = g.x, np.asarray(g.values)
    if symmetry in ("odd", "even"):
        pos = x > 0
        cs = CubicSpline(x[pos], v[pos])
        s = -1.0 if symmetry == "odd" else 1.0

        def ev(y):
            y = np.asarray(y, dtype=float)
            out = cs(np.abs(y))
            return np.where(y > 0, out, s * out)
    else:
        nz = x != 0
        cs = CubicSpline(x[nz], v[nz])

        def ev(y):
            return cs(y)

    return KernelSpec(ev, symmetry, "weakened", name or str(path))


REGISTRY = {
    "test": lambda params: test_kernel(params),
    "weakened": lambda params: test_kernel(params, weakened=True),
    "pv_inv_x": lambda params: pv_inv_x(),
    "inv_abs": lambda params: inv_abs(),
    "fat_tail": lambda params: fat_tail(params),
}


def get_kernel(name: str, params: StableParams) -> KernelSpec:
    try:
        return REGISTRY[name](params)
    except KeyError:
        raise KeyError(f"unknown kernel {name!r}; known: {sorted(REGISTRY)}") from None


# ---------------------------------------------------------------------------
# conditions


def _log_quad(fn, r, R, per_panel=40):
    """``int_r^R fn`` by Gauss-Legendre panels in ``log x``."""
    npan = max(1, int(np.ceil(np.log(R / r) / 0.25)))
    u, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(np.log(r), np.log(R), npan + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * u + 0.5 * (a + b)
        x = np.exp(s)
        total += np.sum(0.5 * (b - a) * w * x * fn(x))
    return float(total)


def check_cancelation(kernel: KernelSpec, radii=DEFAULT_RADII) -> float:
    """``max |int_{r<|x|<R} kappa|`` over the annuli; odd kernels give exactly 0."""
    for r, R in radii:
        if not 0 < r < R:
            raise ValueError(f"need 0 < r < R, got ({r}, {R})")
    if kernel.symmetry == "odd":
        return 0.0
    return max(abs(_log_quad(lambda x: kernel(x) + kernel(-x), r, R)) for r, R in radii)


def growth_bounds(x, alpha, d=1):
    """Envelopes of the size and gradient conditions at ``x != 0``."""
    ax = np.abs(x)
    inner = ax <= 1
    size = np.where(inner, ax ** (-d), ax ** (-(d - 1 + alpha / 2)))
    grad = np.where(inner, ax ** (-(d + 1)), ax ** (-(d + alpha / 2)))
    return size, grad


def check_growth(kernel: KernelSpec, params: StableParams, spacing=1.0 / 64, half_extent=64.0) -> dict:
    """Smallest constants in the size (i) and gradient (ii) conditions on the grid.

    The gradient uses the analytic derivative when supplied, else centred
    differences; condition (ii) skips the ring ``|x| < 2 dx``.
    """
    params.require_1d()
    m = int(round(half_extent / spacing))
    x = np.arange(-m, m + 1) * spacing
    x = x[x != 0]
    size, grad = growth_bounds(x, params.alpha)
    c1 = float(np.max(np.abs(kernel(x)) / size))
    xs = x[np.abs(x) >= 2 * spacing - 1e-12]
    if kernel.derivative is not None:
        g = kernel.derivative(xs)
    else:
        g = (kernel(xs + spacing) - kernel(xs - spacing)) / (2 * spacing)
    c2 = float(np.max(np.abs(g) / growth_bounds(xs, params.alpha)[1]))
    return {"cond_i_const": c1, "cond_ii_const": c2}


def tail_exponent(kernel: KernelSpec, lo=16.0, hi=64.0) -> float:
    """Log-log slope of ``|kappa|`` on ``[lo, hi]`` (both signs averaged)."""
    x = np.geomspace(lo, hi, 64)
    a = 0.5 * (np.abs(kernel(x)) + np.abs(kernel(-x)))
    if np.all(a == 0):
        return np.inf
    if np.any(a == 0):
        return np.inf
    slope = np.polyfit(np.log(x), np.log(a), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# decomposition


def smooth_step(s):
    """C-infinity step: 0 for ``s <= 0``, 1 for ``s >= 1``, built from ``exp(-1/s)``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1 - s, 1.0)), 0.0)
    return a / (a + b)


def cutoff(r):
    """``phi(r)``: 1 for ``|r| <= 1``, 0 for ``|r| >= 2``."""
    return smooth_step(2 - np.abs(np.asarray(r, dtype=float)))


def decompose(kernel: KernelSpec):
    """``(kappa_1, kappa_2)`` with ``kappa_1 = kappa phi(|x|^2)``, ``kappa_2 = kappa - kappa_1``."""

    def k1(x):
        return kernel(x) * cutoff(x * x)

    def k2(x):
        v = kernel(x)
        return v - v * cutoff(x * x)

    return (KernelSpec(k1, kernel.symmetry, kernel.claimed_tail, kernel.name + "_1",
                       singularity=kernel.singularity),
            KernelSpec(k2, kernel.symmetry, kernel.claimed_tail, kernel.name + "_2"))


# ---------------------------------------------------------------------------
# decay of d/dt Q_t kappa_2 at t = 1


def _psi_samples(params, spacing, half_extent):
    return np.asarray(psi(params, spacing, half_extent).values)


def dtqt_values(k2: KernelSpec, params: StableParams, spacing=1.0 / 64, half_extent=64.0,
                reach=16, route="direct"):
    """``(kappa_2 * psi)(x)`` on ``[-L, L]``; kappa_2 is sampled on ``[-reach L, reach L]``.

    ``route="direct"`` is the Riemann-sum convolution against the spectral
    psi table; ``route="spectral"`` multiplies the transform of the samples
    by the exact symbol ``-|xi|^{a/2} exp(-|xi|^{a/2})``.
    """
    params.require_1d()
    Ly = reach * half_extent
    ky = k2.on_grid(spacing, Ly)
    mx = int(round(half_extent / spacing))
    if route == "direct":
        ps = _psi_samples(params, spacing, Ly + half_extent)
        return fftconvolve(ps, ky, mode="valid") * spacing
    if route == "spectral":
        my = (ky.size - 1) // 2
        n = sfft.next_fast_len(4 * ky.size)
        buf = np.zeros(n)
        buf[: my + 1] = ky[my:]
        buf[n - my:] = ky[:my]
        xi = 2 * np.pi * sfft.rfftfreq(n, spacing)
        a = xi ** params.half
        full = sfft.irfft(sfft.rfft(buf) * (-a * np.exp(-a)), n)
        return full[np.arange(-mx, mx + 1) % n]
    raise ValueError(f"unknown route {route!r}")


def _decay_const(v, spacing, lam):
    m = (v.size - 1) // 2
    x = np.arange(-m, m + 1) * spacing
    return float(np.max(np.abs(v) * (1 + np.abs(x)) ** lam))


def dtQt_kernel_bound(k2: KernelSpec, params: StableParams, lam=None, spacing=1.0 / 64,
                      half_extent=64.0, refine=True) -> dict:
    """Smallest C with ``|(kappa_2 * psi)(x)| <= C (1 + |x|)^{-lambda}`` on the grid.

    Raises :class:`TailTooFat` when the measured tail exponent of kappa_2 is
    below ``d - 1 + alpha/2``.  With ``refine`` the constant is recomputed
    with ``dx/2`` and with ``2L``; ``holds`` requires both moves < 5%.
    """
    params.require_1d()
    if not 1 < params.alpha < 2:
        raise ValueError("alpha must lie in (1, 2)")
    lam = 1 + (params.alpha - 1) / 2 if lam is None else float(lam)
    if not lam > 1:
        raise ValueError("lambda must exceed 1")
    need = params.alpha / 2
    e = tail_exponent(k2, half_extent / 4, half_extent)
    if e < need - 0.05:
        raise TailTooFat(f"{k2.name}: tail exponent {e:.3f} < {need:.3f} required")
    v = dtqt_values(k2, params, spacing, half_extent)
    C = _decay_const(v, spacing, lam)
    out = {"decay_const": C, "lambda": lam, "tail_exponent": e, "values": v}
    vs = dtqt_values(k2, params, spacing, half_extent, route="spectral")
    out["route_gap"] = float(np.max(np.abs(v - vs)))
    holds = np.isfinite(C)
    if refine:
        C_dx = _decay_const(dtqt_values(k2, params, spacing / 2, half_extent), spacing / 2, lam)
        C_L = _decay_const(dtqt_values(k2, params, spacing, 2 * half_extent), spacing, lam)
        drift = max(abs(C_dx - C), abs(C_L - C)) / C if C > 0 else 0.0
        out.update({"const_dx_half": C_dx, "const_L_double": C_L, "drift": float(drift)})
        holds = holds and drift < 0.05
    out["holds"] = bool(holds)
    return out


def tail_integrals(k2: KernelSpec, params: StableParams, xs=(2.0, 4.0, 8.0, 16.0), spacing=1.0 / 64,
                   reach_extent=1024.0) -> dict:
    """Split ``int kappa_2(y) psi(x - y) dy`` over ``|y| < |x|/2``, ``|y - x| < |x|/2``
    and the rest; returns ``{x: (I1, I2, I3)}``."""
    ky = k2.on_grid(spacing, reach_extent)
    m = (ky.size - 1) // 2
    y = np.arange(-m, m + 1) * spacing
    xmax = max(abs(x) for x in xs)
    ps = _psi_samples(params, spacing, reach_extent + xmax)
    mp_ = (ps.size - 1) // 2
    out = {}
    for x in xs:
        k = int(round(x / spacing))
        vals = ky * ps[mp_ + k - np.arange(-m, m + 1)] * spacing
        d1 = np.abs(y) < abs(x) / 2
        d2 = np.abs(y - x) < abs(x) / 2
        d3 = ~(d1 | d2)
        out[float(x)] = tuple(float(np.sum(vals[d])) for d in (d1, d2, d3))
    return out


# ---------------------------------------------------------------------------
# the operator


def apply_T(f: GridFunction, kernel: KernelSpec, spread=4) -> GridFunction:
    """Principal-value convolution ``f * kappa`` on an enlarged grid.

    The kernel sample at 0 is dropped and the remaining cells pair ``+-h``
    symmetrically.  That sum is the trapezoid rule for the paired integrand
    ``kappa(y) (f(x-y) - f(x+y))`` minus its endpoint term; when the kernel
    declares ``kappa ~ c sign(y) |y|^{-s}`` at 0 the endpoint term
    ``2 c zeta(s-1) dx^{2-s} f'(x)`` (generalised Euler-Maclaurin) is added
    back, which removes the O(dx^{2-s}) error.  The result lives on
    ``[-spread L, spread L]`` with the spacing of ``f`` (f extended by zero).
    """
    if f.dim != 1 or f.tail_value:
        raise GridError("apply_T needs a decaying 1-D function")
    if kernel.symmetry == "even" and check_cancelation(kernel, ((f.spacing, 1.0),)) > CANCELATION_TOL:
        raise PrincipalValueUndefined(f"{kernel.name}: even kernel without cancelation")
    dx, L = f.spacing, f.half_extent
    kv = kernel.on_grid(dx, (spread + 1) * L)
    full = fftconvolve(np.asarray(f.values, dtype=float), kv, mode="full") * dx
    m_out = int(round(spread * L / dx))
    c = (full.size - 1) // 2
    vals = full[c - m_out: c + m_out + 1]
    if kernel.symmetry == "odd" and kernel.singularity is not None:
        cs, s = kernel.singularity
        fp = np.zeros_like(vals)
        m = (f.n - 1) // 2
        fp[m_out - m: m_out + m + 1] = np.gradient(np.asarray(f.values, dtype=float), dx)
        vals = vals + 2 * cs * special.zeta(s - 1) * dx ** (2 - s) * fp
    return GridFunction(vals, dx, spread * L)


def norm_ratio(f: GridFunction, kernel: KernelSpec, p: float, spread=4) -> float:
    """``||T f||_p / ||f||_p``; beyond the output grid ``T f ~ (int f) kappa`` is added."""
    tf = apply_T(f, kernel, spread)
    body = lp_norm(tf, p) ** p
    mass = float(np.sum(f.values) * f.spacing)
    R = tf.half_extent
    if mass != 0:
        tail = 0.0
        for s in (1, -1):
            val, _ = integrate.quad(lambda y: abs(mass * kernel(s * y)) ** p, R, np.inf, limit=200)
            tail += val
        body += tail
    return float(body ** (1 / p) / lp_norm(f, p))


# ---------------------------------------------------------------------------
# certification


@dataclass
class CertificationReport:
    kernel: str
    cancelation_max: float
    cond_i_const: float
    cond_ii_const: float
    lambda_used: float
    decay_const: float | None
    norm_ratios: dict
    verdict: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "cancelation_max": self.cancelation_max,
            "cond_i_const": self.cond_i_const,
            "cond_ii_const": self.cond_ii_const,
            "lambda_used": self.lambda_used,
            "decay_const": self.decay_const,
            "norm_ratios": {f"p={p},{fx}": v for (p, fx), v in sorted(self.norm_ratios.items())},
            "verdict": self.verdict,
            "diagnostics": self.diagnostics,
        }


def certify(kernel: KernelSpec, params: StableParams, fixtures: dict, p_list=(1.5, 2.0, 3.0),
            lam=None, growth_cap=1e6) -> CertificationReport:
    """Run every check and classify the kernel.

    ``fixtures`` maps names to GridFunctions.  Verdicts: ``violated`` when
    cancelation or the growth conditions fail, ``inconclusive`` when the
    decay bound cannot be established (tail gate, refinement drift) or the
    norm ratios spread by 10x or more, ``certified`` otherwise.
    """
    lam = 1 + (params.alpha - 1) / 2 if lam is None else float(lam)
    canc = check_cancelation(kernel)
    growth = check_growth(kernel, params)
    diag: dict = {}
    rep = CertificationReport(kernel.name, canc, growth["cond_i_const"], growth["cond_ii_const"],
                              lam, None, {}, "inconclusive", diag)
    if canc > CANCELATION_TOL:
        rep.verdict = "violated"
        diag["reason"] = f"cancelation {canc:.3g} > {CANCELATION_TOL}"
        return rep
    if not (growth["cond_i_const"] < growth_cap and growth["cond_ii_const"] < growth_cap):
        rep.verdict = "violated"
        diag["reason"] = "growth constants unbounded"
        return rep
    _, k2 = decompose(kernel)
    try:
        bound = dtQt_kernel_bound(k2, params, lam)
    except TailTooFat as exc:
        diag["reason"] = str(exc)
        return rep
    rep.decay_const = bound["decay_const"]
    diag.update({k: v for k, v in bound.items() if k != "values"})
    for fname, f in fixtures.items():
        for p in p_list:
            rep.norm_ratios[(float(p), fname)] = norm_ratio(f, kernel, p)
    vals = np.array(list(rep.norm_ratios.values()))
    spread = float(vals.max() / vals.min()) if vals.size else 1.0
    diag["ratio_spread"] = spread
    log.info("%s: norm ratio spread %.3g", kernel.name, spread)
    if not bound["holds"]:
        diag["reason"] = "decay bound not refinement-stable"
    elif not (np.all(np.isfinite(vals)) and spread < 10):
        diag["reason"] = f"norm ratios spread {spread:.3g}"
    else:
        rep.verdict = "certified"
    return rep
