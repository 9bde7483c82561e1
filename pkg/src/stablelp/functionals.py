"""Littlewood-Paley type functionals of the extension f_t = Q_t f (d = 1).

All square functions are accumulated in a single sweep over the TimeGrid.
At each node the jump energies

    Gamma_r(g)(x) = int_{|h|<r} (g(x+h) - g(x))^2 |h|^{-1-alpha} dh,  r = t^{2/alpha}

are computed for every x at once from ``L_r[g^2] - 2 g L_r[g]`` with the
truncated-jump symbol of :mod:`stablelp.symbols`.  Spatial averages (cone
boxes, the kernels K_t^lambda and Q_t) are discrete circular convolutions on
the padded periodic domain; kernels are periodised so windows wider than the
domain remain exact for periodic inputs.

:func:`gamma_alpha` and :func:`gamma_full` evaluate the same energies
pointwise by direct h-quadrature and serve as an independent route.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline
from scipy.ndimage import maximum_filter1d

from .density import QuadratureError, StableParams, stable_law
from .extension import DEFAULT_PAD, ExtensionField
from .grid import GridError, GridFunction, TimeGrid, default_timegrid, lp_norm
from .symbols import truncated_multiplier

log = logging.getLogger(__name__)

SQUARE_FUNCTIONS = ("g_up", "g_arrow_alpha", "g_arrow", "g_alpha", "g_full",
                    "area", "g_star", "g_star_up", "g_star_arrow", "l_star")
MAXIMAL = ("n_alpha",)


def lambda_zero(params: StableParams) -> float:
    """Threshold ``(2d + alpha) / (2d)`` above which G*_lambda is controlled."""
    return (2 * params.dim + params.alpha) / (2 * params.dim)


@dataclass(frozen=True)
class LambdaKernel:
    """``K_t^lambda(x) = t^{-d/beta} (t^{1/beta} / (t^{1/beta} + |x|))^{d lambda}``, beta = alpha/2."""

    lam: float
    t: float
    alpha: float
    dim: int = 1

    @property
    def radius(self) -> float:
        return self.t ** (2.0 / self.alpha)

    def __call__(self, x):
        r = self.radius
        return r ** (-self.dim) * (r / (r + np.abs(x))) ** (self.dim * self.lam)

    def l1_norm(self) -> float:
        """Quadrature of ``||K_t^lambda||_1`` (d = 1)."""
        if self.dim != 1:
            raise NotImplementedError("d = 1 only")
        r = self.radius
        a, _ = integrate.quad(self, 0, r, epsabs=0, epsrel=1e-13)
        b, _ = integrate.quad(self, r, np.inf, epsabs=0, epsrel=1e-13, limit=400)
        return 2 * (a + b)

    def l1_exact(self) -> float:
        if self.lam <= 1:
            return np.inf
        return 2.0 / (self.lam - 1)


@dataclass
class FunctionalReport:
    """Values of one functional on the original grid plus its norms.

    ``p_norms`` are Riemann sums over the whole padded domain (the functional
    of a compactly supported f need not vanish off the grid).
    """

    name: str
    params: StableParams
    values: GridFunction
    p_norms: dict
    lam: float | None = None
    full: np.ndarray | None = field(default=None, repr=False)
    extras: dict = field(default_factory=dict)

    def norm(self, p: float) -> float:
        if p not in self.p_norms:
            self.p_norms[p] = _padded_norm(self.full, self.values.spacing, p)
        return self.p_norms[p]


def _padded_norm(full, dx, p):
    a = np.abs(full)
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * (np.sum((a / m) ** p) * dx) ** (1.0 / p))


# ---------------------------------------------------------------------------
# periodised averaging kernels on the padded domain


def _cell_overlap(x, dx, lo, hi):
    """Length of ``[x - dx/2, x + dx/2] & [lo, hi]``."""
    return np.clip(np.minimum(x + dx / 2, hi) - np.maximum(x - dx / 2, lo), 0.0, None)


def box_weights(x, dx, radius, period):
    """Cell-overlap weights of the periodised indicator of ``|y| < radius``.

    ``sum_j w_j g(x - y_j)`` is the discrete analogue of ``int_{|y|<r} g``.
    """
    if radius >= 50 * period:
        return np.full_like(x, 2 * radius / period * dx)
    k = int(np.ceil((radius + dx) / period)) + 1
    w = np.zeros_like(x)
    for j in range(-k, k + 1):
        w += _cell_overlap(x + j * period, dx, -radius, radius)
    return w


def lambda_weights(x, dx, lam, t, alpha, period):
    """Periodised ``K_t^lambda`` sampled at ``x`` (|x| <= period/2), times dx."""
    r = t ** (2.0 / alpha)
    out = (r / (r + np.abs(x))) ** lam
    # images k != 0: sum_{k>=1} (r + kP +- x)^{-lam} via Hurwitz zeta.  The sum
    # is analytic on |x| <= P/2 (singularities at distance >= P/2), so it is
    # sampled coarsely and splined.
    xs = np.linspace(-period / 2, period / 2, 1025)
    img = special.zeta(lam, 1 + (r + xs) / period) + special.zeta(lam, 1 + (r - xs) / period)
    out = out + (r / period) ** lam * CubicSpline(xs, img)(x)
    return out * dx / r


# ---------------------------------------------------------------------------
# the sweep


class LPFunctionals:
    """Single-pass computation of the square and maximal functionals of f.

    Parameters
    ----------
    f : GridFunction
        1-D input on a uniform grid.
    params : StableParams
        ``alpha`` in (0, 2).
    lam : float, optional
        Exponent of the G*_lambda functionals (default ``lambda_0 + 0.25``).
    names : iterable of str
        Subset of :data:`SQUARE_FUNCTIONS` and :data:`MAXIMAL` to compute.
    """

    def __init__(self, f: GridFunction, params: StableParams, names=SQUARE_FUNCTIONS, lam=None,
                 tgrid: TimeGrid | None = None, pad: int = DEFAULT_PAD, boundary: str = "decay"):
        params.require_1d()
        if not 0 < params.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        unknown = set(names) - set(SQUARE_FUNCTIONS) - set(MAXIMAL)
        if unknown:
            raise ValueError(f"unknown functionals {sorted(unknown)}")
        self.f = f
        self.params = params
        self.names = tuple(names)
        self.lam = lambda_zero(params) + 0.25 if lam is None else float(lam)
        self.tgrid = tgrid or default_timegrid()
        self.field = ExtensionField(f, params, self.tgrid, pad=pad, boundary=boundary)
        self.sp = self.field.spectrum
        self._reports: dict = {}

    # -- per-t energies ---------------------------------------------------

    def _square_hat(self, g):
        """Spectrum of ``g^2`` on the grid of spacing dx/2.

        ``g^2`` has twice the bandwidth of ``g``; squaring on the coarse grid
        would fold the upper half back and break ``Gamma >= 0`` near jumps.
        """
        sp = self.sp
        n = sp.n
        gh = sp.fwd(g)
        pad = np.zeros(n + 1, dtype=complex)
        pad[: gh.size] = gh
        if n % 2 == 0:
            pad[n // 2] *= 0.5
        fine = np.fft.irfft(pad, 2 * n) * 2
        return np.fft.rfft(fine * fine)

    def _xi_fine(self):
        if not hasattr(self, "_xif"):
            self._xif = 2 * np.pi * np.fft.rfftfreq(2 * self.sp.n, self.sp.dx / 2)
        return self._xif

    def _gamma(self, g, radius, g2hat=None):
        """Jump energy of ``g`` truncated at ``radius`` (``inf`` for the full one)."""
        sp = self.sp
        m = truncated_multiplier(sp.absxi, self.params.alpha, radius)
        mf = truncated_multiplier(self._xi_fine(), self.params.alpha, radius)
        if g2hat is None:
            g2hat = self._square_hat(g)
        lg2 = np.fft.irfft(mf * g2hat, 2 * sp.n)[::2]
        lg = sp.inv(m * sp.fwd(g))
        return lg2 - 2 * g * lg

    def gamma_slice(self, t: float, full_range=False) -> np.ndarray:
        """Energy at height t on the padded domain (truncated unless ``full_range``)."""
        g = self.field.full_slice(t)
        r = np.inf if full_range else t ** (2.0 / self.params.alpha)
        return self._gamma(g, r)

    # -- accumulation -----------------------------------------------------

    def run(self) -> dict:
        names = set(self.names)
        sq = names & set(SQUARE_FUNCTIONS)
        sp = self.sp
        dx = sp.dx
        alpha = self.params.alpha
        xf = sp.x_full
        n = sp.n
        acc = {k: np.zeros(n) for k in sq}
        need_trunc = bool(sq & {"g_arrow_alpha", "g_alpha", "area", "g_star", "g_star_arrow", "l_star"})
        need_full = bool(sq & {"g_arrow", "g_full"})
        need_d = bool(sq & {"g_up", "g_alpha", "g_full", "g_star", "g_star_up"})
        need_star = bool(sq & {"g_star", "g_star_up", "g_star_arrow"})
        a = self.field._a
        min_gamma = max_gamma = 0.0
        for t, w in zip(self.tgrid.nodes, self.tgrid.weights):
            r = t ** (2.0 / alpha)
            g = self.field.full_slice(t)
            g2hat = self._square_hat(g) if (need_trunc or need_full) else None
            if need_d:
                dg2 = self.field.full_dslice(t) ** 2
            if need_trunc:
                gam = self._gamma(g, r, g2hat)
                min_gamma, max_gamma = min(min_gamma, float(gam.min())), max(max_gamma, float(gam.max()))
                np.maximum(gam, 0.0, out=gam)
            if need_full:
                gfull = self._gamma(g, np.inf, g2hat)
                min_gamma, max_gamma = min(min_gamma, float(gfull.min())), max(max_gamma, float(gfull.max()))
                np.maximum(gfull, 0.0, out=gfull)
            wt = w * t
            if "g_up" in sq:
                acc["g_up"] += wt * dg2
            if "g_arrow_alpha" in sq:
                acc["g_arrow_alpha"] += wt * gam
            if "g_alpha" in sq:
                acc["g_alpha"] += wt * (gam + dg2)
            if "g_arrow" in sq:
                acc["g_arrow"] += wt * gfull
            if "g_full" in sq:
                acc["g_full"] += wt * (gfull + dg2)
            if need_trunc and sq & {"area", "g_star", "g_star_arrow", "l_star"}:
                gh = sp.fwd(gam)
            if "area" in sq:
                bw = sp.fwd(box_weights(xf, dx, r, sp.period))
                acc["area"] += w * t ** (1 - 2.0 / alpha) * sp.inv(bw * gh)
            if need_star:
                kw = sp.fwd(lambda_weights(xf, dx, self.lam, t, alpha, sp.period))
                up = sp.inv(kw * sp.fwd(dg2)) if sq & {"g_star", "g_star_up"} else 0.0
                arr = sp.inv(kw * gh) if sq & {"g_star", "g_star_arrow"} else 0.0
                if "g_star_up" in sq:
                    acc["g_star_up"] += wt * up
                if "g_star_arrow" in sq:
                    acc["g_star_arrow"] += wt * arr
                if "g_star" in sq:
                    acc["g_star"] += wt * (up + arr)
            if "l_star" in sq:
                acc["l_star"] += wt * sp.inv(np.exp(-t * a) * gh)
        min_gamma /= max(max_gamma, 1e-300)
        if min_gamma < -1e-6:
            log.warning("jump energy dipped to %.3g of the largest energy before clipping", min_gamma)
        for k, v in acc.items():
            np.maximum(v, 0.0, out=v)
            full = np.sqrt(v)
            lam = self.lam if k.startswith("g_star") else None
            rep = FunctionalReport(k, self.params, sp.to_grid(full), {}, lam, full,
                                   {"min_energy_rel": min_gamma})
            for p in (2.0,):
                rep.norm(p)
            self._reports[k] = rep
        if "g_up" in sq:
            self._reports["g_up"].extras["t_tail_l2"] = self.g_up_tail()
        if "n_alpha" in names:
            self._reports["n_alpha"] = self.n_alpha()
        return self._reports

    def g_up_tail(self) -> float:
        """Relative share of ``||G_up f||_2^2`` lying outside ``[t_min, t_max]``.

        Exact mode by mode: ``int t a^2 e^{-2ta} dt`` is elementary.
        """
        a = self.field._a
        pos = a > 0
        a = a[pos]
        p2 = (self.sp.mode_weight * np.abs(self.sp.fhat) ** 2)[pos]
        tmin, tmax = self.tgrid.t_min, self.tgrid.t_max
        total = p2.sum() / 4
        if total == 0:
            return 0.0
        hi = np.sum(p2 * np.exp(-2 * tmax * a) * (2 * tmax * a + 1)) / 4
        lo = np.sum(p2 * (1 - np.exp(-2 * tmin * a) * (2 * tmin * a + 1))) / 4
        return float((hi + lo) / total)

    # -- maximal function -------------------------------------------------

    def n_alpha(self, tgrid: TimeGrid | None = None, check_refinement=True, strict=True) -> FunctionalReport:
        """``sup_t sup_{|y|<t^{2/alpha}} |f_t(x - y)|`` on the original grid.

        Each window covers the grid points strictly inside plus the two exact
        edges ``x +- r`` (linear interpolation), so the sampled supremum is
        continuous in t.  The sweep is repeated on a 3x refined TimeGrid and
        the relative move is reported as ``refinement_change``.
        """
        tg = tgrid or self.tgrid
        out = self._n_alpha_sweep(tg)
        extras = {}
        if check_refinement:
            fine = self._n_alpha_sweep(tg.refined(3))
            moved = float(np.max(np.abs(fine - out)) / max(np.max(fine), 1e-300))
            extras["refinement_change"] = moved
            if moved > 1e-3:
                if strict:
                    raise QuadratureError(f"N_alpha sup moved by {moved:.2g} under t-refinement")
                log.warning("N_alpha moved by %.2g under t-refinement", moved)
            out = fine
        grid = self.f.with_values(out, tail_value=abs(self.f.tail_value))
        return FunctionalReport("n_alpha", self.params, grid, {2.0: lp_norm(grid, 2.0)}, None, out, extras)

    def _n_alpha_sweep(self, tg):
        sp = self.sp
        a = self.field._a
        tail = self.f.tail_value
        m = sp.m
        n = sp.n
        own = np.arange(-m, m + 1)
        # t -> 0 limit of the approach region is |f| itself
        best = np.abs(np.asarray(self.f.values, dtype=float))
        for t in tg.nodes:
            r = t ** (2.0 / self.params.alpha)
            v = np.abs(sp.apply(np.exp(-t * a)) + tail)
            if 2 * r >= sp.period:
                np.maximum(best, v.max(), out=best)
                continue
            q = r / sp.dx
            k = int(np.ceil(q - 1e-9)) - 1
            th = q - k
            # points strictly inside: offsets -k..k
            if k > 0:
                seg = v[np.arange(-m - k, m + k + 1) % n]
                mx = maximum_filter1d(seg, size=2 * k + 1)[k:k + 2 * m + 1]
            else:
                mx = v[own % n]
            # exact edges x +- r
            for s in (1, -1):
                lo = v[(own + s * k) % n]
                hi = v[(own + s * (k + 1)) % n]
                np.maximum(mx, (1 - th) * lo + th * hi, out=mx)
            np.maximum(best, mx, out=best)
        return best


def kernel_comparability(params: StableParams, lam=None) -> dict:
    """``sup_x K_t^lambda(x) / q_t(x)`` (t-independent by scaling; d = 1).

    At ``lambda_0`` both kernels decay like ``|x|^{-1-alpha/2}`` and the
    supremum is finite; it is approached either near 0 or at infinity.
    """
    params.require_1d()
    lam = lambda_zero(params) if lam is None else lam
    law = stable_law(params.half)
    u = np.concatenate([[0.0], np.geomspace(1e-4, 1e8, 4000)])
    ratio = (1 + u) ** (-lam) / law.pdf(u)
    # large-u limit of the ratio from the leading tail coefficient
    c1, _ = law.terms[0]
    limit = 1.0 / c1 if np.isclose(lam, 1 + params.half) else (0.0 if lam > 1 + params.half else np.inf)
    i = int(np.argmax(ratio))
    return {"c": float(max(ratio[i], limit)), "argmax": float(u[i]), "limit": float(limit), "lam": float(lam)}


# ---------------------------------------------------------------------------
# public one-shot helpers


def compute_functionals(f, params, names=SQUARE_FUNCTIONS, lam=None, **kw) -> dict:
    """Reports for several functionals from one sweep over t."""
    return LPFunctionals(f, params, names, lam, **kw).run()


def _one(name, f, params, lam=None, **kw) -> FunctionalReport:
    return compute_functionals(f, params, (name,), lam, **kw)[name]


def g_up(f, params, **kw):
    return _one("g_up", f, params, **kw)


def g_arrow_alpha(f, params, **kw):
    return _one("g_arrow_alpha", f, params, **kw)


def g_arrow(f, params, **kw):
    return _one("g_arrow", f, params, **kw)


def g_alpha(f, params, **kw):
    return _one("g_alpha", f, params, **kw)


def g_full(f, params, **kw):
    return _one("g_full", f, params, **kw)


def area_functional(f, params, **kw):
    return _one("area", f, params, **kw)


def g_star(f, params, lam, **kw):
    """``G*_lambda`` with its two components in ``extras``."""
    reps = compute_functionals(f, params, ("g_star", "g_star_up", "g_star_arrow"), lam, **kw)
    rep = reps["g_star"]
    rep.extras["up"] = reps["g_star_up"]
    rep.extras["arrow"] = reps["g_star_arrow"]
    return rep


def l_star(f, params, **kw):
    return _one("l_star", f, params, **kw)


def n_alpha_maximal(f, params, **kw):
    return _one("n_alpha", f, params, **kw)


def hl_maximal(f: GridFunction, radii=None) -> FunctionalReport:
    """Centred Hardy-Littlewood maximal function over a finite radius menu.

    ``|f|`` is extended by zero (or its tail constant) beyond the grid;
    window averages use the trapezoid rule, exact for grid-multiple radii.
    """
    if f.dim != 1:
        raise GridError("1-D only")
    dx = f.spacing
    n = f.n
    if radii is None:
        small = np.arange(1, 65)
        big = np.unique(np.round(np.geomspace(64, 4 * (n - 1), 80)).astype(int))
        ks = np.unique(np.concatenate([small, big]))
    else:
        ks = np.unique(np.maximum(np.round(np.asarray(radii) / dx).astype(int), 1))
    kmax = int(ks.max())
    a = np.abs(f.values)
    tail = abs(f.tail_value)
    ext = np.concatenate([np.full(kmax, tail), a, np.full(kmax, tail)])
    # cumulative trapezoid integral, C[i] = int_{x_0}^{x_i}
    c = np.concatenate([[0.0], np.cumsum((ext[1:] + ext[:-1]) / 2) * dx])
    idx = np.arange(n) + kmax
    best = a.copy()
    for k in ks:
        avg = (c[idx + k] - c[idx - k]) / (2 * k * dx)
        np.maximum(best, avg, out=best)
    grid = f.with_values(best, tail_value=tail)
    return FunctionalReport("hl_max", None, grid, {2.0: lp_norm(grid, 2.0)}, None, best,
                            {"radii": ks * dx})


def hl_ratio(f: GridFunction, params: StableParams, rel_floor=1e-6, **kw) -> dict:
    """``max_x N_alpha f(x) / M f(x)`` over the grid where ``M f`` is not negligible."""
    n = n_alpha_maximal(f, params, **kw).values.values
    m = hl_maximal(f).values.values
    mask = m > rel_floor * m.max()
    ratio = n[mask] / m[mask]
    return {"c": float(ratio.max()), "argmax": float(f.x[mask][np.argmax(ratio)])}


# ---------------------------------------------------------------------------
# pointwise route


def _offgrid(field: ExtensionField, t: float, derivative=False):
    sp = field.spectrum
    full = field.full_dslice(t) if derivative else field.full_slice(t)
    idx = np.arange(-sp.n // 2 + 1, sp.n // 2)
    xs = idx * sp.dx
    return CubicSpline(xs, full[idx % sp.n] + (0 if derivative else field.base.tail_value)), xs[-1]


def _h_energy(spline, x, hmax, alpha, reach, n_nodes=800, h_min=1e-4):
    """``int_{|h|<hmax} (g(x+h) - g(x))^2 |h|^{-1-alpha} dh`` on a log h-grid.

    Below ``h_min`` the integrand is replaced by ``g'(x)^2 |h|^{1-alpha}``.
    """
    h0 = h_min
    if hmax <= h0:
        return float(spline(x, 1) ** 2 * 2 * hmax ** (2 - alpha) / (2 - alpha))
    if abs(x) + hmax > reach:
        raise GridError("stencil leaves the computational domain")
    gx = spline(x)
    lo, hi = np.log(h0), np.log(hmax)
    # split the log range in panels so kinks of g are resolved
    npan = max(1, int(np.ceil((hi - lo) / 0.5)))
    edges = np.linspace(lo, hi, npan + 1)
    total = 0.0
    k = max(16, n_nodes // npan)
    uu, ww = np.polynomial.legendre.leggauss(k)
    for a0, b0 in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b0 - a0) * uu + 0.5 * (a0 + b0)
        h = np.exp(s)
        wgt = 0.5 * (b0 - a0) * ww * h ** (-alpha)
        total += np.sum(wgt * ((spline(x + h) - gx) ** 2 + (spline(x - h) - gx) ** 2))
    total += spline(x, 1) ** 2 * 2 * h0 ** (2 - alpha) / (2 - alpha)
    return float(total)


def gamma_alpha(field: ExtensionField, t: float, x: float, h_min=1e-4) -> float:
    """Truncated jump energy of ``f_t`` at x by direct h-quadrature."""
    spline, reach = _offgrid(field, t)
    return _h_energy(spline, x, t ** (2.0 / field.params.alpha), field.params.alpha, reach, h_min=h_min)


def gamma_full(field: ExtensionField, t: float, x: float, h_min=1e-4) -> dict:
    """Untruncated energy; jumps beyond the domain are bounded, not computed.

    Returns ``{"value", "error_bar"}`` where the bar is
    ``4 sup|f_t|^2 * 2 R^{-alpha} / alpha`` for the omitted ``|h| > R``.
    """
    spline, reach = _offgrid(field, t)
    alpha = field.params.alpha
    R = reach - abs(x)
    val = _h_energy(spline, x, R, alpha, reach + 1e-9, h_min=h_min)
    sup = float(np.max(np.abs(field.full_slice(t) + field.base.tail_value)))
    return {"value": val, "error_bar": 4 * sup ** 2 * 2 * R ** (-alpha) / alpha}
