"""Monte Carlo for the product process X_s = (Y_s, Z_s) killed when Z hits 0.

Y is a symmetric alpha-stable process (characteristic function
``exp(-s|xi|^alpha)``) and Z a Brownian motion with generator ``d^2/dz^2``
(increments N(0, 2 dt)), independent of Y.  The hitting time T0 of 0 by Z has
the law ``mu_a`` and ``Y_{T0}`` has density ``q_a(. - x)``.

Z is stepped with step ``dt`` near the boundary and with larger steps far
from it.  A crossing inside a step is detected with the Brownian-bridge
probability ``exp(-z0 z1 / h)``, so missed excursions below 0 do not bias the
hitting law.  Because Y is independent of Z it is only sampled at the times
that are reported (snapshot times and T0), by independent increments.

Paths are simulated in fixed-size blocks; block ``b`` draws from
``SeedSequence(seed, spawn_key=(b,))`` so results do not depend on how blocks
are scheduled over workers.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.interpolate import RegularGridInterpolator

from .density import ExitLaw, StableParams, stable_law
from .extension import ExtensionField
from .grid import GridFunction

log = logging.getLogger(__name__)

BLOCK = 8192


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    dt: float = 1e-3
    seed: int = 20240601
    worker_count: int = 1
    s_max: float = 1e5
    z_fine: float = 2.0
    coarse_factor: float = 8.0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class PathRecord:
    start: tuple
    dt: float
    y_samples: np.ndarray  # Y at min(s_k, T0) for the snapshot times
    z_samples: np.ndarray  # Z at min(s_k, T0); first entry is the start height
    t0: float
    y_at_t0: float
    censored: bool = False


@dataclass
class PathBatch:
    """Struct-of-arrays result of :func:`run_paths`."""

    start: tuple
    dt: float
    times: np.ndarray
    t0: np.ndarray
    y_at_t0: np.ndarray
    y_at: np.ndarray  # shape (n, len(times))
    z_at: np.ndarray
    green: np.ndarray | None
    censored: np.ndarray
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return self.t0.size

    def __getitem__(self, i) -> PathRecord:
        a = self.start[1]
        return PathRecord(self.start, self.dt, self.y_at[i].copy(),
                          np.concatenate([[a], self.z_at[i]]), float(self.t0[i]),
                          float(self.y_at_t0[i]), bool(self.censored[i]))

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())


# ---------------------------------------------------------------------------
# variates


def _cms(alpha, rng, size):
    """Chambers-Mallows-Stuck, symmetric case, characteristic function exp(-|xi|^alpha)."""
    v = rng.uniform(-np.pi / 2, np.pi / 2, size)
    if alpha == 1.0:
        return np.tan(v)
    w = rng.standard_exponential(size)
    return (np.sin(alpha * v) / np.cos(v) ** (1 / alpha)
            * (np.cos(v - alpha * v) / w) ** ((1 - alpha) / alpha))


def sample_stable(params: StableParams, n: int, seed) -> np.ndarray:
    """``n`` standard symmetric alpha-stable variates."""
    if not 0 < params.alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    rng = np.random.default_rng(seed)
    return _cms(params.alpha, rng, n)


def empirical_cf(samples, xi) -> np.ndarray:
    return np.array([np.mean(np.cos(k * samples)) for k in np.atleast_1d(xi)])


# ---------------------------------------------------------------------------
# path simulation


def _block_rng(seed, b):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))


def _simulate_block(params, cfg: McConfig, start, n, rng, times, green_f, green_top):
    x, a = start
    z = np.full(n, float(a))
    s = np.zeros(n)
    t0 = np.full(n, np.nan)
    alive = np.ones(n, dtype=bool)
    z_at = np.zeros((n, times.size))
    green = np.zeros(n) if green_f is not None else None
    z_fine = max(cfg.z_fine, green_top) if green_f is not None else cfg.z_fine
    idx = np.arange(n)
    # snapshots at s = 0 are the start height; avoids zero-length steps
    n0 = int(np.sum(times <= 0))
    z_at[:, :n0] = a
    snap = np.full(n, n0)  # next snapshot index per path
    while idx.size:
        zi, si = z[idx], s[idx]
        h = np.where(zi <= z_fine, cfg.dt, np.maximum(cfg.dt, ((zi - z_fine) / cfg.coarse_factor) ** 2))
        # land exactly on snapshot times and on s_max
        if times.size:
            nxt = np.where(snap[idx] < times.size, times[np.minimum(snap[idx], times.size - 1)], np.inf)
        else:
            nxt = np.inf
        h = np.minimum(h, np.minimum(nxt, cfg.s_max) - si)
        z1 = zi + np.sqrt(2 * h) * rng.standard_normal(idx.size)
        u = rng.random(idx.size)
        with np.errstate(over="ignore"):
            bridge = np.exp(-np.maximum(zi * z1, 0.0) / h)
        cross = (z1 <= 0) | (u < bridge)
        # crossing time: linear interpolation when z1 <= 0, else mid-step
        frac = np.where(z1 <= 0, zi / np.where(z1 <= 0, zi - z1, 1.0), 0.5)
        tc = si + frac * h
        if green is not None:
            step = np.where(cross, tc - si, h)
            green[idx] += green_f(zi) * step
        ci = idx[cross]
        t0[ci] = tc[cross]
        alive[ci] = False
        keep = ~cross
        ki = idx[keep]
        z[ki] = z1[keep]
        s[ki] = si[keep] + h[keep]
        # snapshots reached this step
        hit = ki[(snap[ki] < times.size)]
        if hit.size:
            on = np.abs(s[hit] - times[snap[hit]]) <= 1e-12 * np.maximum(1.0, times[snap[hit]])
            for i in hit[on]:
                while snap[i] < times.size and s[i] >= times[snap[i]] * (1 - 1e-12):
                    z_at[i, snap[i]] = z[i]
                    snap[i] += 1
        # censoring at s_max: complete T0 exactly from the current height
        over = ki[s[ki] >= cfg.s_max * (1 - 1e-12)]
        if over.size:
            g = rng.standard_normal(over.size)
            t0[over] = s[over] + z[over] ** 2 / (2 * g * g)
            alive[over] = False
        idx = idx[alive[idx]]
    censored = t0 > cfg.s_max
    # snapshots after T0 see Z = 0
    after = times[None, :] >= t0[:, None]
    z_at[after] = 0.0
    # Y at min(times, T0) then at T0, by independent increments
    tau = np.minimum(times[None, :], t0[:, None])
    grid = np.concatenate([np.zeros((n, 1)), tau, t0[:, None]], axis=1)
    inc = np.diff(grid, axis=1)
    jumps = inc ** (1 / params.alpha) * _cms(params.alpha, rng, inc.shape)
    ypath = x + np.cumsum(jumps, axis=1)
    return t0, ypath[:, -1], ypath[:, :-1], z_at, green, censored


def run_paths(params: StableParams, config: McConfig, start=(0.0, 1.0), times=(),
              green_f=None, green_top=1.0) -> PathBatch:
    """Simulate ``config.n_paths`` paths from ``start = (x, a)``.

    ``times`` are snapshot times s at which ``(Y, Z)_{s ^ T0}`` is stored;
    ``green_f`` (vectorised, supported in ``(0, green_top]``) is integrated
    along each path up to T0 by the left rectangle rule.
    """
    x, a = start
    if not a > 0:
        raise ValueError("start height must be positive")
    if not 0 < params.alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    times = np.sort(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("snapshot times must be >= 0")
    nb = -(-config.n_paths // BLOCK)
    sizes = [min(BLOCK, config.n_paths - b * BLOCK) for b in range(nb)]

    def job(b):
        return _simulate_block(params, config, (x, a), sizes[b], _block_rng(config.seed, b),
                               times, green_f, green_top)

    if config.worker_count == 1:
        parts = [job(b) for b in range(nb)]
    else:
        with ThreadPoolExecutor(max_workers=config.worker_count) as ex:
            parts = list(ex.map(job, range(nb)))
    cat = [np.concatenate([p[k] for p in parts]) if parts[0][k] is not None else None for k in range(6)]
    return PathBatch((x, a), config.dt, times, cat[0], cat[1], cat[2], cat[3], cat[4], cat[5])


# ---------------------------------------------------------------------------
# checks


def ks_exit_time(batch: PathBatch) -> dict:
    """KS distance between T0 and the law ``mu_a`` (CDF ``erfc(a / (2 sqrt s))``)."""
    a = batch.start[1]
    res = stats.ks_1samp(batch.t0, lambda s: ExitLaw(a).cdf(np.maximum(s, 1e-300)))
    n = len(batch)
    return {"ks": float(res.statistic), "threshold": 1.63 / np.sqrt(n), "pvalue": float(res.pvalue)}


def ks_exit_position(batch: PathBatch, params: StableParams) -> dict:
    """KS distance between ``Y_{T0} - x`` and ``q_a``."""
    x, a = batch.start
    law = stable_law(params.half)
    res = stats.ks_1samp(batch.y_at_t0 - x, lambda y: law.cdf(y, a))
    n = len(batch)
    return {"ks": float(res.statistic), "threshold": 1.63 / np.sqrt(n), "pvalue": float(res.pvalue)}


def independence_check(batch: PathBatch) -> dict:
    """Correlation of rank(T0) with sign(Y_{T0} - x); zero under independence."""
    r = stats.rankdata(batch.t0)
    sg = np.sign(batch.y_at_t0 - batch.start[0])
    c = float(np.corrcoef(r, sg)[0, 1])
    return {"corr": c, "bound": 3 / np.sqrt(len(batch))}


def green_exact(f, a, top, n=20001) -> float:
    """``int_0^top min(s, a) f(s) ds`` by the composite Simpson rule."""
    from scipy.integrate import simpson

    s = np.linspace(0, top, n)
    return float(simpson(np.minimum(s, a) * f(s), x=s))


def green_identity_check(f, a, config: McConfig, params=StableParams(1.5), top=None) -> dict:
    """``E^a int_0^{T0} f(Z_s) ds`` by simulation against ``int (s ^ a) f(s) ds``.

    ``top`` bounds the support of f; if omitted it is located by probing.
    """
    if top is None:
        probe = np.linspace(1e-6, 1e3, 200001)
        nz = np.nonzero(f(probe))[0]
        top = float(probe[nz[-1]]) + 1e-3 if nz.size else 1.0
    # no censoring: a censored path would need the identity under test to complete
    from dataclasses import replace

    batch = run_paths(params, replace(config, s_max=np.inf), (0.0, a), green_f=f, green_top=top)
    g = batch.green
    mc = float(g.mean())
    se = float(g.std(ddof=1) / np.sqrt(g.size))
    exact = green_exact(f, a, top)
    return {"mc": mc, "exact": exact, "se": se, "dt": config.dt, "n": g.size,
            "censored_fraction": batch.censored_fraction}


def green_bias_study(f, a, dts, n_paths, seed, params=StableParams(1.5), top=1.0) -> dict:
    """Green-identity error at several step sizes (independent runs).

    Returns the signed errors ``mc - exact`` with standard errors and the
    successive ratios ``err(dt) / err(dt / 2)``.
    """
    out = []
    for dt in dts:
        r = green_identity_check(f, a, McConfig(n_paths, dt, seed), params, top)
        out.append({"dt": dt, "bias": r["mc"] - r["exact"], "se": r["se"]})
    ratios = [out[i]["bias"] / out[i + 1]["bias"] for i in range(len(out) - 1)]
    return {"runs": out, "ratios": ratios}


class ExtensionTable:
    """``u(x, t) = Q_t f(x)`` tabulated for bilinear interpolation.

    ``x`` covers ``|x| <= x_extent`` at the spacing of f (values beyond are
    taken from the padded domain), ``t`` covers ``[0, t_max]`` on a grid that
    is geometric near 0 and uniform above ``t_split``.
    """

    def __init__(self, f: GridFunction, params: StableParams, x_extent=128.0, t_max=16.0,
                 n_geo=160, t_split=0.5, dt_lin=0.02):
        self.field = ExtensionField(f, params)
        sp = self.field.spectrum
        m = min(int(round(x_extent / sp.dx)), sp.n // 2 - 1)
        self.idx = np.arange(-m, m + 1)
        self.x = self.idx * sp.dx
        geo = np.geomspace(1e-4, t_split, n_geo)
        lin = np.arange(t_split + dt_lin, t_max + dt_lin / 2, dt_lin)
        self.t = np.concatenate([[0.0], geo, lin])
        tail = f.tail_value
        base = np.zeros(self.x.size)
        inside = np.abs(self.x) <= f.half_extent + 1e-12
        base[inside] = np.interp(self.x[inside], f.x, f.values)
        base[~inside] = tail
        rows = [base]
        for t in self.t[1:]:
            rows.append(self.field.full_slice(t)[self.idx % sp.n] + tail)
        self.u = np.array(rows).T  # (x, t)
        self.tail = tail
        self._interp = RegularGridInterpolator((self.x, self.t), self.u, bounds_error=False, fill_value=None)

    def __call__(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        out = np.empty(np.broadcast(x, t).shape)
        xb, tb = np.broadcast_arrays(x, t)
        inside = (np.abs(xb) <= self.x[-1]) & (tb <= self.t[-1])
        out[inside] = self._interp(np.column_stack([xb[inside], tb[inside]]))
        # rare points outside the table: exact slice, linear in x
        sp = self.field.spectrum
        xf = np.fft.fftfreq(sp.n, 1.0 / sp.n) * sp.dx
        order = np.argsort(xf)
        for i in np.flatnonzero(~inside):
            xi, ti = xb.flat[i], tb.flat[i]
            if ti <= 0:
                out.flat[i] = self.tail
                continue
            sl = self.field.full_slice(float(ti))
            out.flat[i] = np.interp(xi, xf[order], sl[order], left=0.0, right=0.0) + self.tail
        return out


def martingale_check(f: GridFunction, params: StableParams, start=(0.0, 1.0), times=(0.1, 0.5, 2.0),
                     config: McConfig | None = None, table: ExtensionTable | None = None) -> list:
    """``E u(X_{s ^ T0})`` against ``u(x, a)`` for each s in ``times``."""
    config = config or McConfig()
    table = table or ExtensionTable(f, params)
    x, a = start
    u0 = float(table(x, a))
    times = np.asarray(times, dtype=float)
    out = []
    pos = times > 0
    if pos.any():
        batch = run_paths(params, config, start, times[pos])
    k = 0
    for s in times:
        if s == 0:
            out.append({"s": 0.0, "mc": u0, "exact": u0, "se": 0.0})
            continue
        vals = table(batch.y_at[:, k], batch.z_at[:, k])
        k += 1
        se = float(vals.std(ddof=1) / np.sqrt(vals.size))
        out.append({"s": float(s), "mc": float(vals.mean()), "exact": u0, "se": se})
    return out


# ---------------------------------------------------------------------------
# Harnack ratios (deterministic)


def harnack_box(center=(0.0, 17.0), r=1.0, alpha=1.5):
    """``D_r``: ``|x - y| < r^{2/alpha}/2``, ``|t - s| < r/2``."""
    y, s = center
    hx = r ** (2 / alpha) / 2
    return (y - hx, y + hx), (s - r / 2, s + r / 2)


def harnack_ratio(f: GridFunction, params: StableParams, center=(0.0, 17.0), r=1.0, n_t=17) -> float:
    """``sup u / inf u`` over grid samples of the open box ``D_r``."""
    if center[1] - 16 * r <= 0:
        raise ValueError("D_32 must lie in the upper half plane (t_c > 16 r)")
    (x0, x1), (t0, t1) = harnack_box(center, r, params.alpha)
    fld = ExtensionField(f, params)
    xs = f.x
    mx = (xs > x0) & (xs < x1)
    ts = np.linspace(t0, t1, n_t + 2)[1:-1]
    vals = np.array([fld.slice(t).values[mx] for t in ts])
    lo = vals.min()
    if not lo > 0:
        return np.inf
    return float(vals.max() / lo)


def harnack_sample(params: StableParams, fixtures: dict, boxes=((0.0, 17.0, 1.0),), refine=True) -> dict:
    """Harnack ratios per fixture and box; with ``refine`` also at dx/2 and 2x t samples."""
    out = {}
    for name, f in fixtures.items():
        if np.any(np.asarray(f.values) < 0):
            raise ValueError(f"fixture {name} is not non-negative")
        for (y, s, r) in boxes:
            ratio = harnack_ratio(f, params, (y, s), r)
            row = {"ratio": ratio}
            if refine:
                from .grid import GridFunction as _G

                fine = _G(np.interp(np.arange(-2 * (f.n // 2), 2 * (f.n // 2) + 1) * f.spacing / 2,
                                    f.x, f.values), f.spacing / 2, f.half_extent, tail_value=f.tail_value)
                rf = harnack_ratio(fine, params, (y, s), r, n_t=33)
                row["ratio_refined"] = rf
                row["drift"] = abs(rf - ratio) / ratio if np.isfinite(ratio) else np.inf
            out[(name, y, s, r)] = row
    return out
