"""The acceptance checks, one function per criterion.

Each check returns a :class:`CheckResult`; ``status`` is ``"pass"`` or
``"fail"`` and ``details`` holds the logged numbers.  ``quick=True`` shrinks
the Monte Carlo sample size only; every deterministic check is unchanged.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import functionals as lp
from . import montecarlo as mc
from . import multiplier as mult
from .density import (
    StableParams, check_two_sided, mu_moment_bounds, psi, psi_bounds, stable_density, stable_law,
    subordination_density,
)
from .extension import ExtensionField
from .fixtures import POSITIVE, STANDARD, fixture
from .grid import convolve, lp_norm
from .symbols import phi

log = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    status: str
    value: float
    tolerance: float
    runtime_s: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "value": self.value,
                "tolerance": self.tolerance, "runtime_s": self.runtime_s, "details": self.details}


def _result(name, fails: list, value, tol, details, t0):
    if fails:
        details["failures"] = fails
    return CheckResult(name, "fail" if fails else "pass", float(value), float(tol),
                       time.perf_counter() - t0, details)


def rel_drift(a, b) -> float:
    return abs(a - b) / max(abs(a), 1e-300)


# ---------------------------------------------------------------------------


def check_density() -> CheckResult:
    """Cauchy closed forms, two-sided ratio, subordination agreement, invariants."""
    t0 = time.perf_counter()
    fails, d = [], {}
    p1 = StableParams(1.0)
    tab = stable_density(p1, 1.0)
    c = tab.values.values[tab.values.n // 2]
    d["p_1_0"] = float(c)
    if abs(c - 1 / np.pi) > 1e-6:
        fails.append("p(1,0,0) != 1/pi")
    ts = check_two_sided(tab)
    d["two_sided"] = ts
    if ts["ratio_min"] < 1 / (2 * np.pi) - 1e-6 or ts["ratio_max"] > 1 / np.pi + 1e-6:
        fails.append("two-sided ratio outside [1/(2pi), 1/pi]")
    x = np.array([0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    worst = 0.0
    for a in (1.0, 1.5):
        pa = StableParams(a)
        for s in (0.5, 1.0, 2.0):
            g = stable_density(pa, s).values
            err = float(np.max(np.abs(g(x) - subordination_density(pa, s, x))))
            worst = max(worst, err)
            d[f"mass_a{a}_s{s}"] = stable_density(pa, s).mass
        # scaling p(s, x) = s^{-1/a} p(1, x s^{-1/a})
        law = stable_law(a)
        sc = float(np.max(np.abs(stable_density(pa, 2.0).values(x) - 2 ** (-1 / a) * law.pdf(x * 2 ** (-1 / a)))))
        d[f"scaling_a{a}"] = sc
        if sc > 1e-6:
            fails.append(f"scaling alpha={a}")
        # semigroup p(1) * p(1) = p(2) away from the grid edge
        one = stable_density(pa, 1.0, half_extent=128.0).values
        two = convolve(one, one)
        m = np.abs(two.x) <= 16
        sg = float(np.max(np.abs(two.values[m] - law.pdf(two.x[m], 2.0))))
        d[f"semigroup_a{a}"] = sg
        if sg > 1e-4:
            fails.append(f"semigroup alpha={a}")
    d["subordination_gap"] = worst
    if worst > 1e-4:
        fails.append("subordination vs spectral")
    for k, v in d.items():
        if k.startswith("mass") and abs(v - 1) > 1e-5:
            fails.append(k)
    return _result("density", fails, worst, 1e-4, d, t0)


def check_psi() -> CheckResult:
    """psi at 0, zero integral, refinement-stable envelopes, exit-law moment bounds."""
    t0 = time.perf_counter()
    fails, d = [], {}
    p1 = StableParams(1.0)
    g = psi(p1)
    v0 = float(g.values[g.n // 2])
    d["psi_0"] = v0
    if abs(v0 + 4 / np.pi) > 1e-5:
        fails.append("psi(0) != -4/pi")
    for a in (1.0, 1.5):
        pa = StableParams(a)
        base = psi_bounds(pa)
        fine = psi_bounds(pa, spacing=1.0 / 128)
        wide = psi_bounds(pa, half_extent=128.0)
        d[f"alpha{a}"] = {"base": base, "dx_half": fine, "L_double": wide}
        if abs(base["integral"]) > 1e-6:
            fails.append(f"int psi != 0 at alpha={a}")
        for key in ("c_psi", "c_dpsi"):
            if not np.isfinite(base[key]):
                fails.append(f"{key} infinite")
            drift = max(rel_drift(base[key], fine[key]), rel_drift(base[key], wide[key]))
            d[f"drift_{key}_alpha{a}"] = drift
            if drift >= 0.05:
                fails.append(f"{key} drift {drift:.3g} at alpha={a}")
    margins = []
    for M in (1e-3, 0.1, 1.0, 10.0, 1e3):
        try:
            r = mu_moment_bounds(M)
        except Exception as exc:  # EstimateViolation or QuadratureError
            fails.append(f"moment bound M={M}: {exc}")
            continue
        margins.append(min(r["left_margin"], r["right_margin"]))
        if margins[-1] < 0:
            fails.append(f"negative margin at M={M}")
    d["moment_margins"] = margins
    return _result("psi", fails, v0, 1e-5, d, t0)


def check_plancherel() -> CheckResult:
    """``||G_up f||_2 / ||f||_2 = 1/2`` for the standard fixtures."""
    t0 = time.perf_counter()
    fails, d = [], {}
    worst = 0.0
    for a in (1.2, 1.5, 1.8):
        for name in STANDARD:
            f = fixture(name)
            r = lp.g_up(f, StableParams(a)).norm(2.0) / lp_norm(f, 2.0)
            d[f"{name}_alpha{a}"] = r
            worst = max(worst, abs(r - 0.5))
    if worst > 1e-3:
        fails.append(f"ratio off 0.5 by {worst:.3g}")
    return _result("plancherel", fails, worst, 1e-3, d, t0)


def arrow_constant(alpha: float) -> float:
    """``sqrt(int_0^inf 2 tau e^{-2 tau} Phi(tau^{2/alpha}) d tau)``: the L^2 constant of G_arrow_alpha."""
    fn = lambda tau: 2 * tau * np.exp(-2 * tau) * float(phi(tau ** (2 / alpha), alpha))
    val = 0.0
    for lo, hi in ((0, 1), (1, 10), (10, np.inf)):
        v, _ = integrate.quad(fn, lo, hi, epsabs=0, epsrel=1e-11, limit=200)
        val += v
    return float(np.sqrt(val))


def check_scaling() -> CheckResult:
    """``||G_arrow_alpha f||_2 / ||f||_2`` is one constant across fixtures."""
    t0 = time.perf_counter()
    fails, d = [], {}
    a = 1.5
    oracle = arrow_constant(a)
    d["oracle"] = oracle
    ratios = []
    for name in STANDARD:
        f = fixture(name)
        r = lp.g_arrow_alpha(f, StableParams(a)).norm(2.0) / lp_norm(f, 2.0)
        d[name] = r
        ratios.append(r)
    spread = (max(ratios) - min(ratios)) / min(ratios)
    err = max(rel_drift(oracle, r) for r in ratios)
    d["spread"], d["oracle_error"] = spread, err
    if spread > 1e-2:
        fails.append("fixtures disagree")
    if err > 1e-2:
        fails.append("oracle mismatch")
    return _result("scaling", fails, err, 1e-2, d, t0)


def check_chains() -> CheckResult:
    """Pointwise comparisons between the functionals and the K_t^lambda masses."""
    t0 = time.perf_counter()
    fails, d = [], {}
    pa = StableParams(1.5)
    lam0 = lp.lambda_zero(pa)
    for name in STANDARD:
        f = fixture(name)
        reps = lp.compute_functionals(f, pa, ("area", "g_star_arrow", "g_alpha", "g_up"), lam=lam0)
        A, gs = reps["area"].full, reps["g_star_arrow"].full
        gap = float(np.max(A ** 2 - 2 ** lam0 * gs ** 2))
        gap_rel = gap / float(np.max(A ** 2))
        chain2 = float(np.max(reps["g_up"].full - reps["g_alpha"].full))
        d[name] = {"area_minus_gstar_sq": gap_rel, "g_up_minus_g_alpha": chain2}
        if gap_rel > 1e-9:
            fails.append(f"area chain {name}")
        if chain2 > 1e-12 * float(np.max(reps["g_up"].full)):
            fails.append(f"g_alpha chain {name}")
    field_ = ExtensionField(fixture("gauss"), pa)
    worst = np.inf
    for t in (0.5, 1.0, 2.0):
        for x in (-2.0, -0.5, 0.0, 0.7, 1.5, 3.0):
            gf = lp.gamma_full(field_, t, x)
            ga = lp.gamma_alpha(field_, t, x)
            worst = min(worst, gf["value"] - ga)
    d["gamma_full_minus_alpha_min"] = float(worst)
    if worst < 0:
        fails.append("gamma_full < gamma_alpha")
    masses = [lp.LambdaKernel(lam0, t, pa.alpha).l1_norm() for t in (1e-2, 0.1, 1.0, 10.0, 100.0)]
    mdrift = float(np.max(np.abs(np.array(masses) - masses[0])))
    d["k_masses"], d["k_mass_drift"] = masses, mdrift
    if mdrift > 1e-5:
        fails.append("K mass depends on t")
    m2 = lp.LambdaKernel(2.0, 1.0, pa.alpha).l1_norm()
    d["k_mass_lambda2"] = m2
    if abs(m2 - 2) > 1e-6:
        fails.append("K mass at lambda=2")
    return _result("chains", fails, mdrift, 1e-5, d, t0)


def check_maximal() -> CheckResult:
    """Hardy-Littlewood closed forms and the N_alpha / M constant."""
    t0 = time.perf_counter()
    fails, d = [], {}
    f = fixture("indicator")
    m = lp.hl_maximal(f).values
    dx = f.spacing
    m0, m2 = float(m(0.0)), float(m(2.0))
    d["M_0"], d["M_2"] = m0, m2
    if abs(m0 - 1) > dx:
        fails.append("M(0) != 1")
    if abs(m2 - 1 / 3) > dx:
        fails.append("M(2) != 1/3")
    pa = StableParams(1.5)
    worst = 0.0
    for name in ("gauss", "indicator"):
        # pad 4 agrees with the default pad to ~1e-5 here at a quarter of the cost
        c = lp.hl_ratio(fixture(name), pa, pad=4)["c"]
        cf = lp.hl_ratio(fixture(name, spacing=dx / 2), pa, pad=4)["c"]
        cw = lp.hl_ratio(fixture(name, half_extent=128.0), pa, pad=4)["c"]
        drift = max(rel_drift(c, cf), rel_drift(c, cw))
        d[name] = {"c": c, "c_dx_half": cf, "c_L_double": cw, "drift": drift}
        worst = max(worst, drift)
        if not np.isfinite(c):
            fails.append(f"N/M constant infinite for {name}")
    if worst >= 0.05:
        fails.append(f"N/M constant drift {worst:.3g}")
    return _result("maximal", fails, worst, 0.05, d, t0)


def check_multiplier() -> CheckResult:
    """Hilbert-kernel constant and the three certification verdicts."""
    t0 = time.perf_counter()
    fails, d = [], {}
    pa = StableParams(1.5)
    hr = mult.norm_ratio(fixture("gauss"), mult.pv_inv_x(), 2.0)
    d["pv_inv_x_l2"] = hr
    if abs(hr - np.pi) > 1e-2:
        fails.append("p.v. 1/x ratio != pi")
    fx = {n: fixture(n) for n in STANDARD}
    rep = mult.certify(mult.test_kernel(pa), pa, fx, lam=1.25)
    d["test_kernel"] = rep.to_dict()
    if rep.verdict != "certified":
        fails.append(f"test kernel {rep.verdict}")
    if rep.cancelation_max != 0.0:
        fails.append("test kernel cancelation not exactly 0")
    if max(rep.cond_i_const, rep.cond_ii_const) > 1 + 1e-9:
        fails.append("growth constants exceed 1")
    if rep.diagnostics.get("ratio_spread", np.inf) >= 10:
        fails.append("norm ratio spread")
    bad = mult.certify(mult.inv_abs(), pa, fx)
    d["inv_abs"] = bad.to_dict()
    if bad.verdict != "violated":
        fails.append(f"even kernel {bad.verdict}")
    fat = mult.certify(mult.fat_tail(pa), pa, fx)
    d["fat_tail"] = fat.to_dict()
    if fat.verdict != "inconclusive":
        fails.append(f"fat-tail kernel {fat.verdict}")
    return _result("multiplier", fails, abs(hr - np.pi), 1e-2, d, t0)


def check_monte_carlo(quick=False, seed=20240601, workers=1) -> CheckResult:
    """Exit law, exit position, Green identity, martingale, reproducibility."""
    t0 = time.perf_counter()
    fails, d = [], {}
    pa = StableParams(1.5)
    n = 20_000 if quick else 100_000
    cfg = mc.McConfig(n, 1e-3, seed, workers)
    batch = mc.run_paths(pa, cfg, (0.0, 1.0))
    d["censored_fraction"] = batch.censored_fraction
    if batch.censored_fraction >= 0.01:
        fails.append("censoring >= 1%")
    ks_t = mc.ks_exit_time(batch)
    ks_y = mc.ks_exit_position(batch, pa)
    d["ks_t0"], d["ks_y"] = ks_t, ks_y
    if ks_t["ks"] >= ks_t["threshold"]:
        fails.append("KS exit time")
    if ks_y["ks"] >= ks_y["threshold"]:
        fails.append("KS exit position")
    ind = mc.independence_check(batch)
    d["independence"] = ind
    # reproducibility: rerun a block-sized slice with the same seed and workers
    small = mc.McConfig(min(n, 2 * mc.BLOCK), 1e-3, seed, workers)
    r1 = mc.run_paths(pa, small, (0.0, 1.0))
    r2 = mc.run_paths(pa, small, (0.0, 1.0))
    same = bool(np.array_equal(r1.t0, r2.t0) and np.array_equal(r1.y_at_t0, r2.y_at_t0))
    d["bit_identical"] = same
    if not same:
        fails.append("not reproducible")
    ind_f = lambda z: ((z > 0) & (z <= 1)).astype(float)
    g = mc.green_identity_check(ind_f, 1.0, mc.McConfig(n, 1e-3, seed + 1, workers), pa, top=1.0)
    study = mc.green_bias_study(ind_f, 1.0, GREEN_BIAS_DTS, 200_000 if not quick else 50_000, seed + 2, pa)
    # bias is O(dt): extrapolate the coarse-step slope to the production dt
    slope = study["runs"][-1]["bias"] / study["runs"][-1]["dt"]
    bias_bound = abs(slope) * cfg.dt
    d["green"], d["green_bias_study"], d["green_bias_bound"] = g, study, bias_bound
    if abs(g["mc"] - g["exact"]) > 3 * g["se"] + bias_bound:
        fails.append("Green identity")
    for r in study["ratios"]:
        if not 1.5 <= r <= 4.0:
            fails.append(f"bias ratio {r:.3g} under dt halving")
    table = mc.ExtensionTable(fixture("gauss"), pa)
    mart = mc.martingale_check(fixture("gauss"), pa, (0.0, 1.0), (0.0, 0.1, 0.5, 2.0),
                               mc.McConfig(n, 1e-3, seed + 3, workers), table)
    d["martingale"] = mart
    for row in mart:
        if abs(row["mc"] - row["exact"]) > 3 * row["se"] + (1e-12 if row["s"] == 0 else 0):
            fails.append(f"martingale at s={row['s']}")
    return _result("monte_carlo", fails, ks_t["ks"], ks_t["threshold"], d, t0)


GREEN_BIAS_DTS = (0.16, 0.08, 0.04)


def check_harnack() -> CheckResult:
    """Finite, refinement-stable Harnack ratios; exactly 1 for f = 1."""
    t0 = time.perf_counter()
    fails, d = [], {}
    pa = StableParams(1.5)
    fx = {n: fixture(n) for n in POSITIVE}
    fx["gauss_shift5"] = fixture("gauss", shift=5.0)
    res = mc.harnack_sample(pa, fx)
    worst = 0.0
    for (name, *_), row in res.items():
        d[name] = row
        if not np.isfinite(row["ratio"]):
            fails.append(f"{name} infinite")
        worst = max(worst, row["drift"])
    if res[("one", 0.0, 17.0, 1.0)]["ratio"] != 1.0:
        fails.append("f = 1 ratio != 1")
    if worst >= 0.05:
        fails.append(f"drift {worst:.3g}")
    shifted = d["gauss_shift5"]["ratio"] / d["gauss"]["ratio"]
    d["translation_factor"] = shifted
    d["max_ratio"] = max(r["ratio"] for r in res.values())
    return _result("harnack", fails, worst, 0.05, d, t0)


CHECKS = {
    "density": check_density,
    "psi": check_psi,
    "plancherel": check_plancherel,
    "scaling": check_scaling,
    "chains": check_chains,
    "maximal": check_maximal,
    "multiplier": check_multiplier,
    "monte_carlo": check_monte_carlo,
    "harnack": check_harnack,
}


def run_suite(names=None, quick=False, seed=20240601, workers=1) -> list:
    out = []
    for name in names or CHECKS:
        fn = CHECKS[name]
        kw = {"quick": quick, "seed": seed, "workers": workers} if name == "monte_carlo" else {}
        try:
            res = fn(**kw)
        except Exception as exc:
            log.exception("check %s raised", name)
            res = CheckResult(name, "fail", float("nan"), float("nan"), 0.0, {"error": repr(exc)})
        log.info("%s: %s (%.1fs)", name, res.status, res.runtime_s)
        out.append(res)
    return out
