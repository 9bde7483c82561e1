"""Command line entry point: ``stablelp <subcommand> [--config FILE] [flags]``.

Configuration is a flat ``key = value`` text file (``#`` starts a comment)
overridden by command line flags.  Unknown keys are rejected.  Every run
writes ``report.json`` (UTF-8, sorted keys) plus CSV artifacts to the output
directory (``--output-dir``, else ``$STABLELP_OUTPUT``, else ``./stablelp_out``).

Exit codes: 0 when no check fails, 1 when a check fails, 2 on configuration
errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__

log = logging.getLogger("stablelp")

SUBCOMMANDS = ("density", "extend", "lp", "multiplier", "mc", "suite")

# key -> (parser, validator message or None)
_FLOAT, _INT, _STR = float, int, str


def _list(kind):
    def parse(v):
        if isinstance(v, (list, tuple)):
            return [kind(x) for x in v]
        return [kind(x) for x in str(v).replace(",", " ").split()]
    return parse


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


KEYS = {
    "alpha": _FLOAT, "dim": _INT, "half_extent": _FLOAT, "dx": _FLOAT,
    "t_min": _FLOAT, "t_max": _FLOAT, "n_t": _INT, "seed": _INT, "output_dir": _STR,
    "fixtures": _list(str), "kernel": _STR, "kernel_csv": _STR, "symmetry": _STR,
    "lam": _FLOAT, "p_list": _list(float), "functionals": _list(str), "s": _FLOAT, "t": _FLOAT,
    "a": _FLOAT, "n_paths": _INT, "dt": _FLOAT, "workers": _INT, "checks": _list(str),
    "quick": _bool, "raw": _bool,
}

DEFAULTS = {
    "alpha": 1.5, "dim": 1, "half_extent": 64.0, "dx": 1.0 / 64, "t_min": 1e-4, "t_max": 1e3,
    "n_t": 256, "seed": 20240601, "fixtures": ["gauss", "indicator", "coswin"], "kernel": "test",
    "symmetry": "odd", "p_list": [1.5, 2.0, 3.0], "s": 1.0, "t": 1.0, "a": 1.0,
    "n_paths": 100_000, "dt": 1e-3, "workers": 1, "quick": False, "raw": False,
    "functionals": ["g_up", "g_arrow_alpha", "g_alpha", "area", "g_star", "l_star"],
    "checks": ["exit_time", "exit_position", "independence", "green", "martingale"],
}


class ConfigError(ValueError):
    pass


def parse_config_text(text: str, source="<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = KEYS[key](val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return out


def validate(cfg: dict, sub: str) -> dict:
    c = dict(DEFAULTS)
    c.update(cfg)
    c["subcommand"] = sub
    checks = [
        (0 < c["alpha"] < 2, "alpha must lie in (0, 2)"),
        (c["dim"] in (1, 2), "dim must be 1 or 2"),
        (c["half_extent"] > 0 and c["dx"] > 0 and c["dx"] < c["half_extent"], "need 0 < dx < half_extent"),
        (0 < c["t_min"] < c["t_max"], "need 0 < t_min < t_max"),
        (c["n_t"] >= 8, "n_t must be >= 8"),
        (0 <= c["seed"] < 2 ** 64, "seed must be a 64-bit unsigned integer"),
        (c["s"] > 0 and c["t"] > 0 and c["a"] > 0, "s, t and a must be positive"),
        (c["n_paths"] >= 1 and c["dt"] > 0, "need n_paths >= 1 and dt > 0"),
        (c["workers"] >= 1, "workers must be >= 1"),
        (all(p >= 1 for p in c["p_list"]) and c["p_list"], "p_list must be non-empty with p >= 1"),
        (c.get("lam") is None or c["lam"] > 1, "lam must exceed 1"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)
    if sub in ("extend", "lp", "multiplier") and not c["fixtures"]:
        raise ConfigError("fixture list is empty")
    from .fixtures import names

    unknown = [f for f in c["fixtures"] if f.split("@")[0] not in names()]
    if unknown:
        raise ConfigError(f"unknown fixtures {unknown}; known: {names()}")
    if c["dim"] != 1 and sub != "density":
        raise ConfigError(f"{sub} supports dim = 1 only")
    return c


def config_hash(cfg: dict) -> str:
    keep = {k: v for k, v in cfg.items() if k != "output_dir"}
    blob = json.dumps(keep, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _fixture(spec: str, cfg):
    """``name`` or ``name@shift``."""
    from .fixtures import fixture

    name, _, shift = spec.partition("@")
    return fixture(name, cfg["half_extent"], cfg["dx"], float(shift or 0.0))


def _record(name, status, value=None, tolerance=None, runtime=0.0, **details):
    return {"name": name, "status": status, "value": value, "tolerance": tolerance,
            "runtime_s": runtime, "details": details}


# ---------------------------------------------------------------------------
# subcommands; each returns (records, {filename: (header, rows)})


def cmd_density(cfg):
    from .density import StableParams, check_two_sided, stable_density

    t0 = time.perf_counter()
    p = StableParams(cfg["alpha"], cfg["dim"])
    tab = stable_density(p, cfg["s"], cfg["dx"], cfg["half_extent"])
    g = tab.values
    files = {}
    if p.dim == 1:
        files["density.csv"] = (["x", "p"], zip(g.x, g.values))
        v0 = float(g.values[g.n // 2])
    else:
        c = g.n // 2
        files["density.csv"] = (["x", "p"], zip(g.x, g.values[c]))
        v0 = float(g.values[c, c])
    ts = check_two_sided(tab)
    rec = _record("density", "logged", v0, None, time.perf_counter() - t0,
                  mass=tab.mass, two_sided=ts, s=cfg["s"])
    return [rec], files


def cmd_extend(cfg):
    from .density import StableParams
    from .extension import extend

    p = StableParams(cfg["alpha"])
    recs, files = [], {}
    for spec in cfg["fixtures"]:
        t0 = time.perf_counter()
        f = _fixture(spec, cfg)
        u = extend(f, p, cfg["t"], boundary="periodic" if spec.startswith("cos") else "decay")
        files[f"extend_{spec}.csv"] = (["x", "f", "Q_t f"], zip(f.x, f.values, u.values))
        recs.append(_record(f"extend:{spec}", "logged", float(np.max(np.abs(u.values))), None,
                            time.perf_counter() - t0, t=cfg["t"]))
    return recs, files


def cmd_lp(cfg):
    from . import functionals as lp
    from .density import StableParams
    from .grid import TimeGrid, lp_norm

    p = StableParams(cfg["alpha"])
    names = cfg["functionals"]
    bad = set(names) - set(lp.SQUARE_FUNCTIONS) - set(lp.MAXIMAL)
    if bad:
        raise ConfigError(f"unknown functionals {sorted(bad)}")
    tg = TimeGrid.log_spaced(cfg["t_min"], cfg["t_max"], cfg["n_t"])
    recs, files = [], {}
    for spec in cfg["fixtures"]:
        t0 = time.perf_counter()
        f = _fixture(spec, cfg)
        reps = lp.compute_functionals(f, p, names, cfg.get("lam"), tgrid=tg,
                                      boundary="periodic" if spec.startswith("cos") else "decay")
        fn = lp_norm(f, 2.0)
        cols = sorted(reps)
        files[f"lp_{spec}.csv"] = (["x"] + cols, zip(f.x, *(reps[k].values.values for k in cols)))
        norms = {k: {str(q): reps[k].norm(q) for q in cfg["p_list"]} for k in cols}
        ratios = {k: reps[k].norm(2.0) / fn for k in cols}
        recs.append(_record(f"lp:{spec}", "logged", None, None, time.perf_counter() - t0,
                            norms=norms, l2_ratio=ratios))
    return recs, files


def cmd_multiplier(cfg):
    from . import multiplier as mult
    from .density import StableParams

    p = StableParams(cfg["alpha"])
    if cfg.get("kernel_csv"):
        kern = mult.kernel_from_csv(cfg["kernel_csv"], cfg["symmetry"])
    else:
        try:
            kern = mult.get_kernel(cfg["kernel"], p)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
    t0 = time.perf_counter()
    fx = {spec: _fixture(spec, cfg) for spec in cfg["fixtures"]}
    rep = mult.certify(kern, p, fx, cfg["p_list"], cfg.get("lam"))
    status = {"certified": "pass", "violated": "fail"}.get(rep.verdict, "logged")
    files = {"norm_ratios.csv": (["p", "fixture", "ratio"],
                                 [(pp, fxn, v) for (pp, fxn), v in sorted(rep.norm_ratios.items())])}
    canc = [(r, R, mult.check_cancelation(kern, [(r, R)])) for r, R in mult.DEFAULT_RADII]
    files["cancelation.csv"] = (["r", "R", "integral"], canc)
    rec = _record(f"multiplier:{kern.name}", status, rep.decay_const, None,
                  time.perf_counter() - t0, report=rep.to_dict())
    return [rec], files


def cmd_mc(cfg):
    from . import montecarlo as mc
    from .density import StableParams

    p = StableParams(cfg["alpha"])
    known = {"exit_time", "exit_position", "independence", "green", "martingale"}
    bad = set(cfg["checks"]) - known
    if bad:
        raise ConfigError(f"unknown mc checks {sorted(bad)}; known: {sorted(known)}")
    conf = mc.McConfig(cfg["n_paths"], cfg["dt"], cfg["seed"], cfg["workers"])
    start = (0.0, cfg["a"])
    recs, files = [], {}
    t0 = time.perf_counter()
    batch = mc.run_paths(p, conf, start)
    if cfg["raw"]:
        files["paths.csv"] = (["t0", "y_at_t0", "censored"], zip(batch.t0, batch.y_at_t0, batch.censored.astype(int)))
    base_rt = time.perf_counter() - t0
    for name in cfg["checks"]:
        t1 = time.perf_counter()
        if name == "exit_time":
            r = mc.ks_exit_time(batch)
            recs.append(_record(name, "pass" if r["ks"] < r["threshold"] else "fail", r["ks"], r["threshold"],
                                base_rt + time.perf_counter() - t1, censored=batch.censored_fraction))
        elif name == "exit_position":
            r = mc.ks_exit_position(batch, p)
            recs.append(_record(name, "pass" if r["ks"] < r["threshold"] else "fail", r["ks"], r["threshold"],
                                time.perf_counter() - t1))
        elif name == "independence":
            r = mc.independence_check(batch)
            recs.append(_record(name, "logged", r["corr"], r["bound"], time.perf_counter() - t1))
        elif name == "green":
            f = lambda z: ((z > 0) & (z <= 1)).astype(float)
            r = mc.green_identity_check(f, cfg["a"], mc.McConfig(cfg["n_paths"], cfg["dt"], cfg["seed"] + 1,
                                                                 cfg["workers"]), p, top=1.0)
            ok = abs(r["mc"] - r["exact"]) <= 3 * r["se"] + cfg["dt"]
            recs.append(_record(name, "pass" if ok else "fail", r["mc"], 3 * r["se"] + cfg["dt"],
                                time.perf_counter() - t1, **r))
        elif name == "martingale":
            from .fixtures import fixture

            rows = mc.martingale_check(fixture("gauss"), p, start, (0.1, 0.5, 2.0),
                                       mc.McConfig(cfg["n_paths"], cfg["dt"], cfg["seed"] + 3, cfg["workers"]))
            ok = all(abs(r["mc"] - r["exact"]) <= 3 * r["se"] for r in rows)
            files["martingale.csv"] = (["s", "mc", "exact", "se"], [(r["s"], r["mc"], r["exact"], r["se"]) for r in rows])
            recs.append(_record(name, "pass" if ok else "fail", None, None, time.perf_counter() - t1, rows=rows))
    return recs, files


def cmd_suite(cfg):
    from .checks import run_suite

    res = run_suite(quick=cfg["quick"], seed=cfg["seed"], workers=cfg["workers"])
    recs = [r.to_dict() for r in res]
    files = {"suite.csv": (["name", "status", "value", "tolerance", "runtime_s"],
                           [(r.name, r.status, r.value, r.tolerance, r.runtime_s) for r in res])}
    return recs, files


COMMANDS = {"density": cmd_density, "extend": cmd_extend, "lp": cmd_lp,
            "multiplier": cmd_multiplier, "mc": cmd_mc, "suite": cmd_suite}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stablelp", description="Stable-process Littlewood-Paley numerics.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value file")
        sp.add_argument("-v", "--verbose", action="store_true")
        for key, kind in KEYS.items():
            flag = "--" + key.replace("_", "-")
            if kind is _bool:
                sp.add_argument(flag, dest=key, action="store_const", const=True, default=None)
            else:
                sp.add_argument(flag, dest=key, default=None)
    return ap


def load_config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg.update(parse_config_text(text, args.config))
    for key, kind in KEYS.items():
        v = getattr(args, key, None)
        if v is not None:
            try:
                cfg[key] = kind(v)
            except ValueError as exc:
                raise ConfigError(f"--{key.replace('_', '-')}: {exc}") from None
    return validate(cfg, args.subcommand)


def output_dir(cfg) -> Path:
    return Path(cfg.get("output_dir") or os.environ.get("STABLELP_OUTPUT") or "stablelp_out")


def write_outputs(out: Path, cfg, records, files):
    out.mkdir(parents=True, exist_ok=True)
    for fname, (header, rows) in files.items():
        _write_csv(out / fname, header, rows)
    report = {
        "metadata": {"version": __version__, "config_hash": config_hash(cfg), "subcommand": cfg["subcommand"],
                     "config": {k: v for k, v in cfg.items() if k != "output_dir"}},
        "checks": records,
    }
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, sort_keys=True, indent=2, ensure_ascii=False)
        fh.write("\n")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = output_dir(cfg)
    records, files = [], {}
    try:
        records, files = COMMANDS[args.subcommand](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.exception("run failed")
        records = records + [_record(args.subcommand, "fail", None, None, 0.0, error=repr(exc))]
        write_outputs(out, cfg, records, files)
        return 1
    write_outputs(out, cfg, records, files)
    for r in records:
        print(f"{r['name']}: {r['status']}")
    print(f"report: {out / 'report.json'}")
    return 1 if any(r["status"] == "fail" for r in records) else 0


if __name__ == "__main__":
    sys.exit(main())
