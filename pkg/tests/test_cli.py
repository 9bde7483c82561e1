import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from stablelp import cli


def _report(d):
    return json.loads((d / "report.json").read_text())


def _strip_runtime(obj):
    if isinstance(obj, dict):
        return {k: _strip_runtime(v) for k, v in obj.items() if k != "runtime_s"}
    if isinstance(obj, list):
        return [_strip_runtime(v) for v in obj]
    return obj


def test_density_csv(tmp_path):
    out = tmp_path / "d"
    rc = cli.main(["density", "--alpha", "1", "--half-extent", "16", "--dx", "0.0625", "--output-dir", str(out)])
    assert rc == 0
    rows = list(csv.reader(open(out / "density.csv")))
    assert rows[0] == ["x", "p"]
    x = np.array([float(r[0]) for r in rows[1:]])
    p = np.array([float(r[1]) for r in rows[1:]])
    assert p[np.argmin(np.abs(x))] == pytest.approx(1 / np.pi, abs=1e-12)
    rep = _report(out)
    assert rep["metadata"]["config_hash"] == cli.config_hash(cli.validate(
        {"alpha": 1.0, "half_extent": 16.0, "dx": 0.0625}, "density"))


def test_rerun_is_identical(tmp_path):
    args = ["extend", "--fixtures", "gauss,indicator", "--half-extent", "16", "--dx", "0.0625"]
    assert cli.main(args + ["--output-dir", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--output-dir", str(tmp_path / "b")]) == 0
    ra, rb = _report(tmp_path / "a"), _report(tmp_path / "b")
    assert _strip_runtime(ra) == _strip_runtime(rb)
    assert (tmp_path / "a" / "extend_gauss.csv").read_bytes() == (tmp_path / "b" / "extend_gauss.csv").read_bytes()


def test_report_keys_sorted(tmp_path):
    cli.main(["density", "--half-extent", "8", "--dx", "0.125", "--output-dir", str(tmp_path)])
    text = (tmp_path / "report.json").read_text()
    rep = json.loads(text)
    assert list(rep) == sorted(rep)
    assert list(rep["metadata"]) == sorted(rep["metadata"])
    assert rep["metadata"]["version"]


def test_empty_fixture_list(tmp_path, capsys):
    out = tmp_path / "x"
    assert cli.main(["lp", "--fixtures", "", "--output-dir", str(out)]) == 2
    assert "fixture list is empty" in capsys.readouterr().err
    assert not out.exists()


def test_unknown_key_reports_line(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1.5\n# comment\nbogus = 3\n")
    assert cli.main(["density", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 2
    assert f"{cfg}:3" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["density", "--alpha", "2.5"],
    ["density", "--dim", "3"],
    ["lp", "--fixtures", "nosuch"],
    ["extend", "--dim", "2"],
    ["mc", "--seed", "-1"],
])
def test_invalid_values(tmp_path, argv):
    assert cli.main(argv + ["--output-dir", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1.0\nhalf_extent = 8\ndx = 0.125\ns = 2.0\n")
    out = tmp_path / "o"
    assert cli.main(["density", "--config", str(cfg), "--s", "1.0", "--output-dir", str(out)]) == 0
    c = _report(out)["metadata"]["config"]
    assert c["alpha"] == 1.0 and c["s"] == 1.0


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("STABLELP_OUTPUT", str(tmp_path / "env"))
    assert cli.main(["density", "--half-extent", "8", "--dx", "0.125"]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_multiplier_pv_kernel(tmp_path):
    out = tmp_path / "m"
    rc = cli.main(["multiplier", "--kernel", "pv_inv_x", "--fixtures", "gauss",
                   "--half-extent", "16", "--dx", "0.03125", "--p-list", "2", "--output-dir", str(out)])
    assert rc in (0, 1)
    assert (out / "norm_ratios.csv").exists()
    rows = list(csv.DictReader(open(out / "norm_ratios.csv")))
    r2 = [float(r["ratio"]) for r in rows if float(r["p"]) == 2.0]
    assert r2 and r2[0] == pytest.approx(np.pi, rel=1e-2)


def test_mc_small(tmp_path):
    out = tmp_path / "mc"
    rc = cli.main(["mc", "--n-paths", "2000", "--dt", "0.001", "--checks", "exit_time,exit_position",
                   "--raw", "--output-dir", str(out)])
    assert rc == 0
    rep = _report(out)
    assert {r["name"] for r in rep["checks"]} >= {"exit_time", "exit_position"}
    assert (out / "paths.csv").exists()


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "stablelp.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
