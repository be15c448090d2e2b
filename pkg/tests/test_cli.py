import json
import subprocess
import sys
from pathlib import Path

import pytest

from radial_ns import io as rio
from radial_ns.cli import OUTPUT_ENV, main, thresholds_text

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """\
[model]
dim = 3
alpha = {alpha!r}
gamma = {gamma!r}

[regime]
name = cauchy-3d
policy = {policy}

[grid]
n_cells = 32
r_max = 6.0

[run]
t_end = 0.02
snapshot_every = 0.01
"""


def write_cfg(tmp_path, alpha=0.7, gamma=1.1, policy="enforce"):
    path = tmp_path / "c.ini"
    path.write_text(BASE.format(alpha=alpha, gamma=gamma, policy=policy))
    return str(path)


def test_thresholds_lines(capsys):
    assert main(["thresholds"]) == 0
    out = capsys.readouterr().out
    assert out == thresholds_text()
    lines = dict(line.split(" = ") for line in out.splitlines())
    assert lines["k1"] == "4.382975768"
    assert lines["k2"] == "3.092193586"
    assert lines["alpha_min_2d"] == "0.5436890127"
    assert lines["alpha_min_2d_weighted"] == "0.5147186258"
    assert lines["alpha_min_3d"] == "0.6766049821"
    assert abs(float(lines["k1_cubic_residual"])) < 1e-10


def test_check_exit_codes(tmp_path, capsys):
    assert main(["check", write_cfg(tmp_path)]) == 0
    assert "admissible: true" in capsys.readouterr().out
    # gamma on the strict bound 6 alpha - 3
    cfg = write_cfg(tmp_path, alpha=0.75, gamma=1.5)
    assert main(["check", cfg]) == 1
    assert "admissible: false" in capsys.readouterr().out
    assert main(["check", cfg, "--policy", "warn"]) == 0
    assert main(["check", write_cfg(tmp_path, policy="warn", gamma=1.3)]) == 0
    assert main(["check", str(tmp_path / "absent.ini")]) == 2
    assert main(["check"]) == 2
    assert main(["bogus"]) == 2


def test_check_json_mirrors_report(tmp_path, capsys):
    assert main(["check", write_cfg(tmp_path, gamma=1.3), "--json"]) == 1
    body = json.loads(capsys.readouterr().out)
    assert body["admissible"] is False
    assert body["violated_conditions"] == ["gamma_upper"]
    assert body["policy"] == "enforce"
    assert body["gamma_upper"] == pytest.approx(1.2)


def test_bad_config_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text(BASE.format(alpha=0.7, gamma=1.1, policy="warn").replace("n_cells = 32", "n_cells = x"))
    assert main(["check", str(path)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: line 11:")


def test_run_with_output_override(tmp_path, monkeypatch, capsys):
    out = tmp_path / "results"
    monkeypatch.setenv(OUTPUT_ENV, str(out))
    assert main(["run", write_cfg(tmp_path)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names[:2] == ["diagnostics.csv", "manifest.json"] and len(names) == 5
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"]["diagnostics.csv"] == rio.blob_hash((out / "diagnostics.csv").read_bytes())


def test_run_refuses_inadmissible_under_enforce(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "o"))
    assert main(["run", write_cfg(tmp_path, gamma=1.3)]) == 2
    assert not (tmp_path / "o").exists()


def test_mms_constant_case(tmp_path, capsys):
    out = tmp_path / "mms.csv"
    assert main(["mms", "--case", "constant", "--sizes", "16,32,64", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "pass: muscl-minmod exact" in text
    assert out.read_text().startswith("n_cells,dr,err_rho,err_u")
    assert main(["mms", "--sizes", "16,32,48"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "radial_ns", "thresholds"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == thresholds_text()
