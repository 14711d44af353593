from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from willmore4 import __version__, cli

PI = math.pi


def run(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), out=buf)
    return code, buf.getvalue()


def test_energy_json():
    code, text = run("energy", "--family", "s2xs2", "--params", "r1=1,r2=1")
    assert code == 0
    d = json.loads(text)
    assert set(d) >= {"family", "params", "background", "resolution", "E", "Ebar", "area", "est_error"}
    assert d["Ebar"] == pytest.approx(192 * PI ** 2, rel=1e-10)
    assert d["params"]["r1"] == pytest.approx(1 / math.sqrt(2))
    assert d["background"] == "sphere"


def test_energy_csv_and_option_position():
    a = run("--format", "csv", "energy", "--family", "s4", "--res", "16")
    b = run("energy", "--family", "s4", "--res", "16", "--format", "csv")
    assert a == b and a[0] == 0
    rows = list(csv.DictReader(io.StringIO(a[1])))
    assert float(rows[0]["Ebar"]) == pytest.approx(128 * PI ** 2, rel=1e-10)


def test_scan_csv():
    code, text = run("scan", "--family", "s1s1s2", "--range", "0.1:10", "--steps", "3", "--fixed", "t2=1")
    assert code == 0
    lines = text.splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    assert "# family=s1s1s2" in header
    data = list(csv.reader(ln for ln in lines if not ln.startswith("#")))
    assert data[0] == ["t1", "t2", "Ebar"]
    assert len(data) == 4 and all(float(r[1]) == 1.0 for r in data[1:])


def test_critical_spectrum_asymptotics_obstruction():
    code, text = run("critical", "--family", "s2xs2")
    assert code == 0
    cps = json.loads(text)
    assert [c["classification"] for c in cps] == ["max"]
    code, text = run("spectrum", "--surface", "S2xS2", "--jmax", "2")
    assert code == 0 and json.loads(text)["energy_kernel_dim"] == 15
    code, text = run("asymptotics", "--a-list", "10,20")
    assert code == 0 and json.loads(text)["rel_err"] < 0.05
    code, text = run("obstruction", "--family", "anchor", "--params", "j=2,k=2,R=1.4142135623730951,r=1",
                     "--res", "8")
    assert code == 0 and json.loads(text)["critical"] is True


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nresolution = 16\nformat = csv\n")
    code, text = run("--config", str(cfg), "energy", "--family", "s4")
    assert code == 0 and text.startswith("family,")
    assert "16" in next(csv.DictReader(io.StringIO(text)))["resolution"]
    code, text = run("--config", str(cfg), "--format", "json", "energy", "--family", "s4", "--res", "8")
    assert code == 0 and json.loads(text)["resolution"] == 8


def test_output_is_deterministic():
    argv = ("energy", "--family", "anchor", "--params", "j=1,k=3,R=2,r=1.7320508075688772", "--res", "16")
    assert run(*argv) == run(*argv)


@pytest.mark.parametrize("argv", [
    ("energy",),
    ("energy", "--family", "nope"),
    ("energy", "--family", "s4", "--background", "sphere"),
    ("energy", "--family", "s4", "--res", "4"),
    ("energy", "--family", "s2xs2", "--params", "r1=x"),
    ("scan", "--family", "s2xs2", "--range", "1", "--steps", "3"),
    ("scan", "--family", "s2xs2", "--range", "2:1", "--steps", "3"),
    ("spectrum", "--surface", "s3"),
    ("--config", "/nonexistent/file", "spectrum", "--surface", "s4"),
])
def test_usage_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run("--config", str(cfg), "critical", "--family", "s2xs2")[0] == 2


def test_version(capsys):
    assert run("--version")[0] == 0
    assert __version__ in capsys.readouterr().out


def test_verify_fast_reports_the_unattainable_criterion():
    # criterion 12 cannot pass, so the suite exits 1 while listing every result
    proc = subprocess.run([sys.executable, "-m", "willmore4", "verify", "--suite", "fast"],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 1
    lines = proc.stdout.splitlines()
    assert any(ln.startswith("FAIL [12]") for ln in lines)
    assert sum(ln.startswith("PASS") for ln in lines) == 11


def test_a_crashing_check_is_reported_as_failure():
    from willmore4.acceptance import Criterion, run_criterion

    def boom():
        raise RuntimeError("broken")

    r = run_criterion(Criterion(99, "crash", boom))
    assert not r.passed and r.line().startswith("FAIL [99] crash :: error:")
