import math
import subprocess
import sys

import pytest

from hemopap.cli import main, run
from hemopap.export import read_csv


def cli(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


@pytest.mark.parametrize(
    "argv, code",
    [
        (["check", "example6"], 0),
        (["check", "extinction"], 1),
        (["simulate", "example6", "--horizon", "20"], 0),
        (["solve-pap", "example6"], 0),
        (["solve-pap", "extinction"], 1),
        (["stability", "example6", "--horizon", "50"], 0),
        (["stability", "extinction", "--horizon", "20"], 1),
        (["extinction", "extinction"], 0),
        (["extinction", "example6"], 1),
        (["fig2", "example6", "--horizon", "50"], 0),
        (["check", "no_such_file.scn"], 2),
        (["simulate", "example6", "--h", "-1"], 2),
    ],
)
def test_exit_code_matrix(tmp_path, argv, code):
    assert cli(tmp_path, *argv) == code


def test_check_report(tmp_path, capsys):
    assert cli(tmp_path, "check", "example6") == 0
    out = capsys.readouterr().out
    assert "h2_value = -0.0402\n" in out
    assert "h3_value = 0.015\n" in out
    assert "h4_value = -0.051528\n" in out
    assert "all_pass = true\n" in out
    assert "lambda = 0.0217" in out and "zeta = 0.1457" in out and "lambda_G = n/a" in out
    assert (tmp_path / "check_report.txt").read_text() == out


def test_check_reports_extinction_rate(tmp_path, capsys):
    cli(tmp_path, "check", "extinction")
    assert "lambda_G = 0.3149" in capsys.readouterr().out


def test_extinction_message(tmp_path, capsys):
    assert cli(tmp_path, "extinction", "example6") == 1
    assert "extinction condition not satisfied: a⁻ = 0.38 ≤ Σb⁺ = 1.21" in capsys.readouterr().out


def test_simulate_decay_last_row(tmp_path):
    assert cli(tmp_path, "simulate", "decay") == 0
    header, data = read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "x"]
    assert data[-1, 0] == 5.0
    assert data[-1, 1] == pytest.approx(math.exp(-5.0), abs=1e-8)


def test_solve_pap_outputs(tmp_path, capsys):
    assert cli(tmp_path, "solve-pap", "constant") == 0
    header, data = read_csv(tmp_path / "pap_solution.csv")
    assert header == ["t", "x_star"]
    assert data[:, 1] == pytest.approx(2.4937313343, abs=1e-7)
    diag = (tmp_path / "pap_diagnostics.txt").read_text()
    for key in ("iterations", "contraction_ratios_tail", "residual_fixed_point", "residual_ode", "crosscheck_forward"):
        assert f"{key} = " in diag


def test_stability_outputs(tmp_path):
    assert cli(tmp_path, "stability", "example6", "--horizon", "50") == 0
    cert = (tmp_path / "stability_certificate.txt").read_text()
    assert "envelope_pass = true" in cert and "lambda_bound = 0.0217" in cert
    assert (tmp_path / "trajectory_a.csv").exists() and (tmp_path / "trajectory_b.csv").exists()


def test_fig2_outputs(tmp_path):
    assert cli(tmp_path, "fig2", "example6", "--horizon", "50") == 0
    for name in ("fig2_x0_0.1.csv", "fig2_x0_1.csv", "fig2.svg"):
        assert (tmp_path / name).exists()
    assert 'viewBox="0 0 800 500"' in (tmp_path / "fig2.svg").read_text()


def test_bad_scenario_reports_on_stderr(tmp_path, capsys):
    p = tmp_path / "bad.scn"
    p.write_text("model:\n  m: 2\n  bogus: 1\n")
    assert cli(tmp_path, "check", str(p)) == 2
    err = capsys.readouterr().err
    assert "line 3" in err and "model.bogus" in err


@pytest.mark.parametrize("argv, name", [(["simulate", "example6", "--horizon", "30"], "trajectory.csv"), (["solve-pap", "example6"], "pap_solution.csv")])
def test_byte_identical_outputs(tmp_path, argv, name):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli(a, *argv) == 0 and cli(b, *argv) == 0
    assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_accepts_scenario_objects(tmp_path):
    from hemopap.scenario import load_builtin
    assert run("check", load_builtin("example6"), tmp_path) == 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hemopap", "extinction", "example6", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert "a⁻ = 0.38 ≤ Σb⁺ = 1.21" in proc.stdout
