"""Command-line front end: exit codes, outputs, determinism, config."""
import json
import math
import subprocess
import sys

import pytest

from locallimit.cli import (
    EXIT_AUDIT_FAILED,
    EXIT_CONVERGENCE_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    run,
)


def test_usage_error_exit_code(capsys):
    assert run(["saddle", "--family", "exp_centered"]) == EXIT_USAGE  # missing --tau
    assert run(["no-such-command"]) == EXIT_USAGE
    assert run(["saddle", "--family", "weird", "--tau", "0.1"]) == EXIT_USAGE


def test_saddle_output(capsys):
    code = run(["saddle", "--family", "exp_centered", "--tau", "0.1"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    vals = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(vals["z0"]) == pytest.approx(1 / 11, abs=1e-10)
    assert float(vals["lambda"]) == pytest.approx(0.310180, abs=1e-5)
    assert float(vals["mu"]) == pytest.approx(0.0953102, abs=1e-6)


def test_cramer_series_output(capsys):
    code = run(["cramer-series", "--family", "exp_centered", "--order", "6"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    lams = [float(r[1]) for r in rows]
    expect = [1 / 3, -1 / 4, 1 / 5, -1 / 6, 1 / 7, -1 / 8, 1 / 9]
    for got, want in zip(lams, expect):
        assert got == pytest.approx(want, abs=1e-12)


def test_approx_gaussian(capsys):
    code = run(["approx", "--family", "gaussian", "--n", "100", "--x", "1.0"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert out["ratio_richter"] == 1.0
    assert out["rel_err"] == 0.0


def test_verify_bounds_exit_zero(tmp_path, capsys):
    code = run(["--out-dir", str(tmp_path), "verify-bounds", "--family", "uniform_sym",
                "--eps", "0.5", "--m", "1", "2", "--n-factors", "4"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "failures: 0" in out
    assert (tmp_path / "bound_audits.csv").exists()


def test_convergence_exit_zero_and_reports(tmp_path, capsys):
    code = run(["--out-dir", str(tmp_path), "convergence", "--family", "exp_centered",
                "--n-list", "64,256", "--points", "11"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["n"] == [64, 256]
    assert (tmp_path / "error_table.csv").exists()
    assert (tmp_path / "error_summary.json").exists()


def test_convergence_deterministic_outputs(tmp_path):
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    for d in (d1, d2):
        assert run(["--out-dir", str(d), "convergence", "--family", "uniform_sym",
                    "--n-list", "16,64", "--points", "9"]) == EXIT_OK
    assert (d1 / "error_table.csv").read_bytes() == (d2 / "error_table.csv").read_bytes()
    assert (d1 / "error_summary.json").read_bytes() == (d2 / "error_summary.json").read_bytes()


def test_convergence_jobs_matches_serial(tmp_path):
    d1 = tmp_path / "serial"
    d2 = tmp_path / "pool"
    assert run(["--out-dir", str(d1), "convergence", "--family", "exp_centered",
                "--n-list", "16,64", "--points", "9"]) == EXIT_OK
    assert run(["--out-dir", str(d2), "--jobs", "2", "convergence", "--family",
                "exp_centered", "--n-list", "16,64", "--points", "9"]) == EXIT_OK
    assert (d1 / "error_table.csv").read_bytes() == (d2 / "error_table.csv").read_bytes()


def test_tsallis_uniform(capsys):
    code = run(["tsallis", "--family", "uniform_sym", "--n-list", "64,256", "--points", "11"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert float(out["fitted_c"]) > 0
    assert float(out["sup"]["256"]) <= float(out["bound"]["256"])


def test_tsallis_wrong_family(capsys):
    assert run(["tsallis", "--family", "exp_centered", "--n-list", "64"]) == EXIT_USAGE


def test_families_listing(capsys):
    code = run(["families"])
    out = capsys.readouterr().out.strip().splitlines()
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out]
    fam = {r["family"]: r for r in rows}
    assert set(fam) == {"gaussian", "uniform_sym", "exp_centered"}
    assert fam["uniform_sym"]["first_nonzero_cumulant_order"] == 4
    assert fam["exp_centered"]["tau0_analytic"] == pytest.approx(
        fam["exp_centered"]["alpha"] ** 3 / 32)


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[experiment]\nfamily = exp_centered\nn_list = 16 64\npoints = 9\n")
    code = run(["--config", str(cfg), "convergence"])
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert code == EXIT_OK
    assert out["n"] == [16, 64]


def test_config_missing_file():
    assert run(["--config", "/nonexistent/x.ini", "families"]) == EXIT_USAGE


def test_bad_params_syntax():
    assert run(["saddle", "--family", "grid", "--params", "oops", "--tau", "0.0"]) == EXIT_USAGE


def test_console_script_entrypoint():
    proc = subprocess.run(
        [sys.executable, "-m", "locallimit.cli", "approx", "--family", "gaussian",
         "--n", "16", "--x", "0.5"],
        capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["ratio_richter"] == 1.0


def test_verify_bounds_detects_inconsistent_input(tmp_path, capsys):
    # an understated density bound breaks the norm audits: exit code 2
    import numpy as np
    xs = np.linspace(-math.sqrt(3), math.sqrt(3), 1201)
    dens = tmp_path / "uniform.txt"
    with open(dens, "w") as fh:
        for x in xs:
            fh.write(f"{x} {1 / (2 * math.sqrt(3))}\n")
    code = run(["verify-bounds", "--family", "grid",
                "--params", f"path={dens}", "density_bound=0.09",
                "--eps", "0.5", "--m", "1", "--n-factors", "4"])
    out = capsys.readouterr().out
    assert code == EXIT_AUDIT_FAILED
    assert "pass=false" in out


def test_convergence_criterion_failure_exit_code(monkeypatch, capsys):
    # a degrading scaled error must surface as exit code 3
    from locallimit import cli as cli_mod

    def fake_summarize(rows):
        return {"n": [64, 256],
                "per_n": {"64": {"max_abs_rel_err": 1e-3, "max_scaled_err": 1e-3},
                          "256": {"max_abs_rel_err": 1e-2, "max_scaled_err": 1e-2}},
                "fitted_C": 1e-3}

    monkeypatch.setattr(cli_mod.richter, "summarize", fake_summarize)
    code = run(["convergence", "--family", "exp_centered", "--n-list", "64,256",
                "--points", "5"])
    capsys.readouterr()
    assert code == EXIT_CONVERGENCE_FAILED


def test_tsallis_criterion_failure_exit_code(monkeypatch, capsys):
    from locallimit import cli as cli_mod

    monkeypatch.setattr(cli_mod.richter, "tsallis_restricted",
                        lambda d, n, policy=None: 0.001 * n)
    code = run(["tsallis", "--family", "uniform_sym", "--n-list", "64,256",
                "--points", "5"])
    capsys.readouterr()
    assert code == EXIT_CONVERGENCE_FAILED
