"""Command-line surface: JSON round-trips, exit codes, tolerance
precedence, the CSV sweep, and the installed entry point."""

import json
import math
import subprocess

import numpy as np
import pytest

from mtrate import fixtures
from mtrate.bt_solver import solve
from mtrate.cli import main
from mtrate.two_terminal import TwoTermInstance, bounds, feasible_theta_range


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def problem3_payload(**extra):
    payload = {
        "sigma_y": fixtures.SIGMA_Y_3.tolist(),
        "d": list(fixtures.D_3),
        "noise": {
            "perm": [1, 2, 3],
            "k": 1,
            "sigma_n": fixtures.SIGMA_N_3.tolist(),
        },
    }
    payload.update(extra)
    return payload


def problem1_payload(**extra):
    payload = {
        "sigma_y": fixtures.SIGMA_Y_1.tolist(),
        "d": list(fixtures.D_1),
        "noise": {
            "perm": [1, 2, 3, 4],
            "k": 1,
            "sigma_n": fixtures.SIGMA_N_1.tolist(),
        },
        "certificate": {
            "lambda": fixtures.LAM_1_PRINTED.tolist(),
            "omega": fixtures.OMEGA_1_PRINTED.tolist(),
            "thetas": [fixtures.THETA_1_PRINTED.tolist()],
            "pi": fixtures.PI_1_PRINTED.tolist(),
        },
        "options": {"tol": 5e-3},
    }
    payload.update(extra)
    return payload


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_bt_roundtrip(tmp_path, capsys):
    f = write_json(tmp_path / "p3.json", problem3_payload())
    code, out, _ = run_cli(["solve-bt", f], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["base"] == "nats"
    assert data["converged"] is True
    assert abs(float(data["sum_rate"]) - fixtures.EXPECTED_3["sum_rate"]) < 1e-5
    got = np.array([[float(x) for x in row] for row in data["d_tilde"]])
    assert np.max(np.abs(got - np.array(fixtures.EXPECTED_3["d_tilde"]))) < 1e-5
    assert all(data["active"])


def test_solve_bt_bits_conversion(tmp_path, capsys):
    f = write_json(
        tmp_path / "p3b.json", problem3_payload(options={"base": "bits"})
    )
    code, out, _ = run_cli(["solve-bt", f], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["base"] == "bits"
    nats = solve(fixtures.problem_3()).sum_rate
    assert abs(float(data["sum_rate"]) - nats / math.log(2.0)) < 1e-8


def test_solve_bt_closed_form(tmp_path, capsys):
    f = write_json(
        tmp_path / "p2.json",
        {"sigma_y": fixtures.SIGMA_Y_2.tolist(), "d": list(fixtures.D_2)},
    )
    code, out, _ = run_cli(["solve-bt", "--closed-form", f], capsys)
    assert code == 0
    data = json.loads(out)
    assert abs(float(data["sum_rate"]) - fixtures.EXPECTED_2["sum_rate"]) < 1e-5


def test_check_verdict_exit_codes(tmp_path, capsys):
    f3 = write_json(
        tmp_path / "p3.json", problem3_payload(options={"tol": 5e-3})
    )
    code, out, _ = run_cli(["check", "--method", "corollary1", f3], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "pass"

    # dropped-out source: simplified check does not apply
    f1 = write_json(tmp_path / "p1.json", problem1_payload())
    code, out, _ = run_cli(["check", "--method", "corollary1", f1], capsys)
    assert code == 1
    assert json.loads(out)["verdict"] == "not-applicable"

    code, out, _ = run_cli(["check", "--method", "theorem2", f1], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "pass"

    f2 = write_json(
        tmp_path / "p2.json",
        {"sigma_y": fixtures.SIGMA_Y_2.tolist(), "d": list(fixtures.D_2)},
    )
    code, out, _ = run_cli(["check", "--method", "wang-bc", f2], capsys)
    assert code == 1
    data = json.loads(out)
    assert data["verdict"] == "fail"
    assert "lhs scalar" in data["notes"]

    # pair-coupled noise is outside the diagonal-noise condition
    code, _, err = run_cli(["check", "--method", "wang", f3], capsys)
    assert code == 2
    assert "invalid input" in err


def test_check_bd_outputs(tmp_path, capsys):
    f1 = write_json(tmp_path / "p1.json", problem1_payload())
    code, out, _ = run_cli(["check", "--method", "bd", f1], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "pass"
    assert data["partition"] == [[1], [2], [3, 4]]
    assert data["leaders"] == [1, 2, 3]
    assert abs(float(data["sigma_z"]["4"]) - 0.1) < 1e-6

    f3 = write_json(tmp_path / "p3.json", problem3_payload())
    code, out, _ = run_cli(["check", "--method", "bd", f3], capsys)
    assert code == 1
    assert json.loads(out)["verdict"] == "not-applicable"


def test_invalid_inputs_exit_2(tmp_path, capsys):
    missing = write_json(tmp_path / "m.json", {"sigma_y": [[1.0]]})
    code, _, err = run_cli(["solve-bt", missing], capsys)
    assert code == 2 and "missing required field" in err

    syntax = tmp_path / "s.json"
    syntax.write_text("{not json")
    code, _, err = run_cli(["solve-bt", str(syntax)], capsys)
    assert code == 2 and "malformed JSON" in err

    notpd = write_json(
        tmp_path / "n.json",
        {"sigma_y": [[1.0, 2.0], [2.0, 1.0]], "d": [0.1, 0.1]},
    )
    code, _, err = run_cli(["solve-bt", notpd], capsys)
    assert code == 2

    no_cert = write_json(tmp_path / "p3.json", problem3_payload())
    code, _, err = run_cli(["check", "--method", "theorem2", no_cert], capsys)
    assert code == 2 and "certificate" in err

    code, _, err = run_cli(["solve-bt", str(tmp_path / "absent.json")], capsys)
    assert code == 2


def test_tolerance_precedence(tmp_path, capsys, monkeypatch):
    # the coupling multiplier sits ~8e-6 below PSD from 4-decimal inputs,
    # so the verdict flips with the tolerance in force
    bare = write_json(tmp_path / "bare.json", problem3_payload())
    code, _, _ = run_cli(["check", "--method", "corollary1", bare], capsys)
    assert code == 1

    monkeypatch.setenv("MTRATE_TOL", "5e-3")
    code, _, _ = run_cli(["check", "--method", "corollary1", bare], capsys)
    assert code == 0

    # an explicit file tolerance beats the environment
    monkeypatch.setenv("MTRATE_TOL", "1e-12")
    fixed = write_json(
        tmp_path / "fixed.json", problem3_payload(options={"tol": 5e-3})
    )
    code, _, _ = run_cli(["check", "--method", "corollary1", fixed], capsys)
    assert code == 0


def test_curves_csv(capsys):
    steps = 12
    code, out, _ = run_cli(
        [
            "curves",
            "--v1", "1.0",
            "--v2", "1.0",
            "--rho", str(fixtures.SWEEP_RHO),
            "--d1", str(fixtures.SWEEP_D[0]),
            "--d2", str(fixtures.SWEEP_D[1]),
            "--steps", str(steps),
        ],
        capsys,
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "theta,r_mu,r_lb,r_ub,lower_bound,bt_upper,wagner_composite,gap"
    assert len(lines) == steps + 1
    v1 = 1.0 / math.sqrt(fixtures.SWEEP_D[0])
    v2 = 1.0 / math.sqrt(fixtures.SWEEP_D[1])
    _, hi = feasible_theta_range(
        TwoTermInstance(v1=v1, v2=v2, rho=fixtures.SWEEP_RHO, theta=0.0)
    )
    first = [float(x) for x in lines[1].split(",")]
    last = [float(x) for x in lines[-1].split(",")]
    assert first[0] == 0.0
    assert abs(last[0] - (hi - 1e-9)) < 1e-12
    for row in (first, last):
        b = bounds(TwoTermInstance(v1=v1, v2=v2, rho=fixtures.SWEEP_RHO, theta=row[0]))
        assert abs(row[1] - b.r_mu) < 1e-7
        assert abs(row[5] - b.bt_upper) < 1e-7
        assert abs(row[7] - b.gap) < 1e-7


def test_curves_validation(capsys):
    code, _, err = run_cli(
        ["curves", "--v1", "1", "--v2", "1", "--rho", "1.0", "--d1", "0.1", "--d2", "0.1"],
        capsys,
    )
    assert code == 2
    code, _, err = run_cli(
        ["curves", "--v1", "1", "--v2", "1", "--rho", "0.5", "--d1", "0.1",
         "--d2", "0.1", "--steps", "1"],
        capsys,
    )
    assert code == 2


def test_search_noise_cli(tmp_path, capsys):
    f3 = write_json(
        tmp_path / "p3.json",
        {"sigma_y": fixtures.SIGMA_Y_3.tolist(), "d": list(fixtures.D_3)},
    )
    code, out, _ = run_cli(
        ["search-noise", f3, "--perm", "1,2,3", "--k", "1", "--budget", "4000"],
        capsys,
    )
    assert code == 0
    data = json.loads(out)
    assert data["report"]["verdict"] == "pass"
    assert data["k"] == 1
    got = np.array([[float(x) for x in row] for row in data["sigma_n"]])
    assert got.shape == (3, 3)

    code, out, _ = run_cli(
        ["search-noise", f3, "--perm", "1,2,3", "--k", "0", "--budget", "1500"],
        capsys,
    )
    assert code == 1


def test_example_commands(capsys):
    for ex_id in ("1", "2", "3"):
        code, out, _ = run_cli(["example", ex_id], capsys)
        assert code == 0, out
        assert "DEV" not in out
        assert out.count("ok") >= 5


def test_installed_entry_point():
    proc = subprocess.run(
        ["mtrate", "example", "1"], capture_output=True, text=True, timeout=120
    )
    assert proc.returncode == 0, proc.stderr
    assert "DEV" not in proc.stdout
