import pytest

from stochastic_string.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, RunConfig, run


def test_anomaly_command(tmp_path, capsys):
    code = run([
        "anomaly", "--dims", "26", "--intercept", "1", "--m", "1",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_OK
    assert "Delta_1 = 0" in capsys.readouterr().out
    report = (tmp_path / "anomaly.txt").read_text()
    assert "joint solution: D = 26, a = 1" in report


def test_anomaly_noncritical_dimension(tmp_path, capsys):
    code = run([
        "anomaly", "--dims", "25", "--intercept", "1", "--m", "2",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_OK
    assert "Delta_2 = 1/8" in capsys.readouterr().out


def test_correlate_rejects_zero_mode(tmp_path, capsys):
    code = run(["correlate", "--n", "0", "--out", str(tmp_path)])
    assert code == EXIT_VALIDATION
    assert "zero mode" in capsys.readouterr().err


def test_correlate_writes_table(tmp_path, capsys):
    code = run([
        "correlate", "--n", "1", "-M", "20000", "--record-stride", "10",
        "--dtau-lag", "1.0", "--seed", "9", "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_OK
    table = (tmp_path / "correlator.txt").read_text()
    assert "n delta_tau value stderr analytic z_score" in table
    import json
    import math

    rows = json.loads((tmp_path / "correlator.json").read_text())
    assert {"n", "delta_tau", "value", "stderr", "analytic", "z_score"} == set(rows[0])
    lag_row = next(r for r in rows if r["delta_tau"] == 1.0)
    assert lag_row["analytic"] == pytest.approx(math.exp(-1.0))
    assert abs(lag_row["z_score"]) < 3


def test_unknown_flag_is_validation_error(capsys):
    assert run(["simulate", "--bogus"]) == EXIT_VALIDATION


def test_invalid_params_rejected(tmp_path):
    assert run(["spectrum", "--alpha-prime", "-1", "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_unreadable_config(tmp_path):
    assert run(["spectrum", "--config", str(tmp_path / "nope.cfg")]) == EXIT_VALIDATION


def test_stability_violation_exit_code(tmp_path, capsys):
    # forcing a huge grid step violates the explicit stability bound
    code = run([
        "fpe-check", "--n", "1", "-M", "10", "--steps", "10",
        "--grid-d-tau", "0.5", "--points", "401",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_NUMERICAL
    assert "bound" in capsys.readouterr().err.lower()


def test_spectrum_output(tmp_path):
    code = run([
        "spectrum", "--max-level", "2", "--zeta-intercept",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_OK
    body = (tmp_path / "spectrum.txt").read_text()
    assert "0 0.0 1" in body and "1 1.0 24" in body and "2 2.0 324" in body


def test_bracket_check(tmp_path, capsys):
    code = run(["bracket-check", "--points", "1001", "--out", str(tmp_path), "--no-timestamp"])
    assert code == EXIT_OK
    assert "1.000" in capsys.readouterr().out


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "params.cfg"
    cfg.write_text("alpha_prime = 0.5\ndims = 10\nmode_cutoff = 2\nseed = 4\n")
    out = tmp_path / "out"
    code = run([
        "spectrum", "--config", str(cfg), "--dims", "26", "--max-level", "1",
        "--out", str(out), "--no-timestamp",
    ])
    assert code == EXIT_OK
    header = (out / "spectrum.txt").read_text()
    assert "config.dims = 26" in header  # flag wins
    assert "config.seed = 4" in header   # file value survives


def test_header_round_trips_to_config(tmp_path):
    out = tmp_path / "run"
    assert run([
        "madelung-check", "--n", "2", "--k", "1", "--points", "801",
        "--out", str(out), "--no-timestamp",
    ]) == EXIT_OK
    cfg = RunConfig.from_header(out / "madelung.txt")
    assert cfg.command == "madelung-check"
    assert cfg.n == 2 and cfg.k == 1 and cfg.points == 801
    assert cfg.timestamp is False
    # rerunning the parsed config reproduces the artifact byte for byte
    out2 = tmp_path / "rerun"
    assert run([
        "madelung-check", "--n", str(cfg.n), "--k", str(cfg.k),
        "--points", str(cfg.points), "--out", str(out2), "--no-timestamp",
    ]) == EXIT_OK
    assert (out / "madelung.txt").read_bytes() == (out2 / "madelung.txt").read_bytes()


def test_simulate_byte_identical_reruns(tmp_path):
    args = [
        "simulate", "--n", "1", "--direction", "1", "-M", "50", "--steps", "20",
        "--seed", "123", "--no-timestamp",
    ]
    assert run(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert run(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    a = (tmp_path / "a" / "ensemble.txt").read_bytes()
    b = (tmp_path / "b" / "ensemble.txt").read_bytes()
    assert a == b


def test_simulate_zero_mode_with_numeric_init(tmp_path, capsys):
    code = run([
        "simulate", "--n", "0", "--direction", "2", "--momentum", "1.5",
        "--init", "0.0", "-M", "20", "--steps", "10", "--seed", "8",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_OK
    assert (tmp_path / "ensemble.txt").exists()


def test_simulate_zero_mode_needs_numeric_init(tmp_path, capsys):
    code = run([
        "simulate", "--n", "0", "-M", "5", "--steps", "5",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_VALIDATION
    assert "stationary density" in capsys.readouterr().err


def test_transport_check_runs(tmp_path, capsys):
    code = run([
        "transport-check", "--n", "1", "-M", "20000", "--steps", "60",
        "--seed", "3", "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == EXIT_OK
    assert "transport.txt" in capsys.readouterr().out
