"""Command-line interface: exit codes, schemas, config handling, determinism."""

import json
import math
import subprocess

import pytest

from srqkd.cli import RunConfig, dump_config, load_run_config, main, parse_config_text

SWEEP_HEADER = "mu,t_db,length_km,delta,qber,i_e,r_sec_per_pulse,r_sec_hz,flags"

# Small grids so CLI round-trips stay fast; values don't matter, shapes do.
FAST_GRID = ["--mu-lo", "0.1", "--mu-hi", "0.6", "--mu-points", "7",
             "--t-lo", "55", "--t-hi", "75", "--t-points", "3"]


@pytest.fixture(autouse=True)
def _no_ambient_config(monkeypatch):
    monkeypatch.delenv("SRQKD_CONFIG", raising=False)


def _run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_rate_csv_schema(capsys):
    code, out, _ = _run(["rate", "--mu", "0.3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == SWEEP_HEADER
    assert len(lines) == 2
    cells = lines[1].split(",")
    assert float(cells[0]) == 0.3
    assert 0.0 < float(cells[7])  # positive secret rate at the reference point


def test_rate_bb84_has_no_monitor_delta(capsys, tmp_path):
    code, out, _ = _run(["rate", "--protocol", "bb84-decoy", "--mu", "0.3"], capsys)
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    assert row[3] == "nan"  # no reference pulse, no monitoring precision
    # JSON renders the same missing value as null.
    out_file = tmp_path / "rate.json"
    assert main(["rate", "--protocol", "bb84-decoy", "--mu", "0.3",
                 "--format", "json", "--out", str(out_file)]) == 0
    payload = json.loads(out_file.read_text())
    assert payload[0]["delta"] is None
    assert payload[0]["r_sec_hz"] > 0.0


def test_repeated_runs_are_byte_identical(tmp_path):
    args = ["simulate", "--n-pulses", "200000", "--seed", "31415"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_dump_config_round_trip(capsys, tmp_path):
    cfg_file = tmp_path / "run.cfg"
    code, out, _ = _run(["rate", "--mu", "0.42", "--t-db", "70", "--dump-config"], capsys)
    assert code == 0
    cfg_file.write_text(out)
    code2, out2, _ = _run(["rate", "--config", str(cfg_file), "--dump-config"], capsys)
    assert code2 == 0
    assert out2 == out
    reparsed = RunConfig(**parse_config_text(out))
    assert reparsed.mu == 0.42 and reparsed.t_db == 70.0


def test_env_var_names_config(capsys, tmp_path, monkeypatch):
    cfg_file = tmp_path / "env.cfg"
    cfg_file.write_text("mu = 0.17\nlength_km = 33\n")
    monkeypatch.setenv("SRQKD_CONFIG", str(cfg_file))
    code, out, _ = _run(["rate", "--dump-config"], capsys)
    assert code == 0
    assert "mu = 0.17" in out
    assert "length_km = 33" in out
    # Explicit flags still win over the environment config.
    code, out, _ = _run(["rate", "--mu", "0.5", "--dump-config"], capsys)
    assert "mu = 0.5\n" in out


def test_unknown_config_key_is_named(capsys, tmp_path):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("mu = 0.3\nbogus = 7\n")
    code, _, err = _run(["rate", "--config", str(cfg_file)], capsys)
    assert code == 1
    assert "bogus" in err
    assert f"{cfg_file}:2" in err


def test_config_comments_and_bad_values(tmp_path):
    values = parse_config_text("# full-line comment\nmu = 0.25  # inline\n\nseed = 7\n")
    assert values == {"mu": 0.25, "seed": 7}
    with pytest.raises(ValueError, match="bad value"):
        parse_config_text("mu = lots\n")
    with pytest.raises(ValueError, match="key = value"):
        parse_config_text("mu 0.3\n")
    cfg = load_run_config(None, {"mu": 0.5, "t_db": None})
    assert cfg.mu == 0.5 and cfg.t_db == RunConfig().t_db


def test_unknown_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["rate", "--does-not-exist", "1"])
    assert excinfo.value.code == 1


def test_invalid_value_exits_1(capsys):
    code, _, err = _run(["rate", "--mu", "-0.3"], capsys)
    assert code == 1
    assert "error:" in err


def test_min_srp_without_positive_rate_exits_2(capsys):
    code, _, err = _run(["min-srp", "--p-opt", "0.5"] + FAST_GRID, capsys)
    assert code == 2
    assert "no positive secret rate" in err


def test_min_srp_row_schema(capsys):
    code, out, _ = _run(["min-srp"] + FAST_GRID, capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "length_km,criterion,mu_policy,nu_threshold,mu_at,t_db_at,r_sec_hz"
    cells = lines[1].split(",")
    assert cells[1] == "positive-rate"
    nu, mu_at, t_at = float(cells[3]), float(cells[4]), float(cells[5])
    assert nu == pytest.approx(mu_at * 10 ** (t_at / 10.0), rel=1e-10)


def test_optimize_mu_json(capsys):
    code, out, _ = _run(["optimize-mu", "--format", "json"] + FAST_GRID, capsys)
    assert code == 0
    payload = json.loads(out)
    assert len(payload) == 1
    row = payload[0]
    assert row["found"] is True
    assert 0.1 <= row["mu_opt"] <= 0.6
    assert row["per_pulse"] == pytest.approx(row["r_sec_hz"] / 5e6, rel=1e-12)


def test_sweep_row_count(capsys):
    code, out, _ = _run(["sweep-mu-t", "--mu-points", "2", "--t-points", "3",
                         "--mu-lo", "0.2", "--mu-hi", "0.4",
                         "--t-lo", "60", "--t-hi", "70"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == SWEEP_HEADER
    assert len(lines) == 1 + 2 * 3


def test_rate_vs_distance_stderr_crossover(capsys):
    code, out, err = _run(["rate-vs-distance", "--protocols", "b92-sr,bb84-decoy",
                           "--l-lo", "50", "--l-hi", "80", "--l-points", "2",
                           "--mu-lo", "0.05", "--mu-hi", "1.0", "--mu-points", "13"],
                          capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "protocol,length_km,mu,r_sec_hz,per_pulse"
    assert len(lines) == 1 + 2 * 2
    assert "crossover_km = " in err


def test_attack_trace_out(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = _run(["attack", "--b-points", "40", "--trace-out", str(trace)], capsys)
    assert code == 0
    header = out.strip().splitlines()[0].split(",")
    for needed in ("b", "p", "a", "i_e", "b_min", "b_max", "flags"):
        assert needed in header
    trace_lines = trace.read_text().strip().splitlines()
    assert trace_lines[0] == "b,i_e"
    assert len(trace_lines) == 1 + 40


def test_povm_check_row(capsys):
    code, out, _ = _run(["povm-check", "--mu", "0.25"], capsys)
    assert code == 0
    header, row = out.strip().splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert abs(float(values["completeness_residual"])) < 1e-12
    cg = math.exp(-0.5)
    assert float(values["p_ok_0"]) == pytest.approx(1.0 - cg, rel=1e-10)
    assert float(values["fock_p_ok_0"]) == pytest.approx(1.0 - cg, abs=1e-9)


def test_train_capacity_stdout_and_csv(capsys, tmp_path):
    code, out, _ = _run(["train-capacity", "--storage-km", "10"], capsys)
    assert code == 0
    assert out.strip() == "245"
    out_file = tmp_path / "train.csv"
    assert main(["train-capacity", "--storage-km", "20", "--out", str(out_file)]) == 0
    lines = out_file.read_text().strip().splitlines()
    assert lines[0] == "storage_km,pulse_rate_hz,n_fib,capacity"
    assert lines[1].endswith(",490")


def test_console_entry_point():
    proc = subprocess.run(["srqkd", "train-capacity", "--storage-km", "10"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "245"
