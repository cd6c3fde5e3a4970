import json
import subprocess
import sys

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from res_scope import cli
from res_scope.cli import (
    EXIT_CAPACITY,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    Outcome,
    RunConfig,
    UsageError,
    format_config,
    main,
    parse_config,
    report_document,
    render_json,
)


def run_main(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_empty_argv_prints_usage(capsys):
    code, _, err = run_main([], capsys)
    assert code == EXIT_USAGE
    assert "usage" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, _ = run_main(["scan", "--lo", "0", "--hi", "10", "--bogus", "1"], capsys)
    assert code == EXIT_USAGE


def test_delta_out_of_range(capsys):
    code, _, err = run_main(["ratio", "--lo", "0", "--hi", "10", "--delta", "0.30", "--X", "10"], capsys)
    assert code == EXIT_USAGE
    assert "--delta" in err and "delta must lie in (0, 1/4)" in err
    code, _, err = run_main(["ratio", "--lo", "0", "--hi", "10", "--delta", "0.30"], capsys)
    assert code == EXIT_USAGE and "delta must lie in (0, 1/4)" in err


def test_constants_config_is_valid():
    config = parse_config(["constants", "--delta", "0.01", "--prime-cutoff", "100000"])
    assert config.command == "constants" and config.prime_cutoff == 10**5 and config.delta == 0.01


@pytest.mark.parametrize("argv, flag", [
    (["scan", "--hi", "10", "--X", "10"], "--lo"),
    (["scan", "--lo", "10", "--hi", "5", "--X", "10"], "--hi"),
    (["scan", "--lo", "0", "--hi", "10"], "--lo"),
    (["near-one", "--lo", "100", "--hi", "200", "--sigma", "0.8"], "--sigma"),
    (["near-one", "--lo", "10000", "--hi", "20000", "--A", "5"], "--A"),
    (["sigma", "--lo", "100", "--hi", "200", "--sigma", "1.2"], "--sigma"),
    (["scan", "--lo", "100", "--hi", "200", "--Y", "100", "--Y-audit", "50"], "--Y-audit"),
    (["dist", "--lo", "100", "--hi", "200", "--xs", "0,-1"], "--xs"),
    (["charsum", "--N", "2"], "--N"),
    (["charsum"], "--N"),
    (["constants", "--prime-cutoff", "10"], "--prime-cutoff"),
    (["constants", "--out-csv", "x.csv"], "--out-csv"),
    (["scan", "--lo", "100", "--hi", "200", "--workers", "0"], "--workers"),
    (["scan", "--lo", "1e2.5", "--hi", "200"], "--lo"),
])
def test_validation_names_the_flag(argv, flag):
    with pytest.raises(UsageError, match=flag):
        parse_config(argv)


def test_constants_report(tmp_path, capsys):
    out = tmp_path / "c.json"
    code, _, _ = run_main(["constants", "--out-json", str(out)], capsys)
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert {"C_paper", "C_alt", "gamma", "tail_bound"} <= doc["results"].keys()
    assert doc["results"]["C_paper"] == pytest.approx(-3.5743, abs=1e-3)
    assert {"command", "tool_version", "parameters", "results", "bounds", "run"} <= doc.keys()
    assert "wall_time_s" in doc["run"]


def test_constants_to_stdout_with_fit(capsys):
    code, out, _ = run_main(["constants", "--N", "1000000"], capsys)
    assert code == EXIT_OK
    fitted = json.loads(out)["results"]["fitted"]
    assert fitted["main_term_minus_log_X"] == pytest.approx(-1.6442, abs=1e-3)


def test_scan_csv_and_plot(tmp_path, capsys):
    csv_path, plot = tmp_path / "s.csv", tmp_path / "s.py"
    code, out, _ = run_main(["scan", "--lo", "0", "--hi", "10", "--X", "10", "--Y", "10",
                             "--out-csv", str(csv_path), "--plot", str(plot)], capsys)
    assert code == EXIT_OK
    raw = csv_path.read_bytes()
    assert raw.startswith(b"d,value,log_resonator\n") and b"\r" not in raw
    assert len(raw.decode().splitlines()) == 7
    assert [t["d"] for t in json.loads(out)["results"]["top"][:3]] == [-7, -8, -4]
    script = plot.read_text()
    assert str(csv_path) in script
    compile(script, str(plot), "exec")


def test_dist_and_charsum_csv(tmp_path, capsys):
    dist = tmp_path / "d.csv"
    assert main(["dist", "--lo", "1000", "--hi", "2000", "--Y", "100", "--out-csv", str(dist)]) == 0
    lines = dist.read_text().splitlines()
    assert lines[0] == "x,threshold,count,measured_exponent,predicted_exponent,fitted_C_prime"
    assert len(lines) == 6
    char = tmp_path / "c.csv"
    assert main(["charsum", "--N", "1000", "--n", "1,2,4", "--out-csv", str(char)]) == 0
    assert len(char.read_text().splitlines()) == 4
    capsys.readouterr()


@pytest.mark.parametrize("command", ["ratio", "near-one", "sigma"])
def test_ratio_commands_run(command, capsys):
    code, out, _ = run_main([command, "--lo", "10000", "--hi", "10500", "--Y", "200"], capsys)
    assert code == EXIT_OK
    results = json.loads(out)["results"]
    assert results["min_value"] <= results["ratio"] <= results["max_value"]


def test_empty_range_is_usage_error(capsys):
    code, _, err = run_main(["scan", "--lo", "1", "--hi", "2", "--X", "5", "--Y", "10"], capsys)
    assert code == EXIT_USAGE and "no fundamental" in err


def test_capacity_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("RES_SCOPE_MEM_MB", "1")
    code, _, err = run_main(["constants", "--prime-cutoff", str(10**9 + 7)], capsys)
    assert code == EXIT_CAPACITY
    assert "RES_SCOPE_MEM_MB" in err


def test_io_exit_codes(tmp_path, capsys):
    missing = tmp_path / "nope" / "out.json"
    code, _, err = run_main(["constants", "--out-json", str(missing)], capsys)
    assert code == EXIT_IO and "nope" in err
    code, _, err = run_main(["constants", "--config", str(tmp_path / "absent.cfg")], capsys)
    assert code == EXIT_IO


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# ratio defaults\nlo = 100\nhi = 300\nY = 50\nxs = 0, 1\n")
    config = parse_config(["ratio", "--config", str(cfg), "--hi", "400", "--X", "10"])
    assert (config.lo, config.hi, config.Y, config.xs) == (100, 400, 50, (0.0, 1.0))
    cfg.write_text("lo = 100\nmystery = 3\n")
    with pytest.raises(UsageError, match="mystery"):
        parse_config(["ratio", "--config", str(cfg)])


def test_json_identical_across_runs(tmp_path):
    out = tmp_path / "r.json"
    argv = ["ratio", "--lo", "1000", "--hi", "3000", "--Y", "300", "--out-json", str(out)]
    docs = []
    for workers in ("1", "2"):
        assert main(argv + ["--workers", workers]) == 0
        doc = json.loads(out.read_text())
        del doc["run"]
        docs.append(json.dumps(doc, sort_keys=True))
    assert docs[0] == docs[1]


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "res_scope.cli", "constants"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "C_alt" in proc.stdout


# -- round trip -----------------------------------------------------------

def _twelve_digits(x):
    return float(f"{x:.12g}")


@st.composite
def configs(draw):
    command = draw(st.sampled_from(["scan", "ratio", "dist", "sigma", "near-one"]))
    lo = draw(st.integers(min_value=10**4, max_value=10**6))
    fields = dict(
        command=command, lo=lo, hi=lo + draw(st.integers(min_value=1, max_value=10**6)),
        Y=draw(st.none() | st.integers(min_value=100, max_value=10**5)),
        delta=draw(st.floats(min_value=1e-6, max_value=0.2499).map(_twelve_digits)),
        xs=tuple(draw(st.lists(st.floats(min_value=0, max_value=50).map(_twelve_digits),
                               min_size=1, max_size=6))),
        k=draw(st.integers(min_value=1, max_value=100)),
        n=tuple(draw(st.lists(st.integers(min_value=1, max_value=10**4), min_size=1, max_size=5))),
        constant=draw(st.sampled_from(["paper", "alt"])),
        workers=draw(st.integers(min_value=1, max_value=16)),
        X=draw(st.none() | st.floats(min_value=2, max_value=100).map(_twelve_digits)),
    )
    if fields["Y"] is not None:
        fields["Y_audit"] = fields["Y"] * draw(st.integers(min_value=1, max_value=3))
    if command == "sigma":
        fields["sigma"] = draw(st.floats(min_value=0.51, max_value=0.99).map(_twelve_digits))
        fields["eta"] = draw(st.floats(min_value=0.1, max_value=5).map(_twelve_digits))
    if command == "near-one":
        fields["A"] = draw(st.floats(min_value=0.01, max_value=0.6).map(_twelve_digits))
        fields["kappa"] = draw(st.floats(min_value=0.01, max_value=2).map(_twelve_digits))
    if command == "scan":
        fields["sigma"] = draw(st.none() | st.floats(min_value=0.51, max_value=1).map(_twelve_digits))
    return RunConfig(**fields)


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(configs())
def test_round_trip_through_json(tmp_path, config):
    cli.validate(config)
    doc = report_document(config, Outcome({}, {}), 0.0)
    path = tmp_path / "report.json"
    path.write_text(render_json(doc))
    assert parse_config([config.command, "--config", str(path)]) == config


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(configs())
def test_round_trip_through_key_value_file(tmp_path, config):
    path = tmp_path / "run.cfg"
    path.write_text(format_config(config))
    assert parse_config([config.command, "--config", str(path)]) == config
