import json
import subprocess
import sys

import pytest

from volherd.cli import build_parser, main
from volherd.experiment.config import DEFAULTS

FAST = ["--agents", "2000", "--warmup", "5000", "--steps", "300000",
        "--acf-max-lag", "1000", "--acf-fit-upper", "100"]


def test_simulate_happy_path(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["simulate", "--b", "0.45", "--seed", "7", "--output-dir", str(out), *FAST])
    assert code == 0
    assert (out / "events.tsv").exists() and (out / "summary.json").exists()
    assert "xi_V = " in capsys.readouterr().out


def test_json_summary(tmp_path, capsys):
    assert main(["simulate", "--json-summary", *FAST]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_steps"] == 300_000 and "lambda" in summary


@pytest.mark.parametrize("argv", [
    ["simulate", "--b", "-1"],
    ["simulate", "--kernel", "exponential", "--c", "2"],
    ["simulate", "--steps", "0"],
    ["simulate", "--agents", "1"],
])
def test_bad_parameters_are_usage_errors(argv, capsys):
    assert main(argv) == 2
    assert "configuration error" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["simulate", "--bogus", "1"],
    ["frobnicate"],
    [],
    ["simulate", "--kernel", "cubic"],
])
def test_parse_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_missing_input_is_runtime_error(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["analyze", "--input", str(tmp_path / "empty")]) == 2
    assert main(["analyze", "--input", str(tmp_path / "nope.tsv")]) == 1
    assert "runtime error" in capsys.readouterr().err


def test_analyze_reproduces_summary(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--seed", "7", "--output-dir", str(out), "--json-summary", *FAST]) == 0
    first = json.loads(capsys.readouterr().out)
    assert main(["analyze", "--input", str(out / "events.tsv"), "--json-summary"]) == 0
    second = json.loads(capsys.readouterr().out)
    for key in ("xi_V", "xi_N", "xi_abs_r", "lambda", "lambda_trade_time"):
        assert first[key] == second[key]


def test_config_file_equals_flags(tmp_path):
    cfg = {"b": 0.5, "M": 2000, "seed": 11, "warmup": 5000, "steps": 300000,
           "acf_max_lag": 1000, "acf_fit_upper": 100, "output_dir": str(tmp_path / "a")}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["simulate", "--config", str(tmp_path / "c.json")]) == 0
    assert main(["simulate", "--b", "0.5", "--M", "2000", "--seed", "11", "--warmup", "5000",
                 "--steps", "300000", "--acf-max-lag", "1000", "--acf-fit-upper", "100",
                 "--output-dir", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "events.tsv").read_bytes()
    assert a == (tmp_path / "b" / "events.tsv").read_bytes()


def test_flags_override_config_file(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"b": -3.0}))
    assert main(["simulate", "--config", str(tmp_path / "c.json"), "--b", "0.45",
                 "--json-summary", *FAST]) == 0


def test_sweep_command(tmp_path, capsys):
    code = main(["sweep", "--axis", "b", "--values", "0.3,0.45", "--output-dir",
                 str(tmp_path), *FAST])
    assert code == 0
    assert (tmp_path / "sweep_b.tsv").exists()
    assert capsys.readouterr().out.count("\tok\t") == 2


def test_sweep_failed_row_exit_1(tmp_path):
    assert main(["sweep", "--axis", "b", "--values", "0.45,-1", *FAST]) == 1


def test_help_lists_every_flag():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    simulate_help = sub["simulate"].format_help()
    for key in DEFAULTS:
        flag = {"M": "--M", "warmup": "--warmup", "steps": "--steps"}.get(key, "--" + key.replace("_", "-"))
        assert flag in simulate_help, flag
    for name in ("simulate", "sweep", "analyze", "reproduce"):
        assert "--json-summary" in sub[name].format_help()
    assert "--axis" in sub["sweep"].format_help()
    assert "--figure" in sub["reproduce"].format_help()


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "volherd.cli", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0
    for name in ("simulate", "sweep", "analyze", "reproduce"):
        assert name in res.stdout
