"""Configuration, report emission, subcommands, exit codes."""

import io
import json
import math

import numpy as np
import pytest

from nonhyp.cli import (
    CONFIG_EXIT,
    FAIL_EXIT,
    RunConfig,
    emit_report,
    emit_report_stream,
    main,
    run_pipeline,
)
from nonhyp.errors import ConfigError

BASE = {
    "seed": 3,
    "family": {"matrices": [[2.0, 0.0, 0.0, 0.5],
                            [math.cos(1.0), -math.sin(1.0),
                             math.sin(1.0), math.cos(1.0)]]},
    "measure": {"weights": [0.25, 0.75]},
}


def make_config(**over):
    raw = json.loads(json.dumps(BASE))
    raw.update(over)
    return RunConfig.from_dict(raw)


# ------------------------------------------------------------------ config


def test_config_requires_seed():
    raw = {k: v for k, v in BASE.items() if k != "seed"}
    with pytest.raises(ConfigError, match="seed"):
        RunConfig.from_dict(raw)


def test_config_rejects_bad_determinant():
    raw = json.loads(json.dumps(BASE))
    raw["family"]["matrices"][0] = [2.0, 0.0, 0.0, 0.6]
    with pytest.raises(ConfigError, match="determinant"):
        RunConfig.from_dict(raw)


def test_config_validates_ranges():
    with pytest.raises(ConfigError, match="eps"):
        make_config(measures={"eps": 1.5})
    with pytest.raises(ConfigError, match="n out of range"):
        make_config(skeleton={"n": 0})


def test_config_defaults_are_echoed():
    cfg = make_config()
    echo = cfg.echo()
    assert echo["skeleton"]["eps_H"] == 0.45
    assert echo["cascade"]["m"] == [4, 4]
    assert echo["seed"] == 3


def test_config_toml_and_json_agree():
    toml_cfg = RunConfig.from_file("configs/two_matrix.toml")
    json_cfg = RunConfig.from_file("configs/two_matrix.json")
    assert toml_cfg.echo() == json_cfg.echo()


# ----------------------------------------------------------------- reports


def test_streaming_report_matches_monolithic(tmp_path):
    report = {"stage_b": {"x": 1.5, "arr": [1, 2, 3]},
              "stage_a": {"nested": {"k": "v"}}}
    p1 = tmp_path / "mono.json"
    emit_report(report, str(p1))
    buf = io.StringIO()
    emit_report_stream(sorted(report.items()), buf)
    assert p1.read_text() == buf.getvalue()
    parsed = json.loads(buf.getvalue())
    assert parsed["stages"]["stage_a"] == {"nested": {"k": "v"}}


def test_empty_report_is_valid(tmp_path):
    p = tmp_path / "empty.json"
    emit_report({}, str(p))
    assert json.loads(p.read_text()) == {"schema": 1, "stages": {}}


def test_csv_report(tmp_path):
    report = {"conc": {"rows": [{"a": 1, "b": 2.5}, {"a": 2, "b": 3.5}]}}
    files = emit_report(report, str(tmp_path / "rep"), fmt="csv")
    assert len(files) == 1
    lines = open(files[0]).read().strip().splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "1,2.5"


# -------------------------------------------------------------- subcommands


def test_codes_check_command(tmp_path, capsys):
    code_file = tmp_path / "code.json"
    code_file.write_text(json.dumps({"N": 2, "words": [[1], [2, 2]]}))
    rc = main(["codes", "check", str(code_file), "--samples", "3"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["disjoint"] is True
    assert out["R"] == 2
    assert all(1 <= s["decodings"] <= out["R"] for s in out["samples"])


def test_lyapunov_command(tmp_path, capsys):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps(BASE))
    rc = main(["lyapunov", "--config", str(cfg_file), "--n", "500",
               "--trials", "4", "--seed", "9"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "trial,lambda1"
    vals = [float(line.split(",")[1]) for line in lines[1:]]
    assert len(vals) == 4
    assert all(v > -1e-9 for v in vals)


def test_dry_run_echo(tmp_path, capsys):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps(BASE))
    rc = main(["run", "--config", str(cfg_file), "--dry-run"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["config"]["seed"] == 3


def test_config_error_exit_code(tmp_path):
    cfg_file = tmp_path / "bad.json"
    cfg_file.write_text(json.dumps({"seed": 1}))
    assert main(["run", "--config", str(cfg_file), "--dry-run"]) == CONFIG_EXIT


def test_rotation_family_fails_in_skeleton_stage():
    """A pure-rotation family has exponent zero: the pipeline stops with
    the skeleton-stage error before any search runs."""
    raw = {
        "seed": 2,
        "family": {"matrices": [[math.cos(0.7), -math.sin(0.7),
                                 math.sin(0.7), math.cos(0.7)]]},
        "measure": {"weights": [1.0]},
    }
    cfg = RunConfig.from_dict(raw)
    code, report = run_pipeline(cfg)
    assert code == FAIL_EXIT
    assert report["error"]["type"] == "SkeletonTooSmall"
    assert report["error"]["stage"] == "measure_stats"
