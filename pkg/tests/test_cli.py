import csv
import json
from dataclasses import replace

import pytest

from rcsteane import cli
from rcsteane.pauli import build_min_weight_decoder, steane_code


def run(argv, capsys=None):
    code = cli.main(argv)
    out = capsys.readouterr().out if capsys else ""
    return code, out


def test_verify_fast_passes(capsys):
    code, out = run(["verify", "--fast"], capsys)
    assert code == cli.EXIT_OK
    assert "PASS  phi-consistency" in out
    assert "FAIL" not in out


def test_verify_detects_corrupted_decoder(capsys):
    good = build_min_weight_decoder(steane_code())
    rec = list(good.recovery)
    rec[5], rec[9] = rec[9], rec[5]
    bad = replace(good, recovery=tuple(rec))
    cfg = cli.RunConfig(command="verify", fast=True).validate()
    assert cli.cmd_verify(cfg, decoder=bad) == cli.EXIT_CHECK
    assert "failing checks: phi-consistency" in capsys.readouterr().out


def test_gain_writes_csv_and_manifest(tmp_path):
    code, _ = run(["gain", "--axis", "z", "--omega", "0.1,0.3", "--levels", "1..2", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "gain.csv").open()))
    assert len(rows) == 4
    assert {r["level"] for r in rows} == {"1", "2"}
    manifest = json.loads((tmp_path / "gain.manifest.json").read_text())
    assert manifest["config"]["levels"] == [1, 2]
    assert manifest["outputs"] == ["gain.csv"]


def test_degrees_flag_converts_angles(tmp_path):
    run(["gain", "--omega", "180", "--degrees", "--levels", "1", "--out", str(tmp_path)])
    rows = list(csv.DictReader((tmp_path / "gain.csv").open()))
    assert float(rows[0]["omega"]) == pytest.approx(3.141592653589793)


def test_threshold_command(tmp_path):
    code, _ = run(["threshold", "--axis", "z", "--levels", "1..2", "--out", str(tmp_path)])
    assert code == 0
    row = next(csv.DictReader((tmp_path / "threshold.csv").open()))
    assert row["status"] == "ok"
    assert 0.2 < float(row["omega_star"]) < 1.2


def test_ensemble_rerun_is_byte_identical(tmp_path):
    args = ["ensemble", "--model", "cptp", "--n", "5", "--levels", "2", "--seed", "4"]
    run(args + ["--out", str(tmp_path / "a")])
    run(args + ["--workers", "2", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "ensemble.csv").read_bytes() == (tmp_path / "b" / "ensemble.csv").read_bytes()


def test_depsweep_command(tmp_path):
    code, _ = run(
        ["depsweep", "--p-range", "1e-4,1e-3", "--r-target", "0.003", "--levels", "1",
         "--n-theta", "4", "--n-phi", "8", "--out", str(tmp_path)]
    )
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "depsweep.csv").open()))
    assert [float(r["p"]) for r in rows] == [1e-4, 1e-3]


def test_decoder_dump(tmp_path):
    assert run(["decoder-dump", "--out", str(tmp_path)])[0] == 0
    rows = json.loads((tmp_path / "decoder.json").read_text())
    assert len(rows) == 64


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("axis: x\nomega: [0.2]\nlevels: '1..3'\n")
    code, _ = run(["gain", "--config", str(cfg), "--levels", "1", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "gain.csv").open()))
    assert len(rows) == 1 and rows[0]["axis"] == "x"


def test_json_config(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"omega": [0.25], "levels": [1, 2]}))
    assert run(["gain", "--config", str(cfg), "--out", str(tmp_path)])[0] == 0


@pytest.mark.parametrize(
    "content",
    ["bogus_key: 1\n", "levels: [0]\n", "model: nonsense\n", "axis: sideways\n", "[1, 2]\n"],
)
def test_bad_config_exits_two(tmp_path, capsys, content):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(content)
    code = cli.main(["gain", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert cli.main(["gain", "--config", str(tmp_path / "nope.json")]) == cli.EXIT_CONFIG


def test_unknown_subcommand():
    assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG


@pytest.mark.parametrize("text, expected", [("1..3", [1, 2, 3]), ("2,4", [2, 4]), ([1, 5], [1, 5])])
def test_parse_levels(text, expected):
    assert cli.parse_levels(text) == expected


def test_parse_grid():
    assert cli.parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert cli.parse_grid("1e-4:1e-2:3", log=True) == pytest.approx([1e-4, 1e-3, 1e-2])


def test_full_scale_counts():
    assert cli.FULL_SCALE_N == {"random-rotations": 16000, "random-cptp": 18000}


def test_gain_five_levels_increasing(tmp_path):
    run(["gain", "--axis", "z", "--omega", "0.157", "--levels", "1..5", "--out", str(tmp_path)])
    rows = list(csv.DictReader((tmp_path / "gain.csv").open()))
    deltas = [float(r["delta"]) for r in rows]
    assert len(rows) == 5
    assert all(a < b for a, b in zip(deltas, deltas[1:]))
