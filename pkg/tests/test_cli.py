import json

import pytest

from orbitledger.cli import EXIT_CONFIG, EXIT_OK, main


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "grid": {"planes": 4, "slots_per_plane": 28},
        "service_area": {"slot_width": 6},
        "cycles": 1,
        "seed": 31,
    }))
    return path


def test_run_then_report(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    assert (out / "chain.json").exists()
    assert main(["report", "--in", str(out), "--no-figures"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "proportions.csv" in printed


def test_seed_override_changes_outputs(tmp_path, config_file):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", str(config_file), "--out", str(a)])
    main(["run", "--config", str(config_file), "--seed", "99", "--out", str(b)])
    assert (a / "chain.json").read_bytes() != (b / "chain.json").read_bytes()


def test_sweep_k_list(tmp_path, config_file):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_file), "--k", "5,6",
                 "--out", str(out)]) == EXIT_OK
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 3


def test_invalid_config_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"grid": {"planes": 0}}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_exits_two(tmp_path):
    assert main(["run", "--config", str(tmp_path / "ghost.json"),
                 "--out", str(tmp_path / "x")]) == EXIT_CONFIG
