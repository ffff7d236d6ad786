import json
import math

import pytest

from config import HISTORY_DB, RunConfig, load_config, read_config_file
from errors import ConfigError


def test_defaults():
    config = load_config("protective")
    assert config.subcommand == "protective"
    assert config.theta == pytest.approx(math.pi / 6)
    assert config.n == 400
    assert config.g == 0.005
    assert config.grid_points == 512
    assert config.history_db == HISTORY_DB
    assert config.output_dir.as_posix() == "runs/protective"


def test_unset_flags_do_not_override(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"q": 0.25, "resolution": 4}))
    config = load_config("onto", path, q=None, resolution=6)
    assert config.q == 0.25
    assert config.resolution == 6


def test_file_cannot_change_the_subcommand(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"subcommand": "nogo"}))
    assert load_config("pbr", path).subcommand == "pbr"


@pytest.mark.parametrize(
    "overrides",
    [
        {"q": 1.5},
        {"grid_points": 100},
        {"grid_points": 8},
        {"width": 0.0},
        {"trials": 0},
        {"n": -1},
        {"seed": -1},
        {"seed": 2**64},
        {"g": float("inf")},
        {"mixture": (0.5, 0.5, 0.5, 0.5)},
        {"observable": "W"},
        {"fmt": "xml"},
    ],
)
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        load_config("pbr", **overrides)


def test_unknown_keys_and_bad_files(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"trails": 10}))
    with pytest.raises(ConfigError):
        read_config_file(path)
    path.write_text("[1, 2")
    with pytest.raises(ConfigError):
        read_config_file(path)
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.json")


def test_echo_leaves_out_the_ledger():
    config = RunConfig(subcommand="pbr", output="out/pbr", history_db="elsewhere.db")
    echo = config.echo()
    assert "history_db" not in echo
    assert echo["mixture"] == [0.25, 0.25, 0.25, 0.25]
    assert echo["output"] == "out/pbr"
    assert echo["seed"] == 7


def test_mixture_from_the_command_line():
    config = load_config("pbr", mixture=(0.7, 0.1, 0.1, 0.1))
    assert config.mixture == (0.7, 0.1, 0.1, 0.1)
