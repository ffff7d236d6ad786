import json
import math
from pathlib import Path

import attrs
import jsonschema
from attrs import field, frozen

from errors import ConfigError

SUBCOMMANDS = ("protective", "leak", "scan", "pbr", "steer", "onto", "nogo", "history")
FORMATS = ("json", "csv")
OBSERVABLES = ("X", "Y", "Z")
ALICE_BASES = ("Z", "X", "both")
MODES = ("deterministic", "sampled")
SCENARIOS = ("pbr", "z", "x")
HISTORY_DB = "lab_history.db"
MAX_SEED = 2**64 - 1

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "subcommand": {"enum": list(SUBCOMMANDS)},
        "seed": {"type": "integer", "minimum": 0, "maximum": MAX_SEED},
        "trials": {"type": "integer"},
        "n": {"type": "integer"},
        "g": {"type": "number"},
        "grid_points": {"type": "integer"},
        "width": {"type": "number"},
        "q": {"type": "number"},
        "theta": {"type": "number"},
        "momentum": {"type": "number"},
        "observable": {"enum": list(OBSERVABLES)},
        "mode": {"enum": list(MODES)},
        "resolution": {"type": "integer"},
        "alice_basis": {"enum": list(ALICE_BASES)},
        "device_dim": {"type": "integer"},
        "mixture": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
        "scenario": {"enum": list(SCENARIOS)},
        "output": {"type": ["string", "null"]},
        "fmt": {"enum": list(FORMATS)},
        "dump_joint": {"type": "boolean"},
        "model": {"type": ["string", "null"]},
        "history_db": {"type": "string"},
    },
}


def _one_of(choices):
    def check(instance, attribute, value):
        if value not in choices:
            raise ConfigError(f"{attribute.name} must be one of {choices}, got {value!r}")

    return check


def _at_least(bound):
    def check(instance, attribute, value):
        if value < bound:
            raise ConfigError(f"{attribute.name} must be >= {bound}, got {value}")

    return check


def _finite(instance, attribute, value):
    if not math.isfinite(value):
        raise ConfigError(f"{attribute.name} must be finite, got {value}")


def _seed(instance, attribute, value):
    if not 0 <= value <= MAX_SEED:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {value}")


def _grid_points(instance, attribute, value):
    if value < 16 or value & (value - 1):
        raise ConfigError(f"grid_points must be a power of two >= 16, got {value}")


def _unit_interval(instance, attribute, value):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{attribute.name} must lie in [0, 1], got {value}")


def _positive(instance, attribute, value):
    if not value > 0:
        raise ConfigError(f"{attribute.name} must be positive, got {value}")


def _mixture(instance, attribute, value):
    if len(value) != 4 or any(w < 0 for w in value) or abs(sum(value) - 1.0) > 1e-12:
        raise ConfigError(f"mixture must be four non-negative weights summing to 1, got {list(value)}")


def _floats(values):
    return tuple(float(v) for v in values)


@frozen
class RunConfig:
    subcommand: str = field(default="pbr", validator=_one_of(SUBCOMMANDS))
    seed: int = field(default=7, converter=int, validator=_seed)
    trials: int = field(default=100_000, converter=int, validator=_at_least(1))
    n: int = field(default=400, converter=int, validator=_at_least(0))
    g: float = field(default=0.005, converter=float, validator=_finite)
    grid_points: int = field(default=512, converter=int, validator=_grid_points)
    width: float = field(default=1.0, converter=float, validator=_positive)
    q: float = field(default=1.0, converter=float, validator=_unit_interval)
    theta: float = field(default=math.pi / 6, converter=float, validator=_finite)
    momentum: float = field(default=0.0, converter=float, validator=_finite)
    observable: str = field(default="Z", validator=_one_of(OBSERVABLES))
    mode: str = field(default="deterministic", validator=_one_of(MODES))
    resolution: int = field(default=8, converter=int, validator=_at_least(1))
    alice_basis: str = field(default="Z", validator=_one_of(ALICE_BASES))
    device_dim: int = field(default=2, converter=int, validator=_at_least(1))
    mixture: tuple = field(default=(0.25, 0.25, 0.25, 0.25), converter=_floats, validator=_mixture)
    scenario: str = field(default="pbr", validator=_one_of(SCENARIOS))
    output: str | None = None
    fmt: str = field(default="json", validator=_one_of(FORMATS))
    dump_joint: bool = False
    model: str | None = None
    history_db: str = HISTORY_DB

    @property
    def output_dir(self):
        return Path(self.output or Path("runs") / self.subcommand)

    def echo(self):
        # the ledger location is not part of a run's identity
        data = attrs.asdict(self)
        data.pop("history_db")
        data["mixture"] = list(self.mixture)
        data["output"] = self.output_dir.as_posix()
        return data


def read_config_file(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    validate_config_data(data)
    return data


def validate_config_data(data):
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc


def load_config(subcommand, path=None, **overrides):
    # flags override the file; None means not passed
    data = read_config_file(path) if path else {}
    data.update({k: list(v) if isinstance(v, tuple) else v for k, v in overrides.items() if v is not None})
    data["subcommand"] = subcommand
    validate_config_data(data)
    try:
        return RunConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
