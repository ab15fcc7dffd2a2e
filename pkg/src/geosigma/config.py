"""Run configuration: JSON file validated against the bundled schema."""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources

import jsonschema

DEFAULTS = {
    "medium": {"dim": 2, "samples_per_axis": 256},
    "direction": {},
    "numerics": {
        "delta": 1 / 64,
        "eps_tail": 1e-8,
        "T_multipliers": [4.0, 6.0, 8.0],
        "profile": "exact",
        "m_list": [1, 2, 4, 8],
        "workers": 1,
        "n_halfplanes": 360,
        "oracle": {"T": 8.0, "delta": 1 / 32, "bc": "profile", "max_iter": 50000},
    },
    "output": {"directory": ".", "formats": ["csv"]},
}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def load_schema() -> dict:
    with resources.files("geosigma").joinpath("config_schema.json").open() as fh:
        return json.load(fh)


def _key_of(err: jsonschema.ValidationError) -> str:
    path = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        # message is "'name' is a required property"
        missing = err.message.split("'")[1]
        path.append(missing)
    elif err.validator == "additionalProperties":
        extra = err.message.split("'")[1] if "'" in err.message else "?"
        path.append(extra)
    return ".".join(path) or "<root>"


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    raw: dict

    @property
    def medium(self) -> dict:
        return self.raw["medium"]

    @property
    def direction(self) -> dict:
        return self.raw["direction"]

    @property
    def numerics(self) -> dict:
        return self.raw["numerics"]

    @property
    def output(self) -> dict:
        return self.raw["output"]

    def directions(self):
        """Explicit directions: integer vectors first, then unit vectors from angles."""
        d = self.direction
        out = []
        if "p" in d:
            ps = d["p"]
            out.extend([tuple(ps)] if isinstance(ps[0], int) else [tuple(p) for p in ps])
        for ang in d.get("angles_deg", []):
            r = math.radians(ang)
            out.append((math.cos(r), math.sin(r)))
        return out


def validate(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(list(e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        raise ConfigError(_key_of(e), e.message)
    cfg = RunConfig(_merge(DEFAULTS, data))
    if any(not any(p) for p in cfg.directions()):
        raise ConfigError("direction.p", "zero direction vector")
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    return validate(data)
