"""Run configuration: strict YAML parsing into validated systems and parameters."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import builtins
from .errors import ArtifactError, InvalidInputError
from .systems import (CIRCLE_EXPANDING, LINEAR_TORAL, TRUNCATED_OPERATOR, CommutingSystem,
                      circle_expanding, linear_toral, truncated_operator, validate_nu)

COMMANDS = ("spectrum", "random-spectrum", "splitting", "entropy", "friedland", "verify")
FORMATS = ("json", "csv")
UNITS = ("nats", "bits")

PARAM_DEFAULTS = {
    "p": None,
    "n": 10000,
    "samples": 50,
    "burn_in": None,
    "epsilon": 0.05,
    "n_range": [8, 12],
    "beta": 0.1,
    "grid": 8,
    "truncation_dims": None,
    "x0": None,
    "lambda_alpha": 0.0,
    "method": "auto",
}
MAP_KEYS = {"builtin", "kind", "matrix", "factor", "dim", "tail_norm_bound", "radius", "name"}
SYSTEM_KEYS = {"builtin", "f1", "f2", "nu", "name"}
TOP_KEYS = {"system", "map", "command", "params", "seed", "output", "format", "jobs", "units"}


class ConfigError(ArtifactError, ValueError):
    """A config problem, tagged with the offending key path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _strict(section: dict, allowed: set, path: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(path, f"expected a mapping, got {type(section).__name__}")
    unknown = sorted(set(section) - allowed)
    if unknown:
        where = ", ".join(f"{path}.{k}" if path else str(k) for k in unknown)
        raise ConfigError(where, f"unknown key(s); allowed: {sorted(allowed)}")


def _wrap(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (InvalidInputError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def build_map(spec, path: str):
    if isinstance(spec, str):
        return _wrap(path, builtins.builtin_map, spec)
    _strict(spec, MAP_KEYS, path)
    if "builtin" in spec:
        if set(spec) - {"builtin"}:
            raise ConfigError(path, "a builtin map takes no other keys")
        return _wrap(f"{path}.builtin", builtins.builtin_map, spec["builtin"])
    kind = spec.get("kind")
    name = spec.get("name", kind or "map")
    if kind == LINEAR_TORAL:
        m = _wrap(f"{path}.matrix", linear_toral, spec.get("matrix"), name=name)
    elif kind == CIRCLE_EXPANDING:
        m = _wrap(f"{path}.factor", circle_expanding, spec.get("factor"), name)
    elif kind == TRUNCATED_OPERATOR:
        m = _wrap(f"{path}.matrix", truncated_operator, spec.get("matrix"),
                  tail_norm_bound=spec.get("tail_norm_bound"), radius=spec.get("radius", 1.0),
                  name=name)
    else:
        raise ConfigError(f"{path}.kind",
                          f"must be one of {[LINEAR_TORAL, CIRCLE_EXPANDING, TRUNCATED_OPERATOR]}")
    if "dim" in spec and spec["dim"] != m.dim:
        raise ConfigError(f"{path}.dim", f"declared {spec['dim']} but the map has dim {m.dim}")
    return m


def build_system(spec, path: str = "system") -> CommutingSystem:
    if isinstance(spec, str):
        return _wrap(path, builtins.builtin_system, spec)
    _strict(spec, SYSTEM_KEYS, path)
    nu = spec.get("nu")
    if nu is not None:
        nu = _wrap(f"{path}.nu", validate_nu, nu)
    if "builtin" in spec:
        if set(spec) - {"builtin", "nu"}:
            raise ConfigError(path, "a builtin system takes only 'nu' besides 'builtin'")
        return _wrap(f"{path}.builtin", builtins.builtin_system, spec["builtin"], nu)
    for key in ("f1", "f2"):
        if key not in spec:
            raise ConfigError(f"{path}.{key}", "missing generator")
    f1, f2 = build_map(spec["f1"], f"{path}.f1"), build_map(spec["f2"], f"{path}.f2")
    return _wrap(path, CommutingSystem.build, f1, f2, nu or (0.5, 0.5),
                 name=spec.get("name", "system"))


@dataclass
class RunConfig:
    command: str
    params: dict
    seed: int = 0
    output: str = "reports"
    format: str = "json"
    jobs: int | None = None
    units: str = "nats"
    system_spec: object = None
    map_spec: object = None
    raw: dict = field(default_factory=dict)

    def system(self) -> CommutingSystem:
        if self.system_spec is None:
            raise ConfigError("system", f"command {self.command!r} needs a system")
        return build_system(self.system_spec)

    def single_map(self):
        return None if self.map_spec is None else build_map(self.map_spec, "map")

    def canonical(self) -> dict:
        """The fields that determine results; output location, format and jobs excluded."""
        return {"command": self.command, "params": self.params, "seed": self.seed,
                "system": self.system_spec, "map": self.map_spec, "units": self.units}

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _check_params(params: dict) -> dict:
    _strict(params, set(PARAM_DEFAULTS), "params")
    out = dict(PARAM_DEFAULTS)
    out.update(params)
    ints = ("p", "n", "samples", "burn_in", "grid")
    for k in ints:
        v = out[k]
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            raise ConfigError(f"params.{k}", f"expected a nonnegative integer, got {v!r}")
    for k in ("epsilon", "beta"):
        if not isinstance(out[k], (int, float)) or out[k] <= 0:
            raise ConfigError(f"params.{k}", f"expected a positive number, got {out[k]!r}")
    nr = out["n_range"]
    if not (isinstance(nr, list) and len(nr) == 2 and all(isinstance(v, int) for v in nr)
            and 0 <= nr[0] and nr[1] - nr[0] >= 3):
        raise ConfigError("params.n_range", "expected [lo, hi] with at least 4 values")
    if out["method"] not in ("auto", "greedy", "itinerary"):
        raise ConfigError("params.method", "expected auto, greedy or itinerary")
    if out["x0"] is not None:
        x0 = np.asarray(out["x0"], float)
        if not np.all(np.isfinite(x0)):
            raise ConfigError("params.x0", "must be finite")
    return out


def parse_config(data: dict, overrides: dict | None = None) -> RunConfig:
    if data is None:
        data = {}
    _strict(data, TOP_KEYS, "")
    data = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    command = data.get("command")
    if command not in COMMANDS:
        raise ConfigError("command", f"expected one of {list(COMMANDS)}, got {command!r}")
    fmt = data.get("format", "json")
    if fmt not in FORMATS:
        raise ConfigError("format", f"expected json or csv, got {fmt!r}")
    units = data.get("units", "nats")
    if units not in UNITS:
        raise ConfigError("units", f"expected nats or bits, got {units!r}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed", f"expected a nonnegative integer, got {seed!r}")
    jobs = data.get("jobs")
    if jobs is not None and (not isinstance(jobs, int) or jobs < 1):
        raise ConfigError("jobs", f"expected a positive integer, got {jobs!r}")
    if data.get("system") is None and data.get("map") is None:
        raise ConfigError("system", "a system or a map is required")
    cfg = RunConfig(command=command, params=_check_params(data.get("params") or {}), seed=seed,
                    output=str(data.get("output", "reports")), format=fmt, jobs=jobs, units=units,
                    system_spec=data.get("system"), map_spec=data.get("map"), raw=data)
    # build once so that every error surfaces before any work starts
    if cfg.system_spec is not None:
        cfg.system()
    if cfg.map_spec is not None:
        cfg.single_map()
    return cfg


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError("", f"{path}: YAML error at {where}: {getattr(exc, 'problem', exc)}") from exc
    return parse_config(data, overrides)
