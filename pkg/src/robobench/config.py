"""Canonical serialization, config digests, and the run-config file format.

Everything written to disk goes through :func:`canonical_json` so identical
configs and identical episodes produce identical bytes. Run configs are INI
files (see README for the schema); values given on the command line override
file values, and the digest is computed over the fully resolved mapping.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from typing import Any, Dict, Mapping, Optional

import numpy as np

from .errors import ConfigurationError


def to_jsonable(value: Any) -> Any:
    """Recursively convert numpy containers/scalars to plain Python types."""
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def canonical_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, no whitespace, repr-exact floats."""
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def config_digest(mapping: Mapping[str, Any]) -> str:
    """Hex digest identifying a resolved configuration."""
    return hashlib.sha256(canonical_json(dict(mapping)).encode("ascii")).hexdigest()


# Defaults for the [run] section.
RUN_DEFAULTS: Dict[str, Any] = {
    "task": None,
    "backend": "sim",
    "seed": 0,
    "episodes": 1,
    "horizon": 100,
    "dt": 0.1,
    "policy": "zero",
    "output": "runs",
}

# Defaults for the [cem] section.
CEM_DEFAULTS: Dict[str, Any] = {
    "population": 64,
    "elite_frac": 0.125,
    "iterations": 50,
    "sigma": 0.03,
    "std_floor": 0.02,
    "episodes_per_candidate": 3,
    "train_horizon": 30,
}

# Defaults for the [hardware] section.
HARDWARE_DEFAULTS: Dict[str, Any] = {
    "device": "",
    "baud": 1_000_000,
    "ids": "",
    "object_id": -1,
}

_INT_KEYS = {"seed", "episodes", "horizon", "population", "iterations",
             "episodes_per_candidate", "train_horizon", "baud", "object_id"}
_FLOAT_KEYS = {"dt", "elite_frac", "sigma", "std_floor",
               "position_margin_deg", "velocity_max", "current_max"}


def _coerce(key: str, raw: str) -> Any:
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"config value {key} = {raw!r}: {exc}") from None
    return raw


def load_config_file(path: str) -> Dict[str, Dict[str, Any]]:
    """Parse an INI run config into {section: {key: typed value}}."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigurationError(f"config file not found: {path}")
    out: Dict[str, Dict[str, Any]] = {}
    for section in parser.sections():
        out[section] = {
            key: _coerce(key, value) for key, value in parser.items(section)
        }
    return out


def resolve(section_defaults: Mapping[str, Any],
            file_section: Optional[Mapping[str, Any]] = None,
            overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Layer defaults < config file < explicit overrides; reject unknown keys."""
    out = dict(section_defaults)
    for source in (file_section or {}), (overrides or {}):
        for key, value in source.items():
            if key not in out:
                raise ConfigurationError(f"unknown config key: {key}")
            if value is not None:
                out[key] = value
    return out
