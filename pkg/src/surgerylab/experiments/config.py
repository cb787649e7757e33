"""Strict JSON experiment configs with defaults and a content hash."""
from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

__all__ = ["ConfigError", "SCHEMA_VERSION", "DEFAULTS", "load_config", "validate_config",
           "config_hash"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid experiment configuration."""


_TUNNEL = {"A_model": 4.0, "delta_fraction": 0.25, "j_schedule": "ceil_inverse", "n": 3}

DEFAULTS: dict = {
    "pipe": {
        "schema": SCHEMA_VERSION, "experiment": "pipe", "name": "pipe-conformal-s2",
        "base": {"kind": "conformal", "amplitude": 0.1},
        "sweep": {"variable": "rho", "values": [0.4, 0.2, 0.1, 0.05]},
        "resolution": 0.05, "ell": 1.0, "n_ball": 40, "n_sectors": None,
        "tunnel": dict(_TUNNEL),
        "axiom_sample": 200, "seed": 0, "output": "out/pipe",
        "targets": {"lambda_slope": 0.9, "eps_slope": 1.8, "c2_slope": 3.6, "r2": 0.95},
    },
    "net": {
        "schema": SCHEMA_VERSION, "experiment": "net", "name": "net-round-s2",
        "base": {"kind": "round", "radius": 1.0},
        "target": {"kind": "scaled", "C": 1.5},
        "sweep": {"variable": "eps", "values": [0.4, 0.2, 0.1]},
        "resolution": 0.05, "port_mode": "auto",
        "tunnel": dict(_TUNNEL),
        "pipe_constants": {"A_T1": 1.0, "A_T2": 1.0, "A_T3": 1.0},
        "bound_dimension": 3, "mass": None,
        "axiom_sample": 300, "x_sources": 64, "seed": 0, "output": "out/net",
        "targets": {"string_factor": 12.0, "ratio_tol": 1e-6, "decrease_factor": 1.8,
                    "decrease_below": 0.2, "normalized_tol": 0.05},
    },
    "golden": {
        "schema": SCHEMA_VERSION, "experiment": "golden", "name": "bounds-golden",
        "table": None, "golden": None, "seed": 0, "output": "out/golden",
    },
    "slope": {
        "schema": SCHEMA_VERSION, "experiment": "slope", "name": "slope",
        "csv": None, "x": "rho", "y": None, "min_slope": None, "min_r2": None,
        "seed": 0, "output": "out/slope",
    },
}

# nested dicts whose keys are fixed (values may be overridden)
_FIXED_NESTED = ("sweep", "tunnel", "targets", "pipe_constants")


def _merge(default: dict, given: dict, path: str) -> dict:
    out = copy.deepcopy(default)
    for k, v in given.items():
        if k not in default:
            raise ConfigError(f"unknown key {path}{k!r}")
        if k in _FIXED_NESTED and isinstance(default[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{path}{k} must be an object")
            out[k] = _merge(default[k], v, f"{path}{k}.")
        else:
            out[k] = copy.deepcopy(v)
    return out


def validate_config(raw: dict, kind: str | None = None) -> dict:
    """Fill defaults and check invariants.

    Parameters
    ----------
    raw : dict
        Parsed JSON.  ``schema`` must equal :data:`SCHEMA_VERSION` and
        ``experiment`` must name a known experiment (or ``kind`` supplies it).
    kind : str, optional
        Experiment expected by the caller (the CLI subcommand).
    """
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    exp = raw.get("experiment", kind)
    if exp not in DEFAULTS:
        raise ConfigError(f"unknown experiment {exp!r}")
    if kind is not None and exp != kind:
        raise ConfigError(f"config is for {exp!r}, not {kind!r}")
    if raw.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema {raw.get('schema')!r}")
    cfg = _merge(DEFAULTS[exp], raw, "")
    cfg["experiment"] = exp
    if exp in ("pipe", "net"):
        sweep = cfg["sweep"]
        want = "rho" if exp == "pipe" else "eps"
        if sweep["variable"] != want:
            raise ConfigError(f"{exp} sweeps must vary {want}")
        vals = sweep["values"]
        if not vals or not all(isinstance(v, (int, float)) and v > 0 for v in vals):
            raise ConfigError("sweep values must be positive numbers")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep values must be strictly decreasing")
        if not cfg["resolution"] > 0:
            raise ConfigError("resolution must be positive")
        if cfg["tunnel"]["j_schedule"] != "ceil_inverse":
            raise ConfigError("only the ceil_inverse schedule is supported")
    if exp == "pipe" and max(cfg["sweep"]["values"]) > 0.5:
        raise ConfigError("rho values must not exceed 0.5")
    if exp == "net":
        tgt = cfg["target"]
        if tgt.get("kind") == "scaled":
            if not float(tgt.get("C", 0)) > 1:
                raise ConfigError("scaled targets need C > 1 so that c = 1/C lies in (0, 1)")
        elif tgt.get("kind") == "conformal":
            if not float(tgt.get("offset", 0)) + abs(float(tgt.get("amplitude", 0))) < 0:
                raise ConfigError("conformal targets need offset + |amplitude| < 0")
        else:
            raise ConfigError(f"unknown target kind {tgt.get('kind')!r}")
    if exp == "slope" and not cfg["csv"]:
        raise ConfigError("slope configs need a csv path")
    return cfg


def load_config(path, kind: str | None = None) -> dict:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    cfg = validate_config(raw, kind)
    cfg["_config_dir"] = str(Path(path).resolve().parent)
    return cfg


def config_hash(cfg: dict) -> str:
    """Short sha256 of the canonical JSON (private ``_`` keys excluded)."""
    public = {k: v for k, v in cfg.items() if not k.startswith("_")}
    blob = json.dumps(public, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
