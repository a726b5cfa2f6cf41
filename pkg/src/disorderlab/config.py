"""Run configuration: a flat human-editable ``key = value`` text file with
dotted keys, schema-validated per command before any compute.

Overrides, in increasing precedence: config file, environment variables
(``DISORDERLAB_<KEY>`` with dots written as double underscores), then
``--set key=value`` flags.  Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
import os

from .errors import ConfigError

ENV_PREFIX = "DISORDERLAB_"
REQUIRED = object()


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str):
    return tuple(float(p) for p in str(text).split(",") if p.strip() != "")


_COERCE = {
    "int": int,
    "float": float,
    "str": str,
    "bool": _parse_bool,
    "floats": _parse_floats,
}


# schema: key -> (type name, default or REQUIRED)
COMMON_KEYS = {
    "seed": ("int", 0),
}

GEOMETRY_KEYS = {
    "geometry.kind": ("str", "example1"),      # example1 | dyadic | greedy
    "geometry.R": ("float", 1.0),
    "geometry.k_max": ("int", 4),
    "geometry.gamma": ("float", 1.0),
    "geometry.alpha": ("float", 0.0),
    "geometry.half_extent": ("float", 32.0),   # greedy only
    "geometry.radius_scale": ("float", 0.25),  # greedy only
    "geometry.beta": ("float", 1.0),           # greedy only
}

DISTRIBUTION_KEYS = {
    "distribution.kind": ("str", "uniform"),
    "distribution.a": ("float", -1.0),
    "distribution.b": ("float", 1.0),
    "distribution.shape": ("floats", ()),
}

GRID_KEYS = {
    "grid.d": ("int", 1),
    "grid.L": ("float", 96.0),
    "grid.N": ("int", 2048),
    "grid.boundary": ("str", "dirichlet"),
}

SOLVER_KEYS = {
    "solver.e_lo": ("float", 0.0),
    "solver.e_hi": ("float", 10.0),
    "solver.k_max": ("int", 64),
    "solver.tol": ("float", 1e-8),
}

EVOLVE_KEYS = {
    "evolve.t_lo": ("float", 10.0),
    "evolve.t_hi": ("float", 100.0),
    "evolve.points": ("int", 16),
    "f.centers": ("floats", (3.0,)),
    "f.width": ("float", 1.0),
}

WAVELET_KEYS = {
    "wavelet.d": ("int", 2),
    "wavelet.K": ("int", 2),
    "wavelet.n2_max": ("int", 64),
    "wavelet.scale_cap": ("int", 8),
}

SCHEMAS = {
    "islands": {**COMMON_KEYS, **GEOMETRY_KEYS,
                "density.samples": ("int", 200000)},
    "spectrum": {**COMMON_KEYS, **GEOMETRY_KEYS, **DISTRIBUTION_KEYS,
                 **GRID_KEYS, **SOLVER_KEYS,
                 "e0.points_per_axis": ("int", 64)},
    "mourre": {**COMMON_KEYS, **GEOMETRY_KEYS, **DISTRIBUTION_KEYS,
               **GRID_KEYS, **SOLVER_KEYS,
               "e0.points_per_axis": ("int", 64),
               "mourre.window_lo": ("float", 1.0),
               "mourre.window_hi": ("float", 2.0)},
    "cook": {**COMMON_KEYS, **DISTRIBUTION_KEYS, **EVOLVE_KEYS,
             **WAVELET_KEYS, **GRID_KEYS,
             "model": ("str", "wavelet"),
             "geometry.kind": ("str", "dyadic"),
             "geometry.R": ("float", 1.0),
             "geometry.k_max": ("int", 4),
             "geometry.alpha": ("float", 0.0)},
    "wavelet-check": {**COMMON_KEYS, **WAVELET_KEYS,
                      "f.centers": ("floats", (3.0,)),
                      "f.width": ("float", 1.0),
                      "check.n1_max": ("int", 2),
                      "check.n2_max": ("int", 4)},
    "ids": {**COMMON_KEYS, **GEOMETRY_KEYS, **DISTRIBUTION_KEYS,
            **GRID_KEYS, "ids.bins": ("int", 40),
            "ids.e_max": ("float", 0.0)},
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config_file(path: str) -> dict:
    """Read a config: plain key-value text, or a manifest/JSON file whose
    'config' entry is reused verbatim (manifest re-runs)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = json.loads(text)
        cfg = obj.get("config", obj)
        return {k: str(v) if not isinstance(v, (list, tuple))
                else ",".join(str(x) for x in v) for k, v in cfg.items()}
    return parse_config_text(text)


def env_overrides() -> dict:
    out = {}
    for name, value in os.environ.items():
        if name.startswith(ENV_PREFIX):
            key = name[len(ENV_PREFIX):].lower().replace("__", ".")
            out[key] = value
    return out


def resolve(command: str, raw: dict, sets=()) -> dict:
    """Validate raw string values against the command schema and coerce.

    Raises ConfigError naming the offending field for unknown keys, type
    errors and range violations.
    """
    schema = SCHEMAS.get(command)
    if schema is None:
        raise ConfigError(f"unknown command {command!r}")
    merged = dict(raw)
    merged.update(env_overrides())
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        merged[key.strip()] = value.strip()
    lower_to_key = {k.lower(): k for k in schema}
    out = {}
    for key, value in merged.items():
        if key not in schema:
            key = lower_to_key.get(key.lower(), key)
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for {command}")
        typ, _ = schema[key]
        try:
            out[key] = _COERCE[typ](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    for key, (typ, default) in schema.items():
        if key not in out:
            if default is REQUIRED:
                raise ConfigError(f"missing required config key {key!r}")
            out[key] = default
    _check_ranges(out)
    return out


def _check_ranges(cfg: dict) -> None:
    checks = [
        ("geometry.gamma", lambda v: 0 < v <= 1, "must lie in (0, 1]"),
        ("geometry.R", lambda v: v > 0, "must be positive"),
        ("geometry.k_max", lambda v: v >= 0, "must be >= 0"),
        ("geometry.alpha", lambda v: v >= 0, "must be >= 0"),
        ("grid.N", lambda v: v > 0 and v % 2 == 0, "must be positive even"),
        ("grid.L", lambda v: v > 0, "must be positive"),
        ("grid.boundary", lambda v: v in ("dirichlet", "periodic"),
         "must be dirichlet or periodic"),
        ("f.width", lambda v: v > 0, "must be positive"),
        ("density.samples", lambda v: v >= 1, "must be >= 1"),
        ("ids.bins", lambda v: v >= 1, "must be >= 1"),
        ("solver.k_max", lambda v: v >= 1, "must be >= 1"),
    ]
    for key, ok, msg in checks:
        if key in cfg and not ok(cfg[key]):
            raise ConfigError(f"config field {key!r} {msg} (got {cfg[key]})")


def canonical_text(cfg: dict) -> str:
    lines = []
    for key in sorted(cfg):
        value = cfg[key]
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_text(cfg).encode()).hexdigest()
