"""Run configuration: ``key = value`` text files with typed defaults and a stable hash."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

DEFAULTS: dict[str, object] = {
    "seed": 0,
    "null_tol": 1e-6,
    "sigma": 1e4,
    "dense_max_dim": 4096,
    "iter_tol": 1e-8,
    "maxiter": 1000,
    "num_eigs": 40,
    "frame_tol": 1e-6,
    "rank_tol": 1e-7,
    "residual_tol": 1e-8,
    "fd_step": 1e-3,
    "fd_tol": 1e-4,
    "fd_directions": 10,
    "dilation_samples": 20,
    "deformation_steps": "0.01,0.02",
    "derivative_tol": 1e-6,
}


class ConfigError(ValueError):
    pass


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    try:
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from exc
    return raw


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment) over the defaults."""
    cfg = dict(DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = _coerce(key, val.strip())
    return cfg


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    cfg = parse_config(Path(path).read_text(encoding="utf-8")) if path else dict(DEFAULTS)
    for key, val in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
        cfg[key] = _coerce(key, str(val)) if isinstance(val, str) else val
    return cfg


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form of the resolved configuration."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def steps(cfg: dict) -> tuple[float, ...]:
    return tuple(float(x) for x in str(cfg["deformation_steps"]).split(","))
