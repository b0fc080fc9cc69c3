"""Scenario configuration files: JSON with a fixed key vocabulary.

Canonical keys (all optional, defaults in parentheses):
    M (100), d_over_lambda (0.25), K (10), L (50), theta0_deg (30),
    spread_deg (40), snr_db (0), phi_mode ("auto"), phi_deg (null),
    seed (0).

Unknown keys are rejected so typos never silently fall back to defaults.
Angles are degrees in files and on the CLI; radians internally.
"""

from __future__ import annotations

import json

CANONICAL_KEYS = (
    "M",
    "d_over_lambda",
    "K",
    "L",
    "theta0_deg",
    "spread_deg",
    "snr_db",
    "phi_mode",
    "phi_deg",
    "seed",
)

DEFAULTS = {
    "M": 100,
    "d_over_lambda": 0.25,
    "K": 10,
    "L": 50,
    "theta0_deg": 30.0,
    "spread_deg": 40.0,
    "snr_db": 0.0,
    "phi_mode": "auto",
    "phi_deg": None,
    "seed": 0,
}

_INT_KEYS = ("M", "K", "L", "seed")
_FLOAT_KEYS = ("d_over_lambda", "theta0_deg", "spread_deg", "snr_db", "phi_deg")


def load_config(path) -> dict:
    """Read and validate a configuration file; raises ValueError listing every problem."""
    with open(path) as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise ValueError("config root must be a key/value object")
    return validate_config(raw)


def validate_config(raw: dict) -> dict:
    errors = []
    unknown = sorted(set(raw) - set(CANONICAL_KEYS))
    if unknown:
        errors.append(f"unknown keys: {', '.join(unknown)}")
    cfg = dict(DEFAULTS)
    for key, value in raw.items():
        if key not in CANONICAL_KEYS:
            continue
        if key in _INT_KEYS:
            if not isinstance(value, int) or isinstance(value, bool):
                errors.append(f"{key}: expected an integer, got {value!r}")
                continue
        elif key in _FLOAT_KEYS:
            if value is not None and not isinstance(value, (int, float)) or isinstance(value, bool):
                errors.append(f"{key}: expected a number, got {value!r}")
                continue
            value = None if value is None else float(value)
        cfg[key] = value
    if cfg["phi_mode"] not in ("auto", "manual"):
        errors.append(f"phi_mode: must be 'auto' or 'manual', got {cfg['phi_mode']!r}")
    if cfg["phi_mode"] == "manual" and cfg["phi_deg"] is None:
        errors.append("phi_deg: required when phi_mode is 'manual'")
    for key, low in (("M", 1), ("K", 1), ("L", 1)):
        if cfg[key] < low:
            errors.append(f"{key}: must be >= {low}, got {cfg[key]}")
    if cfg["d_over_lambda"] <= 0:
        errors.append(f"d_over_lambda: must be > 0, got {cfg['d_over_lambda']}")
    if cfg["spread_deg"] <= 0:
        errors.append(f"spread_deg: must be > 0, got {cfg['spread_deg']}")
    if errors:
        raise ValueError("; ".join(errors))
    return cfg
