"""Run configuration: one YAML file, per-command blocks, flag overrides.

Only ``medium.c`` and ``medium.l`` are required. Every other key has a
default listed in :data:`DEFAULTS`; a file only needs the keys it changes.

Grid values accept three spellings: a scalar, a list, or a mapping
``{start, stop, num}`` expanded with ``numpy.linspace``.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import ConfigurationError
from .modal import MediumParams

ENV_VAR = "KVGREEN_CONFIG"

DEFAULTS: dict[str, Any] = {
    "medium": {"eps": 0.0},
    "output": "-",
    "green": {
        "x": [0.5], "xi": [0.5], "t": {"start": 0.5, "stop": 2.0, "num": 4},
        "max_modes": 20000, "tail_tol": 1e-10,
    },
    "solve": {
        "data": "sect5", "mode": 1, "amplitude": 1.0,
        "center": 0.5, "width": 0.25,
        "tables": {}, "boundary": {},
        "x": "auto", "t": [1.0],
        "max_modes": 256,
    },
    "verify": {
        "tolerances": {
            "laplace_identity": 1e-10,
            "gaussian_laplace": 1e-6,
            "bessel_laplace": 1e-6,
            "sine_bessel": 1e-6,
            "window_tail": 0.01,
            "mode_eigenrelation": 1e-6,
            "remainder_single_mode": 1e-10,
            "remainder_monotone": 0.5,
            "slow_time_eigenrelation": 1e-8,
            "diffusion_wave_order": 0.2,
            "theta_form": 1e-6,
        },
        "tolerance": None,
        "window": {"chi0": 0.5, "sigma0": 0.5},
        "eps_ladder": [0.2, 0.1, 0.05, 0.025],
    },
    "transform": {"signal": "mode", "n": 1, "value": 1.0, "freq": 1.0,
                  "x": 0.5, "xi": 0.5, "t": [1.0]},
    "probe": {"x": 0.5, "xi": 0.5, "t": 2.0,
              "eps_ladder": [0.2, 0.1, 0.05, 0.025, 0.0125], "n_modes": None},
}


@dataclass
class RunConfig:
    params: MediumParams
    blocks: dict[str, dict] = field(default_factory=dict)
    output: str = "-"
    source: Path | None = None

    def block(self, name: str) -> dict:
        return self.blocks.get(name, {})


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _set_path(tree: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"cannot set {dotted}: {key} is not a mapping")
    node[keys[-1]] = value


def parse_override(text: str) -> tuple[str, Any]:
    """``key.path=value`` with the value parsed as YAML."""
    if "=" not in text:
        raise ConfigurationError(f"override {text!r} must look like key.path=value")
    key, raw = text.split("=", 1)
    try:
        return key.strip(), yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse override value {raw!r}: {exc}") from None


def load_config(path: str | os.PathLike | None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Read the config file (or ``$KVGREEN_CONFIG``), apply overrides, validate."""
    tree: dict = {}
    source = None
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is not None:
        source = Path(path)
        try:
            text = source.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {source}: {exc}") from None
        try:
            tree = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"invalid YAML in {source}: {exc}") from None
        if not isinstance(tree, dict):
            raise ConfigurationError("config file must hold a mapping")
    for key, value in (overrides or {}).items():
        _set_path(tree, key, value)
    merged = _merge(DEFAULTS, tree)
    medium = merged.get("medium", {})
    missing = [k for k in ("c", "l") if medium.get(k) is None]
    if missing:
        raise ConfigurationError(f"medium.{missing[0]} is required")
    try:
        params = MediumParams(float(medium["c"]), float(medium["l"]), float(medium.get("eps", 0.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid medium: {exc}") from None
    blocks = {k: v for k, v in merged.items() if isinstance(v, dict) and k != "medium"}
    return RunConfig(params, blocks, str(merged.get("output", "-")), source)


def grid_values(spec: Any, name: str) -> np.ndarray:
    """Expand a grid entry into a 1-D float array."""
    if spec is None:
        return np.empty(0)
    if isinstance(spec, str):
        raise ConfigurationError(f"{name}: unrecognized grid {spec!r}")
    if isinstance(spec, dict):
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (KeyError, TypeError, ValueError):
            raise ConfigurationError(f"{name}: grid mapping needs numeric start, stop, num") from None
        if num < 0:
            raise ConfigurationError(f"{name}: num must be >= 0")
        return np.linspace(start, stop, num)
    try:
        values = np.atleast_1d(np.asarray(spec, dtype=float))
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name}: grid entries must be numbers") from None
    if values.ndim != 1 or not np.all(np.isfinite(values)):
        raise ConfigurationError(f"{name}: grid must be a flat list of finite numbers")
    return values
