"""Run configuration: defaults, YAML files and flag overrides.

A configuration is a nested mapping.  Precedence is flag > file > default;
the fully resolved mapping (including resolved axis values) is embedded in
every output so a run can be reproduced bit for bit from its results.

Top-level schema::

    experiment: one of static-imbalance, freq-scan, amp-scan, spectrum,
                floquet-cell, ipr-scaling
    model:      n_sites, hopping, disorder_strength, incommensuration,
                phase, drive_amplitude, drive_frequency (linear, units J)
    grid:       per-experiment axes; an axis is either
                {values: [..]} or {start, stop, count, spacing: linear|log}
    protocol:   n_periods, samples_per_period, static_t_final,
                static_n_samples
    integrator: rel_tol, abs_tol, steps_per_period
    phases:     count, mode (uniform | random), seed (random mode only)
    output:     directory, heatmaps (bool)
    workers:    process count for the scan pool
"""

from __future__ import annotations

import copy
import math
from typing import Any

import numpy as np
import yaml

from .errors import ConfigError
from .model import DEFAULT_INCOMMENSURATION, ModelParams
from .sweeps import (DEFAULT_PHASE_COUNT, ScanAxis, SweepSettings,
                     random_phases, uniform_phases)

EXPERIMENTS = ("static-imbalance", "freq-scan", "amp-scan", "spectrum",
               "floquet-cell", "ipr-scaling")

_BASE_DEFAULTS: dict[str, Any] = {
    "model": {
        "n_sites": 50,
        "hopping": 1.0,
        "disorder_strength": 3.0,
        "incommensuration": DEFAULT_INCOMMENSURATION,
        "phase": 0.0,
        "drive_amplitude": 3.0,
        "drive_frequency": 0.005,
    },
    "protocol": {
        "n_periods": 100,
        "samples_per_period": 20,
        "static_t_final": 1000.0,
        "static_n_samples": 2000,
    },
    "integrator": {
        "rel_tol": 1e-10,
        "abs_tol": 1e-12,
        "steps_per_period": None,
    },
    "phases": {
        "count": DEFAULT_PHASE_COUNT,
        "mode": "uniform",
        "seed": None,
    },
    "output": {
        "directory": "results",
        "heatmaps": True,
    },
    "workers": 1,
}

_GRID_DEFAULTS: dict[str, dict[str, Any]] = {
    "static-imbalance": {
        "disorder": {"start": 0.0, "stop": 4.0, "count": 21},
    },
    "freq-scan": {
        "disorder": {"start": 2.0, "stop": 5.0, "count": 21},
        "ratio": {"start": 0.25, "stop": 16.0, "count": 25, "spacing": "log"},
    },
    "amp-scan": {
        "disorder": {"start": 2.0, "stop": 5.0, "count": 16},
        "amplitude": {"start": 0.0, "stop": 4.0, "count": 21},
    },
    "spectrum": {
        "disorder": {"start": 0.0, "stop": 5.0, "count": 51},
    },
    "floquet-cell": {},
    "ipr-scaling": {
        "sizes": [50, 100, 200, 500],
        "delocalized_disorder": 1.0,
        "localized_disorder": 5.0,
    },
}


def default_config(experiment: str) -> dict:
    """Full default configuration mapping for one experiment."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}; "
                          f"expected one of {', '.join(EXPERIMENTS)}")
    cfg = copy.deepcopy(_BASE_DEFAULTS)
    cfg["experiment"] = experiment
    cfg["grid"] = copy.deepcopy(_GRID_DEFAULTS[experiment])
    return cfg


def load_config_file(path: str) -> dict:
    """Parse a YAML configuration file into a plain mapping."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"config file {path!r}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path!r}: invalid YAML: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path!r}: top level must be a mapping")
    return data


def merge_config(base: dict, override: dict) -> dict:
    """Recursive mapping merge; override wins, nested dicts merge."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if (key in merged and isinstance(merged[key], dict)
                and isinstance(value, dict)):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def apply_override(config: dict, dotted_key: str, raw_value: str) -> None:
    """Set a nested field from a ``section.field=value`` flag, in place."""
    parts = dotted_key.split(".")
    node = config
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    try:
        node[parts[-1]] = yaml.safe_load(raw_value)
    except yaml.YAMLError:
        node[parts[-1]] = raw_value


def _expect(config: dict, path: str, expected_type, *, optional=False):
    node: Any = config
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if optional:
                return None
            raise ConfigError(f"{path}: missing required field")
        node = node[part]
    if node is None and optional:
        return None
    if expected_type is float and isinstance(node, int) and not isinstance(node, bool):
        node = float(node)
    if expected_type is float and isinstance(node, str):
        # PyYAML parses exponent-only literals like 1e-10 as strings
        try:
            node = float(node)
        except ValueError:
            pass
    if not isinstance(node, expected_type) or (isinstance(node, bool)
                                               and expected_type is not bool):
        raise ConfigError(f"{path}: expected {expected_type.__name__}, got "
                          f"{type(node).__name__} ({node!r})")
    return node


def resolve_axis(axis_spec: Any, path: str) -> np.ndarray:
    """Turn an axis mapping into an ascending value array."""
    if isinstance(axis_spec, dict) and "values" in axis_spec:
        values = axis_spec["values"]
        if not isinstance(values, (list, tuple)) or not values:
            raise ConfigError(f"{path}.values: expected a non-empty list")
        arr = np.asarray(values, dtype=float)
    elif isinstance(axis_spec, dict):
        for key in ("start", "stop", "count"):
            if key not in axis_spec:
                raise ConfigError(f"{path}.{key}: missing required field")
        start = float(axis_spec["start"])
        stop = float(axis_spec["stop"])
        count = int(axis_spec["count"])
        if count < 1:
            raise ConfigError(f"{path}.count: must be >= 1, got {count}")
        spacing = axis_spec.get("spacing", "linear")
        if spacing == "linear":
            arr = np.linspace(start, stop, count)
        elif spacing == "log":
            if start <= 0.0 or stop <= 0.0:
                raise ConfigError(f"{path}: log spacing needs positive "
                                  "endpoints")
            arr = np.geomspace(start, stop, count)
        else:
            raise ConfigError(f"{path}.spacing: expected 'linear' or 'log', "
                              f"got {spacing!r}")
    else:
        raise ConfigError(f"{path}: expected an axis mapping")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{path}: values must be finite")
    if arr.size > 1 and np.any(np.diff(arr) <= 0.0):
        raise ConfigError(f"{path}: values must be strictly ascending")
    return arr


def resolve_model(config: dict) -> ModelParams:
    """Build the parameter template from the ``model`` section."""
    nu = _expect(config, "model.drive_frequency", float)
    if nu < 0.0:
        raise ConfigError("model.drive_frequency: must be >= 0")
    try:
        return ModelParams(
            n_sites=_expect(config, "model.n_sites", int),
            hopping=_expect(config, "model.hopping", float),
            disorder_strength=_expect(config, "model.disorder_strength", float),
            incommensuration=_expect(config, "model.incommensuration", float),
            phase=_expect(config, "model.phase", float),
            drive_amplitude=_expect(config, "model.drive_amplitude", float),
            drive_angular_frequency=2.0 * math.pi * nu,
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}")


def resolve_phases(config: dict) -> np.ndarray:
    count = _expect(config, "phases.count", int)
    mode = _expect(config, "phases.mode", str)
    seed = _expect(config, "phases.seed", int, optional=True)
    if count < 1:
        raise ConfigError("phases.count: must be >= 1")
    if mode == "uniform":
        if seed is not None:
            raise ConfigError("phases.seed: only valid with phases.mode: "
                              "random")
        return uniform_phases(count)
    if mode == "random":
        if seed is None:
            raise ConfigError("phases.seed: required with phases.mode: random")
        return random_phases(count, seed)
    raise ConfigError(f"phases.mode: expected 'uniform' or 'random', got "
                      f"{mode!r}")


def resolve_settings(config: dict) -> SweepSettings:
    workers = _expect(config, "workers", int)
    steps = _expect(config, "integrator.steps_per_period", int, optional=True)
    try:
        return SweepSettings(
            n_periods=_expect(config, "protocol.n_periods", int),
            samples_per_period=_expect(config, "protocol.samples_per_period",
                                       int),
            propagator_steps=steps,
            static_t_final=_expect(config, "protocol.static_t_final", float),
            static_n_samples=_expect(config, "protocol.static_n_samples", int),
            workers=workers,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def resolve_integrator_tolerances(config: dict) -> tuple[float, float]:
    rtol = _expect(config, "integrator.rel_tol", float)
    atol = _expect(config, "integrator.abs_tol", float)
    if rtol <= 0.0 or atol <= 0.0:
        raise ConfigError("integrator: rel_tol and abs_tol must be > 0")
    return rtol, atol


def resolved_copy(config: dict) -> dict:
    """Deep copy with every grid axis replaced by its explicit value list.

    This is the form embedded into result files: re-running it reproduces
    the axes exactly, independent of spacing arithmetic.
    """
    out = copy.deepcopy(config)
    grid = out.get("grid", {})
    for key, axis_spec in list(grid.items()):
        if isinstance(axis_spec, dict) and ("values" in axis_spec
                                            or "start" in axis_spec):
            grid[key] = {"values": resolve_axis(axis_spec,
                                                f"grid.{key}").tolist()}
    return out


def make_axis(config: dict, key: str, name: str) -> ScanAxis:
    grid = config.get("grid")
    if not isinstance(grid, dict) or key not in grid:
        raise ConfigError(f"grid.{key}: missing required field")
    return ScanAxis(name=name, values=resolve_axis(grid[key], f"grid.{key}"))
