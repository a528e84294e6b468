"""Scenario configuration: schema, defaults, parsing and validation.

Configs are YAML mappings with sections mirroring the solver modules:

    material: {rho, b, a, reg_eta}
    mesh:     {L, n_cells, degree_policy}
    time:     {dt, t_final, alpha}
    drive:    {A, omega}
    newton:   {tol, k_max}
    output:   {snapshot_interval, samples, directory}

Only material.b is required; everything else has a documented default.
Unknown sections or keys are rejected.  A run manifest (mapping with a
"config" key) is accepted anywhere a config is, so runs can be
reproduced from their own manifests.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .constitutive import MaterialParams
from .fe_space import build_space
from .integrator import BoundaryDrive, HhtParams, NewtonSettings


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""


@dataclass(frozen=True)
class MeshConfig:
    L: float = 1.0
    n_cells: int = 128
    degree_policy: str = "uniform(1)"


@dataclass(frozen=True)
class TimeConfig:
    dt: float = 1.0e-3
    t_final: float = 1.0
    alpha: float = -0.05


@dataclass(frozen=True)
class OutputConfig:
    snapshot_interval: float = 0.05
    samples: int = 256
    directory: str = "out"


@dataclass(frozen=True)
class ScenarioConfig:
    material: MaterialParams
    mesh: MeshConfig = field(default_factory=MeshConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    drive: BoundaryDrive = field(default_factory=BoundaryDrive)
    newton: NewtonSettings = field(default_factory=NewtonSettings)
    output: OutputConfig = field(default_factory=OutputConfig)


_SCHEMA = {
    "material": {"rho": float, "b": float, "a": float, "reg_eta": float},
    "mesh": {"L": float, "n_cells": int, "degree_policy": str},
    "time": {"dt": float, "t_final": float, "alpha": float},
    "drive": {"A": float, "omega": float},
    "newton": {"tol": float, "k_max": int},
    "output": {"snapshot_interval": float, "samples": int, "directory": str},
}

_DEFAULTS = {
    "material": {"rho": 1.0, "a": 1.5, "reg_eta": 1.0e-8},
    "mesh": {"L": 1.0, "n_cells": 128, "degree_policy": "uniform(1)"},
    "time": {"dt": 1.0e-3, "t_final": 1.0, "alpha": -0.05},
    "drive": {"A": 0.02, "omega": 2.0 * math.pi},
    "newton": {"tol": 1.0e-10, "k_max": 20},
    "output": {"snapshot_interval": 0.05, "samples": 256, "directory": "out"},
}


def _coerce(section: str, key: str, value: Any, typ):
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{section}.{key}: expected a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{section}.{key}: expected an integer, got {value!r}")
        return int(value)
    if not isinstance(value, str):
        raise ConfigError(f"{section}.{key}: expected a string, got {value!r}")
    return value


def _merged_sections(mapping: Mapping) -> dict:
    unknown = set(mapping) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    merged: dict = {}
    for section, keys in _SCHEMA.items():
        given = mapping.get(section, {})
        if given is None:
            given = {}
        if not isinstance(given, Mapping):
            raise ConfigError(f"section {section!r} must be a mapping")
        bad = set(given) - set(keys)
        if bad:
            raise ConfigError(f"unknown key(s) in section {section!r}: {sorted(bad)}")
        values = dict(_DEFAULTS[section])
        for key, value in given.items():
            values[key] = _coerce(section, key, value, keys[key])
        merged[section] = values
    if "b" not in merged["material"]:
        raise ConfigError("material.b is required")
    return merged


def _validated(merged: dict) -> ScenarioConfig:
    m = merged["material"]
    try:
        material = MaterialParams(rho=m["rho"], b=m["b"], a=m["a"],
                                  reg_eta=m["reg_eta"])
    except ValueError as exc:
        raise ConfigError(f"material: {exc}") from exc

    mesh = MeshConfig(**merged["mesh"])
    try:
        build_space(mesh.L, mesh.n_cells, mesh.degree_policy)
    except ValueError as exc:
        raise ConfigError(f"mesh: {exc}") from exc

    t = merged["time"]
    if t["dt"] <= 0:
        raise ConfigError(f"time.dt: must be positive, got {t['dt']}")
    if t["t_final"] <= 0:
        raise ConfigError(f"time.t_final: must be positive, got {t['t_final']}")
    try:
        HhtParams(alpha=t["alpha"], dt=t["dt"])
    except ValueError as exc:
        raise ConfigError(f"time: {exc}") from exc
    time_cfg = TimeConfig(**t)

    d = merged["drive"]
    if d["A"] < 0:
        raise ConfigError(f"drive.A: must be non-negative, got {d['A']}")
    drive = BoundaryDrive(amplitude=d["A"], omega=d["omega"])

    try:
        newton = NewtonSettings(tol=merged["newton"]["tol"],
                                k_max=merged["newton"]["k_max"])
    except ValueError as exc:
        raise ConfigError(f"newton: {exc}") from exc

    o = merged["output"]
    if o["snapshot_interval"] < 0:
        raise ConfigError("output.snapshot_interval: must be non-negative")
    if o["samples"] < 1:
        raise ConfigError("output.samples: must be >= 1")
    output = OutputConfig(**o)

    return ScenarioConfig(material=material, mesh=mesh, time=time_cfg,
                          drive=drive, newton=newton, output=output)


def parse_config(source) -> ScenarioConfig:
    """Build a validated ScenarioConfig from YAML text or a mapping.

    A manifest mapping (containing a "config" key) is unwrapped, so a
    previous run's manifest reproduces that run.
    """
    if isinstance(source, Mapping):
        mapping = source
    else:
        try:
            # JSON first: manifests are JSON, and PyYAML mis-reads
            # exponent literals like 1e-08 as strings
            mapping = json.loads(source)
        except json.JSONDecodeError:
            try:
                mapping = yaml.safe_load(source)
            except yaml.YAMLError as exc:
                raise ConfigError(f"config parse error: {exc}") from exc
    if mapping is None:
        mapping = {}
    if not isinstance(mapping, Mapping):
        raise ConfigError("config root must be a mapping")
    if "config" in mapping:  # manifest of a previous run
        mapping = mapping["config"]
        if not isinstance(mapping, Mapping):
            raise ConfigError("manifest 'config' entry must be a mapping")
    return _validated(_merged_sections(mapping))


def load_config(path) -> ScenarioConfig:
    """Parse a config (or manifest) file."""
    return parse_config(Path(path).read_text())


def config_to_mapping(config: ScenarioConfig) -> dict:
    """Plain mapping of every resolved parameter (manifest content)."""
    return {
        "material": {"rho": config.material.rho, "b": config.material.b,
                     "a": config.material.a, "reg_eta": config.material.reg_eta},
        "mesh": {"L": config.mesh.L, "n_cells": config.mesh.n_cells,
                 "degree_policy": config.mesh.degree_policy},
        "time": {"dt": config.time.dt, "t_final": config.time.t_final,
                 "alpha": config.time.alpha},
        "drive": {"A": config.drive.amplitude, "omega": config.drive.omega},
        "newton": {"tol": config.newton.tol, "k_max": config.newton.k_max},
        "output": {"snapshot_interval": config.output.snapshot_interval,
                   "samples": config.output.samples,
                   "directory": config.output.directory},
    }
