"""Flat, typed experiment configuration.

A config file is TOML with top-level ``key = value`` pairs only. Every key has
a default (the published scenario), so an empty file is a complete config.
Resolution order: defaults < file < ``SATEDGE_<KEY>`` environment variables <
explicit overrides (CLI flags).
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional

import tomli

from .adversary import AdversaryConfig
from .errors import ConfigError
from .link import LinkConfig, db_to_linear
from .orbit import ConstellationConfig
from .ppo.agent import PpoConfig
from .scenario import ComputeConfig, Scenario
from .workload import WorkloadConfig

ENV_PREFIX = "SATEDGE_"

# key -> (type, default). "floats" is a list of floats.
DEFAULTS: dict[str, tuple[str, Any]] = {
    # constellation
    "satellite_count": ("int", 12),
    "earth_radius_km": ("float", 6371.0),
    "orbit_altitude_km": ("float", 780.0),
    "angular_spacing_deg": ("float", 4.0),
    "angular_velocity_deg_s": ("float", 0.0002),
    "visibility_bound_deg": ("float", 10.0),
    "first_satellite_angle_deg": ("float?", None),
    # link
    "beta0_db": ("float", -37.0),
    "tx_power_w": ("float", 5.0),
    "noise_power_w": ("float", 1e-6),
    "bandwidth_hz": ("float", 20e6),
    "distance_unit": ("str", "km"),
    # workload
    "tasks_per_period": ("int", 20),
    "mean_data_size_mb": ("float", 20.0),
    "megabyte_bits": ("float", 8e6),
    "level_probs": ("floats", [1 / 3, 1 / 3, 1 / 3]),
    # adversary
    "mean_malicious": ("float", 3.0),
    # compute
    "q_local": ("float", 80.0),
    "f_local_hz": ("float", 6.5e9),
    "q_en": ("float", 20.0),
    "f_en_hz": ("float", 3.0e9),
    "k_hw": ("float", 1e-31),
    "q_sat": ("float", 80.0),
    "f_sat_hz": ("float", 1e10),
    # environment and objective
    "periods": ("int", 50),
    "period_length_s": ("float", 60.0),
    "rho": ("float", 0.7),
    "rho_margin": ("float", 0.0),
    "beta1": ("float", 1.0),
    "beta2": ("float", 1.0),
    "violation_mode": ("str", "mask"),
    "violation_penalty": ("float", 100.0),
    "backlog_scale_s": ("float", 60.0),
    # ppo
    "total_timesteps": ("int", 500_000),
    "update_interval": ("int", 5),
    "interval_unit": ("str", "episodes"),
    "batch_size": ("int", 64),
    "gamma": ("float", 0.99),
    "gae_lambda": ("float", 0.95),
    "clip_range": ("float", 0.2),
    "value_coef": ("float", 0.5),
    "entropy_coef": ("float", 0.01),
    "learning_rate": ("float", 3e-4),
    "epochs_per_update": ("int", 10),
    "hidden_sizes": ("ints", [64, 64]),
    "max_grad_norm": ("float", 0.5),
    "reward_scale": ("float", 1.0),
    # experiment
    "policy": ("str", "ppo"),
    "greedy_samples": ("int", 1000),
    "greedy_attack_mode": ("str", "expected"),
    "sweep_axis": ("str", "none"),
    "sweep_values": ("floats", []),
    "episodes": ("int", 10),
    "seeds": ("ints", [0]),
    "out_dir": ("str", "runs"),
}

# sweep axis name -> config key it drives
SWEEP_AXES = {
    "none": None,
    "update_interval": "update_interval",
    "learning_rate": "learning_rate",
    "task_size": "mean_data_size_mb",
    "f_local": "f_local_hz",
    "mu": "mean_malicious",
}

POLICIES = ("ppo", "greedy", "round_robin", "all_local", "all_offloading", "random")


def _coerce(key: str, value: Any) -> Any:
    kind = DEFAULTS[key][0]
    try:
        if kind == "float?":
            return None if value is None else float(value)
        if kind == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if kind == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind in ("floats", "ints"):
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                value = [value]
            cast = float if kind == "floats" else int
            return [cast(v) for v in value]
    except (TypeError, ValueError):
        pass
    raise ConfigError(f"config key '{key}' expects {kind}, got {value!r}")


def _parse_scalar(text: str) -> Any:
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        if "," in text:
            return [_parse_scalar(t.strip()) for t in text.split(",") if t.strip()]
        return text


@dataclass(frozen=True)
class ExperimentConfig:
    values: Mapping[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return build({**self.values, **overrides})

    @property
    def scenario(self) -> Scenario:
        return _scenario(self.values)

    @property
    def ppo(self) -> PpoConfig:
        return _ppo(self.values)

    @property
    def hash(self) -> str:
        """Stable digest of everything that affects results (not where they go)."""
        payload = {k: v for k, v in sorted(self.values.items()) if k != "out_dir"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]

    def sweep_cells(self) -> list:
        """``(value, config)`` pairs; a single ``(None, self)`` when not sweeping."""
        key = SWEEP_AXES[self["sweep_axis"]]
        if key is None:
            return [(None, self)]
        cells = []
        for v in self["sweep_values"]:
            cells.append((v, self.with_overrides(**{key: v})))
        return cells


def _scenario(v: Mapping[str, Any]) -> Scenario:
    n_sat = v["satellite_count"]
    return Scenario(
        constellation=ConstellationConfig(
            n_sat, v["earth_radius_km"], v["orbit_altitude_km"], v["angular_spacing_deg"],
            v["angular_velocity_deg_s"], v["visibility_bound_deg"], v["first_satellite_angle_deg"]),
        link=LinkConfig(db_to_linear(v["beta0_db"]), v["tx_power_w"], v["noise_power_w"],
                        v["bandwidth_hz"], v["distance_unit"]),
        compute=ComputeConfig(v["q_local"], v["f_local_hz"], v["q_en"], v["f_en_hz"], v["k_hw"],
                              v["q_sat"], v["f_sat_hz"]),
        workload=WorkloadConfig(v["tasks_per_period"], v["mean_data_size_mb"] * v["megabyte_bits"],
                                tuple(v["level_probs"])),
        adversary=AdversaryConfig(v["mean_malicious"]),
        periods=v["periods"], period_length=v["period_length_s"], rho=v["rho"],
        rho_margin=v["rho_margin"], beta1=v["beta1"], beta2=v["beta2"],
        violation_mode=v["violation_mode"], violation_penalty=v["violation_penalty"],
        backlog_scale=v["backlog_scale_s"],
    )


def _ppo(v: Mapping[str, Any]) -> PpoConfig:
    return PpoConfig(
        total_timesteps=v["total_timesteps"], update_interval=v["update_interval"],
        interval_unit=v["interval_unit"], batch_size=v["batch_size"], gamma=v["gamma"],
        gae_lambda=v["gae_lambda"], clip_range=v["clip_range"], value_coef=v["value_coef"],
        entropy_coef=v["entropy_coef"], learning_rate=v["learning_rate"],
        epochs_per_update=v["epochs_per_update"], hidden_sizes=tuple(v["hidden_sizes"]),
        max_grad_norm=v["max_grad_norm"], reward_scale=v["reward_scale"],
    )


def build(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate ``raw`` (unknown keys rejected) and fill defaults."""
    for key in raw:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key '{key}'")
    values = {k: d for k, (_, d) in DEFAULTS.items()}
    values.update({k: _coerce(k, raw[k]) for k in raw})
    cfg = ExperimentConfig(values)

    if values["sweep_axis"] not in SWEEP_AXES:
        raise ConfigError(f"sweep_axis must be one of {sorted(SWEEP_AXES)}")
    if values["sweep_axis"] != "none" and not values["sweep_values"]:
        raise ConfigError("sweep_values must be nonempty when sweep_axis is set")
    if not values["seeds"]:
        raise ConfigError("seeds must be nonempty")
    if values["episodes"] < 1:
        raise ConfigError("episodes must be >= 1")
    if values["greedy_samples"] < 1:
        raise ConfigError("greedy_samples must be >= 1")
    if values["greedy_attack_mode"] not in ("expected", "sampled"):
        raise ConfigError("greedy_attack_mode must be 'expected' or 'sampled'")
    for p in str(values["policy"]).split(","):
        if p.strip() not in POLICIES:
            raise ConfigError(f"policy '{p}' not one of {POLICIES}")
    try:
        cfg.scenario
        cfg.ppo
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: Optional[os.PathLike] = None, overrides: Optional[Mapping] = None,
                environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    """Read ``path`` (may be None), apply environment and explicit overrides."""
    raw: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            raw = tomli.loads(p.read_text(encoding="utf-8"))
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse config file {p}: {exc}") from None
        nested = [k for k, val in raw.items() if isinstance(val, dict)]
        if nested:
            raise ConfigError(f"config must be flat; table '{nested[0]}' not allowed")
    environ = os.environ if environ is None else environ
    for name, text in environ.items():
        if name.startswith(ENV_PREFIX):
            key = name[len(ENV_PREFIX):].lower()
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key '{key}' (from {name})")
            raw[key] = _parse_scalar(text)
    raw.update(overrides or {})
    return build(raw)


def preset_path(name: str) -> Path:
    """Path of a bundled preset (``"published"`` or ``"desk"``)."""
    return Path(str(resources.files("satedge.presets").joinpath(f"{name}.toml")))
