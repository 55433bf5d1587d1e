"""All constants of one simulated scenario, grouped by concern."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

from .adversary import AdversaryConfig
from .link import LinkConfig
from .orbit import ConstellationConfig
from .workload import WorkloadConfig


@dataclass(frozen=True)
class ComputeConfig:
    q_local: float = 80.0                 # cycles/bit
    f_local: float = 6.5e9                # Hz
    q_en: float = 20.0                    # cycles/bit
    f_en: float = 3.0e9                   # Hz
    k: float = 1e-31                      # W s^3 / cycle^3
    # invented defaults; a scalar applies to every satellite
    q_sat: Union[float, Sequence[float]] = 80.0
    f_sat: Union[float, Sequence[float]] = 1e10

    def __post_init__(self):
        for name in ("q_local", "f_local", "f_en", "k"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.q_en < 0:
            raise ValueError("q_en must be >= 0")
        for name in ("q_sat", "f_sat"):
            v = getattr(self, name)
            vals = v if isinstance(v, (list, tuple)) else [v]
            if any(not x > 0 for x in vals):
                raise ValueError(f"{name} must be positive")

    def sat_cycles(self, j: int) -> float:
        return self.q_sat[j] if isinstance(self.q_sat, (list, tuple)) else self.q_sat

    def sat_freq(self, j: int) -> float:
        return self.f_sat[j] if isinstance(self.f_sat, (list, tuple)) else self.f_sat


@dataclass(frozen=True)
class Scenario:
    constellation: ConstellationConfig = field(default_factory=ConstellationConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    compute: ComputeConfig = field(default_factory=ComputeConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    periods: int = 50
    period_length: float = 60.0           # s between period starts
    rho: float = 0.7
    rho_margin: float = 0.0
    beta1: float = 1.0
    beta2: float = 1.0
    violation_mode: str = "mask"          # or "penalty"
    violation_penalty: float = 100.0
    backlog_scale: float = 60.0           # s, observation normaliser

    def __post_init__(self):
        if self.periods < 1:
            raise ValueError("periods must be >= 1")
        if not self.period_length > 0:
            raise ValueError("period_length must be positive")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho out of [0,1]")
        if self.rho_margin < 0:
            raise ValueError("rho_margin must be >= 0")
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValueError("beta1 and beta2 must be >= 0")
        if self.violation_mode not in ("mask", "penalty"):
            raise ValueError("violation_mode must be 'mask' or 'penalty'")
        if not self.backlog_scale > 0:
            raise ValueError("backlog_scale must be positive")
        c = self.compute
        J = self.constellation.satellite_count
        for name in ("q_sat", "f_sat"):
            v = getattr(c, name)
            if isinstance(v, (list, tuple)) and len(v) != J:
                raise ValueError(f"{name} has {len(v)} entries for {J} satellites")

    @property
    def n_sats(self) -> int:
        return self.constellation.satellite_count

    @property
    def n_tasks(self) -> int:
        return self.workload.tasks_per_period
