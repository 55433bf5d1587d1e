"""Per-period task generation."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .adversary import break_prob

MB_BITS = 8e6  # decimal megabyte


class SecurityLevel(enum.IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2


_BLOCK_BITS = {SecurityLevel.LOW: 192, SecurityLevel.MEDIUM: 224, SecurityLevel.HIGH: 256}


def block_length_for(level: SecurityLevel) -> int:
    return _BLOCK_BITS[SecurityLevel(level)]


@dataclass(frozen=True)
class Task:
    id: int
    data_size: float                      # bits
    level: SecurityLevel
    block_length: int
    break_prob: float

    @classmethod
    def make(cls, id: int, data_size: float, level: SecurityLevel) -> "Task":
        if data_size <= 0:
            raise ValueError("data_size must be positive")
        n = block_length_for(level)
        return cls(id, float(data_size), SecurityLevel(level), n, break_prob(n))


@dataclass(frozen=True)
class WorkloadConfig:
    tasks_per_period: int = 20
    mean_data_size: float = 20 * MB_BITS  # bits
    level_distribution: Sequence[float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self):
        if self.tasks_per_period < 0:
            raise ValueError("tasks_per_period must be >= 0")
        if not self.mean_data_size > 0:
            raise ValueError("mean_data_size must be positive")
        p = self.level_distribution
        if len(p) != 3 or min(p) < 0 or abs(sum(p) - 1.0) > 1e-9:
            raise ValueError("level_distribution must be three nonnegative probabilities summing to 1")


def generate_period(cfg: WorkloadConfig, rng: np.random.Generator) -> list[Task]:
    """Draw one period's tasks: Poisson sizes (zeros redrawn), then levels."""
    n = cfg.tasks_per_period
    if n == 0:
        return []
    sizes = rng.poisson(cfg.mean_data_size, size=n)
    while (zero := sizes == 0).any():
        sizes[zero] = rng.poisson(cfg.mean_data_size, size=int(zero.sum()))
    levels = rng.choice(3, size=n, p=np.asarray(cfg.level_distribution, dtype=float))
    return [Task.make(i, float(d), SecurityLevel(int(l))) for i, (d, l) in enumerate(zip(sizes, levels))]
