"""Malicious-satellite model for block-cipher protected uplinks.

An attacker breaks a block length ``N`` with probability that falls linearly
from 1 at ``N_MIN`` to 0 at ``N_MAX``. During one offload ``x ~ Poisson(mu)``
malicious satellites are in range and the task survives with
``(1 - phi) ** x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

N_MIN = 128
N_MAX = 256


@dataclass(frozen=True)
class AdversaryConfig:
    mean_malicious: float = 3.0

    def __post_init__(self):
        if self.mean_malicious < 0:
            raise ValueError("mean_malicious must be >= 0")


def break_prob(n_bits: int) -> float:
    if not N_MIN <= n_bits <= N_MAX:
        raise ValueError(f"block length {n_bits} outside [{N_MIN}, {N_MAX}]")
    return (N_MAX - n_bits) / (N_MAX - N_MIN)


def security_strength(phi: float, x: int) -> float:
    return (1.0 - phi) ** x


def expected_attack_prob(phi: float, mu: float) -> float:
    """``1 - E[(1-phi)**x]`` for ``x ~ Poisson(mu)``; the Poisson pgf gives exp(-mu*phi)."""
    return -math.expm1(-mu * phi)


def sample_attack(task, rng: np.random.Generator, cfg: AdversaryConfig,
                  forced_x: Optional[int] = None) -> int:
    """One Monte Carlo draw: 1 if the offloaded ``task`` is broken, else 0.

    ``forced_x`` pins the number of malicious satellites (testing hook).
    """
    x = int(rng.poisson(cfg.mean_malicious)) if forced_x is None else int(forced_x)
    strength = security_strength(task.break_prob, x)
    return int(rng.random() > strength)
