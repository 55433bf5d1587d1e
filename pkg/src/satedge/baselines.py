"""Static schedulers. Each maps the current period's planner to a full decision.

Decisions are built by replaying micro-actions on a copy of the planner, so
every one of them respects the same mask the learning agent sees.
"""
from __future__ import annotations

import enum
from typing import Callable

import numpy as np

from .env import PeriodPlanner
from .simcore import LOCAL, PeriodDecision, execute_period


class BaselineKind(str, enum.Enum):
    GREEDY = "greedy"
    ROUND_ROBIN = "round_robin"
    ALL_LOCAL = "all_local"
    ALL_OFFLOADING = "all_offloading"
    RANDOM = "random"


def _allowed(pl: PeriodPlanner, i: int, d: int) -> bool:
    return bool(pl.mask()[i * pl.n_dest + d])


def all_local_decide(planner: PeriodPlanner, rng=None) -> PeriodDecision:
    n = len(planner.tasks)
    return PeriodDecision((LOCAL,) * n, tuple(range(n)))


def round_robin_decide(planner: PeriodPlanner, rng=None) -> PeriodDecision:
    """Index order; destinations cycle local, sat 1, ..., sat J, skipping masked slots."""
    pl = planner.copy()
    cycle = pl.n_dest
    slot = 0
    for i in range(len(pl.tasks)):
        while not _allowed(pl, i, slot):
            slot = (slot + 1) % cycle
        pl.apply(i, slot)
        slot = (slot + 1) % cycle
    return pl.decision()


def all_offloading_decide(planner: PeriodPlanner, rng=None) -> PeriodDecision:
    """Visible satellites nearest first, cycling; local only when every satellite is masked."""
    pl = planner.copy()
    near = sorted((s.slant_range, j + 1) for j, s in enumerate(pl.sats) if pl.visible[j])
    ranked = [d for _, d in near]
    ptr = 0
    for i in range(len(pl.tasks)):
        for k in range(len(ranked)):
            d = ranked[(ptr + k) % len(ranked)]
            if _allowed(pl, i, d):
                pl.apply(i, d)
                ptr = (ptr + k + 1) % len(ranked)
                break
        else:
            pl.apply(i, LOCAL)
    return pl.decision()


def random_decide(planner: PeriodPlanner, rng: np.random.Generator) -> PeriodDecision:
    """Uniform over unmasked (task, destination) pairs at every micro-step."""
    pl = planner.copy()
    while not pl.done:
        allowed = np.flatnonzero(pl.mask())
        i, d = divmod(int(rng.choice(allowed)), pl.n_dest)
        pl.apply(i, d)
    return pl.decision()


def decision_cost(planner: PeriodPlanner, decision: PeriodDecision, rng=None,
                  attack_mode: str = "expected") -> float:
    outcome, _ = execute_period(planner.tasks, decision, planner.queues, planner.sats,
                                planner.t0, planner.scenario, rng, attack_mode=attack_mode)
    return outcome.cost


def greedy_decide(planner: PeriodPlanner, rng: np.random.Generator, samples: int = 1000,
                  attack_mode: str = "expected") -> PeriodDecision:
    """Best of ``samples`` random feasible decisions; first one wins ties.

    Candidates are scored with expected attack counts unless
    ``attack_mode="sampled"``, which draws attacks from ``rng``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    best, best_cost = None, np.inf
    for _ in range(samples):
        dec = random_decide(planner, rng)
        c = decision_cost(planner, dec, rng, attack_mode)
        if c < best_cost:
            best, best_cost = dec, c
    return best


def make_baseline(kind, greedy_samples: int = 1000, greedy_attack_mode: str = "expected"
                  ) -> Callable[[PeriodPlanner, np.random.Generator], PeriodDecision]:
    kind = BaselineKind(kind)
    if kind is BaselineKind.GREEDY:
        return lambda pl, rng: greedy_decide(pl, rng, greedy_samples, greedy_attack_mode)
    return {
        BaselineKind.ROUND_ROBIN: round_robin_decide,
        BaselineKind.ALL_LOCAL: all_local_decide,
        BaselineKind.ALL_OFFLOADING: all_offloading_decide,
        BaselineKind.RANDOM: random_decide,
    }[kind]
