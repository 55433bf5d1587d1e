"""Scheduling MDP over the period simulator.

One period's joint decision (assignment + dispatch order) is taken as ``I``
micro-steps. Micro-step ``k`` picks a pending task and a destination; that task
becomes the ``k``-th entry of the dispatch order. Flat action index is
``task * (J + 1) + destination`` with destination 0 = local, ``j`` = satellite ``j``.

Intermediate micro-steps yield reward 0. The last micro-step of a period runs
the period and yields ``-(makespan + beta1 * energy + beta2 * attacks)``.

Observation layout (all entries finite, roughly in [-1, 10]):

* per task slot (``5 * I``): pending flag, size / mean size, level one-hot;
* per satellite (``6 * J``): visible flag, sin and cos of its angle, queue
  backlog / ``backlog_scale``, success probability of a mean-size task over
  its current link, uplink time of a mean-size task / ``backlog_scale``;
* globals (7): local, crypto and uplink backlogs / ``backlog_scale``,
  running success product, period progress ``(tau - 1) / T``, clock
  ``t / (period_length * T)``, fraction of this period already scheduled.

Backlogs and transmission times are capped at 10.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import link as lk
from .errors import ContractViolation
from .orbit import SatelliteState, advance, initial_states
from .rng import substream
from .scenario import Scenario
from .simcore import (LOCAL, PeriodDecision, PeriodOutcome, QueueState, Timeline,
                      execute_period, visible_flags)
from .workload import Task, generate_period

_CAP = 10.0


def obs_size(n_tasks: int, n_sats: int) -> int:
    return 5 * n_tasks + 6 * n_sats + 7


def canonical_order(tasks: list) -> list:
    """Slot order for a period's tasks: highest security level first, then larger first.

    Tasks within a period are exchangeable; a fixed slot convention lets the
    policy network tie each logit group to comparable tasks.
    """
    return sorted(tasks, key=lambda t: (-int(t.level), -t.data_size, t.id))


@dataclass
class PeriodPlanner:
    """Partial decision for the current period plus its exact predicted timeline.

    The success product is predicted with the bit error rate at each task's
    actual transmission start, which is what the period execution uses, so an
    unmasked trajectory can never end below ``rho``.
    """
    scenario: Scenario
    tasks: list
    sats: list
    t0: float
    queues: QueueState
    timeline: Timeline = None
    visible: list = None
    running: float = 1.0
    pending: np.ndarray = None
    actions: list = field(default_factory=list)
    _mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.timeline is None:
            self.timeline = Timeline.start(self.scenario, self.queues, self.sats, self.t0)
        if self.visible is None:
            self.visible = visible_flags(self.scenario, self.sats)
        if self.pending is None:
            self.pending = np.ones(len(self.tasks), dtype=bool)

    def copy(self) -> "PeriodPlanner":
        return PeriodPlanner(self.scenario, self.tasks, self.sats, self.t0, self.queues,
                             self.timeline.copy(), self.visible, self.running,
                             self.pending.copy(), list(self.actions), self._mask)

    @property
    def n_dest(self) -> int:
        return len(self.sats) + 1

    @property
    def done(self) -> bool:
        return not self.pending.any()

    def offload_prob(self, i: int, dest: int) -> float:
        """Success probability task ``i`` would get if dispatched next to ``dest``."""
        task = self.tasks[i]
        ber = self.timeline.link_at(dest - 1, self.timeline.preview_tx_start(task)).ber
        return lk.task_success_prob(ber, task.data_size, offloaded=True, visible=True)

    def mask(self) -> np.ndarray:
        if self._mask is not None:
            return self._mask
        sc = self.scenario
        nd = self.n_dest
        m = np.zeros((len(self.tasks), nd), dtype=bool)
        threshold = sc.rho + sc.rho_margin
        for i in np.flatnonzero(self.pending):
            m[i, LOCAL] = True
            for d in range(1, nd):
                if not self.visible[d - 1]:
                    continue
                if sc.violation_mode == "penalty":
                    m[i, d] = True
                else:
                    r = self.offload_prob(i, d)
                    m[i, d] = r == 1.0 or self.running * r >= threshold
        self._mask = m.ravel()
        return self._mask

    def apply(self, i: int, dest: int) -> None:
        if not self.mask()[i * self.n_dest + dest]:
            raise ContractViolation(f"action (task {i}, destination {dest}) is masked")
        task = self.tasks[i]
        if dest == LOCAL:
            self.timeline.place_local(task)
        else:
            tm = self.timeline.place_offload(task, dest)
            self.running *= lk.task_success_prob(tm.ber, task.data_size, True, True)
        self.pending[i] = False
        self.actions.append((i, dest))
        self._mask = None

    def decision(self) -> PeriodDecision:
        return PeriodDecision.from_actions(self.actions, len(self.tasks))


@dataclass
class EnvState:
    period: int                           # 1-based
    t: float                              # period start
    sats: list
    queues: QueueState                    # carried in from earlier periods
    planner: PeriodPlanner


@dataclass(frozen=True)
class RewardRecord:
    reward: float
    makespan: float
    energy: float
    attacks: float
    r_total: float


class OffloadEnv:
    def __init__(self, scenario: Scenario):
        if scenario.n_tasks < 1:
            raise ValueError("the environment needs at least one task per period")
        self.scenario = scenario
        self.n_tasks = scenario.n_tasks
        self.n_sats = scenario.n_sats
        self.n_actions = self.n_tasks * (self.n_sats + 1)
        self.obs_dim = obs_size(self.n_tasks, self.n_sats)
        self.state: Optional[EnvState] = None
        self.history: list[PeriodOutcome] = []
        self.episode_done = True

    # -- lifecycle ----------------------------------------------------------

    def reset(self, seed: int) -> np.ndarray:
        sc = self.scenario
        self.workload_rng = substream(seed, "workload")
        self.adversary_rng = substream(seed, "adversary")
        sats = initial_states(sc.constellation)
        queues = QueueState.empty(self.n_sats)
        self.state = EnvState(1, 0.0, sats, queues, self._planner(sats, queues, 0.0))
        self.history = []
        self.episode_done = False
        return self.observation()

    def _planner(self, sats, queues, t) -> PeriodPlanner:
        tasks = canonical_order(generate_period(self.scenario.workload, self.workload_rng))
        return PeriodPlanner(self.scenario, tasks, sats, t, queues)

    @property
    def planner(self) -> PeriodPlanner:
        return self.state.planner

    def action_mask(self) -> np.ndarray:
        return self.state.planner.mask()

    def step(self, action: int):
        """Returns ``(obs, reward, period_done, episode_done, info)``."""
        if self.episode_done:
            raise ContractViolation("episode is over; call reset()")
        st = self.state
        i, d = divmod(int(action), self.n_sats + 1)
        st.planner.apply(i, d)
        if not st.planner.done:
            return self.observation(), 0.0, False, False, {}

        sc = self.scenario
        pl = st.planner
        outcome, queues = execute_period(pl.tasks, pl.decision(), st.queues, st.sats, st.t,
                                         sc, self.adversary_rng)
        reward = -outcome.cost
        if sc.violation_mode == "penalty" and outcome.r_total < sc.rho:
            reward -= sc.violation_penalty
        self.history.append(outcome)
        info = {"outcome": outcome, "predicted_r_total": pl.running,
                "record": RewardRecord(reward, outcome.makespan, outcome.energy,
                                       outcome.attacks, outcome.r_total)}
        if st.period >= sc.periods:
            self.episode_done = True
            st.queues = queues
            return self.observation(), reward, True, True, info
        t = st.t + sc.period_length
        sats = advance(sc.constellation, st.sats, sc.period_length)
        sats = [SatelliteState(s.index, s.gamma, s.slant_range, q)
                for s, q in zip(sats, queues.satellites)]
        self.state = EnvState(st.period + 1, t, sats, queues, self._planner(sats, queues, t))
        return self.observation(), reward, True, False, info

    # -- observation --------------------------------------------------------

    def observation(self) -> np.ndarray:
        sc = self.scenario
        st = self.state
        pl = st.planner
        lam = sc.workload.mean_data_size
        scale = sc.backlog_scale
        obs = np.zeros(self.obs_dim)
        k = 0
        for i, task in enumerate(pl.tasks):
            if pl.pending[i] and not self.episode_done:
                obs[k] = 1.0
                obs[k + 1] = task.data_size / lam
                obs[k + 2 + int(task.level)] = 1.0
            k += 5
        tl = pl.timeline
        for j, s in enumerate(st.sats):
            m = tl.link_at(j, st.t)
            g = math.radians(s.gamma)
            obs[k:k + 6] = (
                float(pl.visible[j]), math.sin(g), math.cos(g),
                min((tl.sat_release[j] - st.t) / scale, _CAP),
                lk.task_success_prob(m.ber, lam, True, True),
                min(lam / m.rate / scale, _CAP),
            )
            k += 6
        n = len(pl.tasks)
        obs[k:k + 7] = (
            min((tl.local - st.t) / scale, _CAP),
            min((tl.crypto - st.t) / scale, _CAP),
            min((tl.uplink - st.t) / scale, _CAP),
            pl.running,
            (st.period - 1) / sc.periods,
            st.t / (sc.period_length * sc.periods),
            1.0 - pl.pending.sum() / n,
        )
        return obs

    # -- episode summaries ----------------------------------------------------

    def horizon_makespan(self) -> float:
        """Latest completion over the whole episode, measured from time 0."""
        return max((o.latest_end for o in self.history), default=0.0)
