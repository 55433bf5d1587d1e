"""Deterministic execution of one scheduling period.

Resources and their FCFS queues:

* local CPU: serves tasks kept on the ground user;
* crypto unit: encrypts offloaded tasks one at a time;
* uplink radio: transmits encrypted tasks one at a time (single radio, even
  across satellites), so the dispatch order matters;
* one CPU per satellite.

All tasks of a period are released at the period start ``t0`` and claim the
resources in dispatch order. Release times carry across periods, so a long
period leaves backlog behind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import link as lk
from .adversary import expected_attack_prob, sample_attack
from .errors import ContractViolation, InfeasibleLinkError
from .orbit import SatelliteState, gamma_at, slant_range
from .scenario import ComputeConfig, Scenario
from .workload import Task

LOCAL = 0  # destination code; satellites are 1..J


# -- elementary latencies and energies ------------------------------------

def local_latency(data_bits: float, cfg: ComputeConfig, wait: float = 0.0) -> float:
    return wait + data_bits * cfg.q_local / cfg.f_local


def encryption_time(data_bits: float, cfg: ComputeConfig) -> float:
    return data_bits * cfg.q_en / cfg.f_en


def transmission_time(data_bits: float, rate: float) -> float:
    if rate <= 0:
        raise InfeasibleLinkError("zero-rate link; destination should have been masked")
    return data_bits / rate


def satellite_compute_time(data_bits: float, j: int, cfg: ComputeConfig) -> float:
    """Service time on satellite ``j`` (0-based)."""
    return data_bits * cfg.sat_cycles(j) / cfg.sat_freq(j)


def local_energy(compute_time: float, cfg: ComputeConfig) -> float:
    return cfg.k * cfg.f_local ** 3 * compute_time


def encryption_energy(data_bits: float, cfg: ComputeConfig) -> float:
    return cfg.k * cfg.f_en ** 3 * encryption_time(data_bits, cfg)


def offload_energy(data_bits: float, rate: float, cfg: ComputeConfig, tx_power: float) -> float:
    return encryption_energy(data_bits, cfg) + tx_power * transmission_time(data_bits, rate)


# -- state carried between periods -----------------------------------------

@dataclass(frozen=True)
class QueueState:
    local: float = 0.0
    crypto: float = 0.0
    uplink: float = 0.0
    satellites: tuple = ()

    @classmethod
    def empty(cls, n_sats: int, t: float = 0.0) -> "QueueState":
        return cls(t, t, t, (t,) * n_sats)


@dataclass(frozen=True)
class PeriodDecision:
    """``assignment[i]`` is the destination of task ``i`` (0 = local, j = satellite j);
    ``order`` lists task indices in dispatch order."""
    assignment: tuple
    order: tuple

    def validate(self, n_tasks: int, n_sats: int) -> None:
        if len(self.assignment) != n_tasks:
            raise ContractViolation("assignment must cover every task exactly once")
        if sorted(self.order) != list(range(n_tasks)):
            raise ContractViolation("order is not a permutation of the task indices")
        for d in self.assignment:
            if not 0 <= d <= n_sats:
                raise ContractViolation(f"destination {d} outside 0..{n_sats}")

    @classmethod
    def from_actions(cls, actions: Sequence[tuple[int, int]], n_tasks: int) -> "PeriodDecision":
        """Build from an ordered list of ``(task, destination)`` pairs."""
        assignment = [None] * n_tasks
        for i, d in actions:
            assignment[i] = d
        return cls(tuple(assignment), tuple(i for i, _ in actions))


@dataclass(frozen=True)
class TaskRecord:
    task_id: int
    destination: int
    start: float                          # local service start, or encryption start
    end: float
    energy: float
    attack: float                         # 0/1, or an expectation in "expected" mode
    success_prob: float
    tx_start: float = math.nan
    tx_end: float = math.nan
    ber: float = math.nan


@dataclass(frozen=True)
class PeriodOutcome:
    t0: float
    records: tuple
    makespan: float
    energy: float
    attacks: float
    r_total: float
    cost: float

    @property
    def latest_end(self) -> float:
        return max((r.end for r in self.records), default=self.t0)


# -- incremental timeline --------------------------------------------------

@dataclass(frozen=True)
class OffloadTiming:
    enc_start: float
    enc_end: float
    tx_start: float
    tx_end: float
    sat_start: float
    end: float
    rate: float
    ber: float


@dataclass
class Timeline:
    """Release times of every server while a period's tasks are placed in order.

    ``sats`` are the satellite states at ``t0``; link quality of an offload is
    evaluated at its transmission start.
    """
    scenario: Scenario
    sats: Sequence[SatelliteState]
    t0: float
    local: float
    crypto: float
    uplink: float
    sat_release: list = field(default_factory=list)
    _links: dict = field(default_factory=dict, repr=False)   # (j, t) -> LinkMetrics, shared by copies

    @classmethod
    def start(cls, scenario: Scenario, queues: QueueState, sats, t0: float) -> "Timeline":
        return cls(scenario, sats, t0,
                   max(queues.local, t0), max(queues.crypto, t0), max(queues.uplink, t0),
                   [max(r, t0) for r in queues.satellites])

    def copy(self) -> "Timeline":
        return Timeline(self.scenario, self.sats, self.t0, self.local, self.crypto,
                        self.uplink, list(self.sat_release), self._links)

    def queues(self) -> QueueState:
        return QueueState(self.local, self.crypto, self.uplink, tuple(self.sat_release))

    def link_at(self, j: int, t: float) -> lk.LinkMetrics:
        m = self._links.get((j, t))
        if m is None:
            c = self.scenario.constellation
            g = gamma_at(c, self.sats[j].gamma, t - self.t0)
            m = lk.metrics(slant_range(g, c.earth_radius, c.orbit_altitude), self.scenario.link)
            self._links[(j, t)] = m
        return m

    def preview_local(self, task: Task) -> tuple[float, float]:
        start = self.local
        return start, start + local_latency(task.data_size, self.scenario.compute)

    def place_local(self, task: Task) -> tuple[float, float]:
        start, end = self.preview_local(task)
        self.local = end
        return start, end

    def preview_tx_start(self, task: Task) -> float:
        enc_end = self.crypto + encryption_time(task.data_size, self.scenario.compute)
        return max(enc_end, self.uplink)

    def preview_offload(self, task: Task, dest: int) -> OffloadTiming:
        j = dest - 1
        cfg = self.scenario.compute
        enc_start = self.crypto
        enc_end = enc_start + encryption_time(task.data_size, cfg)
        tx_start = max(enc_end, self.uplink)      # same expression as preview_tx_start
        m = self.link_at(j, tx_start)
        tx_end = tx_start + transmission_time(task.data_size, m.rate)
        sat_start = max(tx_end, self.sat_release[j])
        end = sat_start + satellite_compute_time(task.data_size, j, cfg)
        return OffloadTiming(enc_start, enc_end, tx_start, tx_end, sat_start, end, m.rate, m.ber)

    def place_offload(self, task: Task, dest: int) -> OffloadTiming:
        tm = self.preview_offload(task, dest)
        self.crypto = tm.enc_end
        self.uplink = tm.tx_end
        self.sat_release[dest - 1] = tm.end
        return tm


def visible_flags(scenario: Scenario, sats: Sequence[SatelliteState]) -> list[bool]:
    bound = scenario.constellation.visibility_bound
    return [abs(s.gamma) < bound for s in sats]


def execute_period(
    tasks: Sequence[Task],
    decision: PeriodDecision,
    queues: QueueState,
    sats: Sequence[SatelliteState],
    t0: float,
    scenario: Scenario,
    adversary_rng: Optional[np.random.Generator] = None,
    attack_mode: str = "sampled",
    forced_x: Optional[int] = None,
) -> tuple[PeriodOutcome, QueueState]:
    """Run one period's tasks through the FCFS servers in dispatch order.

    ``attack_mode="expected"`` replaces each sampled attack by its probability
    (no randomness consumed); ``"sampled"`` draws from ``adversary_rng``.
    """
    decision.validate(len(tasks), len(sats))
    visible = visible_flags(scenario, sats)
    for i, d in enumerate(decision.assignment):
        if d != LOCAL and not visible[d - 1]:
            raise ContractViolation(f"task {i} assigned to invisible satellite {d}")
    if attack_mode == "sampled" and adversary_rng is None and any(decision.assignment):
        raise ValueError("sampled attacks need an adversary_rng")

    tl = Timeline.start(scenario, queues, sats, t0)
    cfg = scenario.compute
    mu = scenario.adversary.mean_malicious
    records = []
    for i in decision.order:
        task, d = tasks[i], decision.assignment[i]
        if d == LOCAL:
            start, end = tl.place_local(task)
            energy = local_energy(local_latency(task.data_size, cfg), cfg)
            records.append(TaskRecord(task.id, d, start, end, energy, 0.0, 1.0))
            continue
        tm = tl.place_offload(task, d)
        energy = offload_energy(task.data_size, tm.rate, cfg, scenario.link.tx_power)
        if attack_mode == "expected":
            attack = expected_attack_prob(task.break_prob, mu)
        else:
            attack = float(sample_attack(task, adversary_rng, scenario.adversary, forced_x))
        r = lk.task_success_prob(tm.ber, task.data_size, offloaded=True, visible=True)
        records.append(TaskRecord(task.id, d, tm.enc_start, tm.end, energy, attack, r,
                                  tm.tx_start, tm.tx_end, tm.ber))

    makespan = max((rec.end for rec in records), default=t0) - t0
    energy = sum(rec.energy for rec in records)
    attacks = sum(rec.attack for rec in records)
    r_total = lk.period_success_prob(rec.success_prob for rec in records)
    cost = makespan + scenario.beta1 * energy + scenario.beta2 * attacks
    outcome = PeriodOutcome(t0, tuple(records), makespan, energy, attacks, r_total, cost)
    return outcome, tl.queues()
