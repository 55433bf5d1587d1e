"""Experiment execution: evaluate policies, sweep a parameter, write CSVs.

Every evaluation episode ``e`` of seed ``s`` resets the environment with the
same derived seed whatever the policy or sweep value, so all policies see the
same task sequences (common random numbers).
"""
from __future__ import annotations

import csv
import hashlib
import logging
import math
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .baselines import make_baseline
from .config import ExperimentConfig
from .env import OffloadEnv
from .ppo.agent import ActorCritic, PpoPolicy, TrainResult, train
from .rng import derive_seed, substream
from .scenario import Scenario

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("config_hash", "sweep_axis", "sweep_value", "policy", "seed", "episode",
                  "makespan", "t_total", "energy", "attacks", "cost", "reward",
                  "min_r_total", "workload_hash")
SUMMARY_COLUMNS = ("sweep_axis", "sweep_value", "policy", "n", "mean_cost", "std_cost",
                   "mean_reward", "std_reward", "mean_makespan", "mean_energy", "mean_attacks")


@dataclass(frozen=True)
class RunRecord:
    config_hash: str
    sweep_axis: str
    sweep_value: Optional[float]
    policy: str
    seed: int
    episode: int
    makespan: float                       # sum of per-period makespans
    t_total: float                        # latest completion over the horizon
    energy: float
    attacks: float
    cost: float
    reward: float
    min_r_total: float
    workload_hash: str
    wall_clock: float = 0.0


def episode_seed(seed: int, episode: int) -> int:
    return derive_seed(seed, "eval-episode", episode)


def _workload_digest(env: OffloadEnv, h) -> None:
    for t in env.planner.tasks:
        h.update(f"{t.id}:{t.data_size!r}:{int(t.level)};".encode())


def run_episode(env: OffloadEnv, seed: int, policy: str, *, model: Optional[ActorCritic] = None,
                greedy_samples: int = 1000, greedy_attack_mode: str = "expected") -> dict:
    """Play one episode; returns cost breakdown and a digest of the tasks seen."""
    sc = env.scenario
    env.reset(seed)
    h = hashlib.sha256()
    rng = substream(seed, "policy", 1)
    if policy == "ppo":
        actor = PpoPolicy(model, deterministic=True)
    else:
        decide = make_baseline(policy, greedy_samples, greedy_attack_mode)
    reward = 0.0
    obs = env.observation()
    while not env.episode_done:
        _workload_digest(env, h)
        if policy == "ppo":
            for _ in range(env.n_tasks):
                obs, r, _, _, _ = env.step(actor.act(obs, env.action_mask()))
                reward += r
        else:
            dec = decide(env.planner, rng)
            for i in dec.order:
                obs, r, _, _, _ = env.step(i * (env.n_sats + 1) + dec.assignment[i])
                reward += r
    hist = env.history
    makespan = sum(o.makespan for o in hist)
    energy = sum(o.energy for o in hist)
    attacks = sum(o.attacks for o in hist)
    return {
        "makespan": makespan, "t_total": env.horizon_makespan(), "energy": energy,
        "attacks": attacks, "cost": makespan + sc.beta1 * energy + sc.beta2 * attacks,
        "reward": reward, "min_r_total": min(o.r_total for o in hist),
        "workload_hash": h.hexdigest()[:16],
    }


def evaluate(scenario: Scenario, policy: str, seed: int, episodes: int, *,
             model: Optional[ActorCritic] = None, greedy_samples: int = 1000,
             greedy_attack_mode: str = "expected") -> list[dict]:
    env = OffloadEnv(scenario)
    return [run_episode(env, episode_seed(seed, e), policy, model=model,
                        greedy_samples=greedy_samples, greedy_attack_mode=greedy_attack_mode)
            for e in range(episodes)]


def _cell_tag(value) -> str:
    return "base" if value is None else f"{value:g}"


def train_cell(cfg: ExperimentConfig, seed: int, out: Optional[Path], tag: str) -> TrainResult:
    sc = cfg.scenario
    ckpt = curve = None
    if out is not None:
        ckpt = out / "checkpoints" / f"ppo_{tag}_seed{seed}.npz"
        curve = out / "curves" / f"reward_curve_{tag}_seed{seed}.csv"
    return train(lambda: OffloadEnv(sc), cfg.ppo, seed, checkpoint_path=ckpt, curve_path=curve,
                 meta={"config_hash": cfg.hash, "seed": seed})


def run(cfg: ExperimentConfig, policies: Optional[Sequence[str]] = None,
        out_dir: Optional[Path] = None, models: Optional[Mapping] = None) -> list[RunRecord]:
    """Evaluate ``policies`` on every sweep cell x seed and write the CSVs.

    ``models`` may map ``(sweep_value, seed)`` to a trained model to skip
    training. Rows already produced are flushed if a later cell fails.
    """
    policies = list(policies or [p.strip() for p in cfg["policy"].split(",")])
    out = Path(out_dir if out_dir is not None else cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    records: list[RunRecord] = []
    try:
        for value, cell in cfg.sweep_cells():
            tag = _cell_tag(value)
            for seed in cell["seeds"]:
                for policy in policies:
                    t_start = time.perf_counter()
                    model = None
                    if policy == "ppo":
                        model = (models or {}).get((value, seed))
                        if model is None:
                            model = train_cell(cell, seed, out, tag).model
                    rows = evaluate(cell.scenario, policy, seed, cell["episodes"], model=model,
                                    greedy_samples=cell["greedy_samples"],
                                    greedy_attack_mode=cell["greedy_attack_mode"])
                    wall = (time.perf_counter() - t_start) / len(rows)
                    for e, row in enumerate(rows):
                        records.append(RunRecord(cfg.hash, cfg["sweep_axis"], value, policy,
                                                 seed, e, wall_clock=wall, **row))
                    log.info("cell %s seed %d %s: mean cost %.4f", tag, seed, policy,
                             statistics.fmean(r["cost"] for r in rows))
    finally:
        write_results(out / "results.csv", records)
        write_summary(out / "summary.csv", records)
    return records


# -- CSV output ---------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results(path: Path, records: Iterable[RunRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(RESULT_COLUMNS)
        for r in records:
            d = asdict(r)
            w.writerow([_fmt(d[c]) for c in RESULT_COLUMNS])


def read_results(path: Path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def summarize(records: Iterable[RunRecord]) -> list[dict]:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.sweep_axis, r.sweep_value, r.policy), []).append(r)
    rows = []
    for (axis, value, policy), rs in groups.items():
        costs = [r.cost for r in rs]
        rewards = [r.reward for r in rs]
        rows.append({
            "sweep_axis": axis, "sweep_value": value, "policy": policy, "n": len(rs),
            "mean_cost": statistics.fmean(costs),
            "std_cost": statistics.stdev(costs) if len(rs) > 1 else 0.0,
            "mean_reward": statistics.fmean(rewards),
            "std_reward": statistics.stdev(rewards) if len(rs) > 1 else 0.0,
            "mean_makespan": statistics.fmean(r.makespan for r in rs),
            "mean_energy": statistics.fmean(r.energy for r in rs),
            "mean_attacks": statistics.fmean(r.attacks for r in rs),
        })
    return rows


def write_summary(path: Path, records: Iterable[RunRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in summarize(records):
            w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])


# -- paired comparison ----------------------------------------------------------

def compare(records: Iterable[RunRecord],
            key: Callable[[RunRecord], str] = lambda r: r.policy) -> list[dict]:
    """Rank groups by mean cost, paired on ``(seed, episode)``.

    Every group must cover exactly the same ``(seed, episode)`` pairs.
    Groups whose paired cost differences are all zero share a rank.
    """
    groups: dict = {}
    for r in records:
        groups.setdefault(key(r), {})[(r.seed, r.episode)] = r.cost
    if len(groups) < 2:
        raise ValueError("compare needs at least two groups")
    keysets = {name: frozenset(g) for name, g in groups.items()}
    if len(set(keysets.values())) != 1:
        raise ValueError("mismatched seeds/episodes between compared groups")
    pairs = sorted(next(iter(keysets.values())))
    means = {name: statistics.fmean(g[p] for p in pairs) for name, g in groups.items()}
    order = sorted(groups, key=lambda n: (means[n], n))
    best = order[0]
    rows = []
    rank = 0
    prev = None
    for pos, name in enumerate(order):
        diffs = np.array([groups[name][p] - groups[best][p] for p in pairs])
        if prev is None or any(groups[name][p] != groups[prev][p] for p in pairs):
            rank = pos + 1
        prev = name
        se = float(diffs.std(ddof=1) / math.sqrt(len(diffs))) if len(diffs) > 1 else 0.0
        rows.append({"rank": rank, "group": name, "mean_cost": means[name],
                     "mean_diff_vs_best": float(diffs.mean()), "paired_std_err": se,
                     "wins_vs_best": int((diffs < 0).sum()), "losses_vs_best": int((diffs > 0).sum())})
    return rows


def write_ranking(path: Path, rows: Sequence[dict]) -> None:
    cols = ("rank", "group", "mean_cost", "mean_diff_vs_best", "paired_std_err",
            "wins_vs_best", "losses_vs_best")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in cols])
