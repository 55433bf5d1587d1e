"""Actor-critic parameters, the PPO update and the training loop."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ContractViolation
from ..rng import derive_seed, substream
from .losses import gae, masked_log_softmax, normalize_advantages, objective_and_grads
from .nn import MLP, Adam

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
CURVE_COLUMNS = ("update_index", "env_steps", "mean_episode_reward", "policy_loss",
                 "value_loss", "entropy", "clip_fraction")


class NonFiniteGradientError(FloatingPointError):
    pass


@dataclass(frozen=True)
class PpoConfig:
    total_timesteps: int = 500_000
    update_interval: int = 5
    interval_unit: str = "episodes"       # or "steps"
    batch_size: int = 64
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_range: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    learning_rate: float = 3e-4
    epochs_per_update: int = 10
    hidden_sizes: tuple = (64, 64)
    max_grad_norm: float = 0.5            # <= 0 disables clipping
    reward_scale: float = 1.0             # rewards are multiplied by this before learning

    def __post_init__(self):
        if not (0 <= self.gamma <= 1 and 0 <= self.gae_lambda <= 1):
            raise ValueError("gamma and gae_lambda must lie in [0, 1]")
        if not self.clip_range > 0:
            raise ValueError("clip_range must be positive")
        if self.total_timesteps < 0:
            raise ValueError("total_timesteps must be >= 0")
        for name in ("update_interval", "batch_size", "epochs_per_update"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.interval_unit not in ("episodes", "steps"):
            raise ValueError("interval_unit must be 'episodes' or 'steps'")
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden sizes must be positive")


class ActorCritic:
    """Policy trunk ``pi`` (logits), its frozen copy ``pi_old``, and value trunk ``v``."""

    def __init__(self, obs_dim: int, n_actions: int, hidden: Sequence[int],
                 rng: np.random.Generator):
        self.obs_dim, self.n_actions = obs_dim, n_actions
        self.hidden = tuple(hidden)
        self.pi = MLP((obs_dim, *hidden, n_actions), rng, out_scale=0.01)
        self.v = MLP((obs_dim, *hidden, 1), rng, out_scale=1.0)
        self.pi_old = self.pi.copy()

    def sync_old(self) -> None:
        self.pi_old = self.pi.copy()

    def probs(self, obs: np.ndarray, mask: np.ndarray, old: bool = True) -> np.ndarray:
        return policy_forward(self.pi_old if old else self.pi, obs, mask)

    def value(self, obs: np.ndarray) -> float:
        return float(self.v.forward(obs[None, :])[0][0, 0])

    def finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.pi.params + self.v.params)


def policy_forward(net: MLP, obs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Action distribution; masked actions get probability exactly 0."""
    single = obs.ndim == 1
    logits, _ = net.forward(obs[None, :] if single else obs)
    p = np.exp(masked_log_softmax(logits, np.asarray(mask, dtype=bool).reshape(logits.shape)))
    return p[0] if single else p


# -- rollout buffer ---------------------------------------------------------

@dataclass
class Buffer:
    obs: list = field(default_factory=list)
    masks: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    logp: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    dones: list = field(default_factory=list)
    values: list = field(default_factory=list)
    last_value: float = 0.0

    def __len__(self):
        return len(self.actions)

    def add(self, obs, mask, action, logp, reward, done, value):
        self.obs.append(obs)
        self.masks.append(mask)
        self.actions.append(action)
        self.logp.append(logp)
        self.rewards.append(reward)
        self.dones.append(done)
        self.values.append(value)

    def clear(self):
        self.__init__()


def clip_grads(grads: list, max_norm: float) -> float:
    norm = math.sqrt(sum(float((g * g).sum()) for g in grads))
    if max_norm > 0 and norm > max_norm:
        for g in grads:
            g *= max_norm / (norm + 1e-12)
    return norm


def update(buffer: Buffer, model: ActorCritic, opt: Adam, cfg: PpoConfig,
           rng: np.random.Generator) -> dict:
    """Several epochs of minibatch ascent on the PPO objective; then ``pi_old <- pi``
    and the buffer is cleared."""
    if len(buffer) < cfg.batch_size:
        raise ContractViolation("buffer holds fewer transitions than batch_size")
    obs = np.asarray(buffer.obs)
    masks = np.asarray(buffer.masks)
    actions = np.asarray(buffer.actions)
    logp_old = np.asarray(buffer.logp)
    values = np.asarray(buffer.values)
    adv, returns = gae(np.asarray(buffer.rewards) * cfg.reward_scale, values, buffer.dones,
                       cfg.gamma, cfg.gae_lambda, buffer.last_value)
    adv = normalize_advantages(adv)

    n = len(actions)
    stats = {"policy_loss": [], "value_loss": [], "entropy": [], "ratio": [], "clip_fraction": []}
    params = model.pi.params + model.v.params
    n_pi = len(model.pi.params)
    for _ in range(cfg.epochs_per_update):
        idx = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            mb = idx[start:start + cfg.batch_size]
            _, parts, pg, vg = objective_and_grads(
                model.pi, model.v, obs[mb], masks[mb], actions[mb], logp_old[mb],
                adv[mb], returns[mb], cfg.clip_range, cfg.value_coef, cfg.entropy_coef)
            grads = [-g for g in pg + vg]       # descend on -L
            if not all(np.isfinite(g).all() for g in grads):
                raise NonFiniteGradientError(f"non-finite gradient; diagnostics {parts}")
            clip_grads(grads, cfg.max_grad_norm)
            opt.step(params, grads)
            for k in stats:
                stats[k].append(parts[k])
    model.pi.params[:] = params[:n_pi]
    model.v.params[:] = params[n_pi:]
    model.sync_old()
    buffer.clear()
    return {k: float(np.mean(v)) for k, v in stats.items()}


# -- acting -----------------------------------------------------------------

def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    c = np.cumsum(probs)
    a = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
    a = min(a, len(probs) - 1)
    while probs[a] == 0.0:              # guard the edge of a zero-width bin
        a -= 1
    return a


class PpoPolicy:
    """Acts with the trained policy; greedy (mode) unless ``deterministic=False``."""

    def __init__(self, model: ActorCritic, deterministic: bool = True):
        self.model = model
        self.deterministic = deterministic

    def act(self, obs, mask, rng=None) -> int:
        p = self.model.probs(obs, mask, old=False)
        if self.deterministic:
            return int(np.argmax(p))
        return sample_action(p, rng)


# -- training -----------------------------------------------------------------

@dataclass
class TrainResult:
    model: ActorCritic
    curve: list                           # dict rows with CURVE_COLUMNS
    episode_rewards: list
    env_steps: int

    def final_reward(self, window: int = 50) -> float:
        if not self.episode_rewards:
            return math.nan
        return float(np.mean(self.episode_rewards[-window:]))


def train(env_factory: Callable, cfg: PpoConfig, seed: int,
          checkpoint_path: Optional[Path] = None, curve_path: Optional[Path] = None,
          meta: Optional[dict] = None) -> TrainResult:
    env = env_factory()
    model = ActorCritic(env.obs_dim, env.n_actions, cfg.hidden_sizes, substream(seed, "init"))
    opt = Adam(model.pi.params + model.v.params, lr=cfg.learning_rate)
    act_rng = substream(seed, "policy")
    upd_rng = substream(seed, "minibatch")
    buf = Buffer()
    curve, ep_rewards = [], []
    since_update: list = []
    steps = episodes = units = 0
    obs = None
    ep_reward = 0.0

    while steps < cfg.total_timesteps:
        if obs is None:
            obs = env.reset(derive_seed(seed, "train-episode", episodes))
            ep_reward = 0.0
        mask = env.action_mask()
        p = model.probs(obs, mask)
        a = sample_action(p, act_rng)
        v = model.value(obs)
        nxt, r, _, ep_done, _ = env.step(a)
        buf.add(obs, mask, a, math.log(p[a]), r, ep_done, v)
        steps += 1
        ep_reward += r
        obs = nxt
        if ep_done:
            episodes += 1
            ep_rewards.append(ep_reward)
            since_update.append(ep_reward)
            obs = None
        if cfg.interval_unit == "steps" or ep_done:
            units += 1
        ready = units >= cfg.update_interval and len(buf) >= cfg.batch_size
        if ready:
            buf.last_value = 0.0 if obs is None else model.value(obs)
            stats = update(buf, model, opt, cfg, upd_rng)
            units = 0
            row = {"update_index": len(curve), "env_steps": steps,
                   "mean_episode_reward": float(np.mean(since_update)) if since_update else math.nan,
                   **{k: stats[k] for k in ("policy_loss", "value_loss", "entropy", "clip_fraction")}}
            curve.append(row)
            since_update = []
            if not model.finite():
                raise NonFiniteGradientError("parameters became non-finite")
            log.debug("update %d steps=%d reward=%.3f", row["update_index"], steps,
                      row["mean_episode_reward"])

    result = TrainResult(model, curve, ep_rewards, steps)
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, model, cfg, meta)
    if curve_path is not None:
        write_curve(curve_path, curve)
    return result


# -- persistence --------------------------------------------------------------

def write_curve(path, curve) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CURVE_COLUMNS)
        w.writeheader()
        for row in curve:
            w.writerow({k: repr(row[k]) if isinstance(row[k], float) else row[k]
                        for k in CURVE_COLUMNS})


def save_checkpoint(path, model: ActorCritic, cfg: PpoConfig, meta: Optional[dict] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"version": CHECKPOINT_VERSION, "obs_dim": model.obs_dim,
              "n_actions": model.n_actions, "hidden": list(model.hidden),
              "ppo": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
              **(meta or {})}
    arrays = {f"pi_{k}": p for k, p in enumerate(model.pi.params)}
    arrays.update({f"v_{k}": p for k, p in enumerate(model.v.params)})
    with path.open("wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header, sort_keys=True)), **arrays)


def load_checkpoint(path) -> tuple[ActorCritic, dict]:
    with np.load(Path(path), allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header.get('version')}")
        model = ActorCritic(header["obs_dim"], header["n_actions"], header["hidden"],
                            np.random.default_rng(0))
        model.pi.params = [data[f"pi_{k}"].copy() for k in range(len(model.pi.params))]
        model.v.params = [data[f"v_{k}"].copy() for k in range(len(model.v.params))]
    model.sync_old()
    return model, header
