"""PPO objective pieces and their gradients with respect to logits/values.

The objective is maximised:

    L = clip_surrogate - c1 * value_loss + c2 * entropy
"""
from __future__ import annotations

import numpy as np

from ..errors import ContractViolation


def masked_log_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise log-probabilities; masked entries get ``-inf``."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any(axis=-1).all():
        raise ContractViolation("every row of the mask needs at least one open action")
    z = np.where(mask, logits, -np.inf)
    zmax = z.max(axis=-1, keepdims=True)
    shifted = z - zmax
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.exp(masked_log_softmax(logits, mask))


def entropy(probs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    logp = np.log(np.where(mask, probs, 1.0))
    return -(np.where(mask, probs * logp, 0.0)).sum(axis=-1)


def gae(rewards, values, dones, gamma: float, lam: float, last_value: float = 0.0):
    """Generalised advantage estimates and returns.

    ``values[t]`` estimates the state before reward ``t``. ``dones[t]`` marks
    that step ``t`` ended an episode; ``last_value`` bootstraps the state after
    the final step when it did not.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    n = len(rewards)
    adv = np.zeros(n)
    running = 0.0
    for t in reversed(range(n)):
        nxt = last_value if t == n - 1 else values[t + 1]
        live = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * nxt * live - values[t]
        running = delta + gamma * lam * live * running
        adv[t] = running
    return adv, adv + values


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    std = adv.std()
    return (adv - adv.mean()) / (std if std > 1e-8 else 1.0)


def clipped_policy_loss(logp_new, logp_old, adv, eps: float) -> float:
    ratio = np.exp(np.asarray(logp_new) - np.asarray(logp_old))
    adv = np.asarray(adv, dtype=float)
    return float(np.mean(np.minimum(ratio * adv, np.clip(ratio, 1 - eps, 1 + eps) * adv)))


def clipped_policy_grad(logp_new, logp_old, adv, eps: float) -> np.ndarray:
    """d(clipped_policy_loss)/d(logp_new), per sample."""
    ratio = np.exp(logp_new - logp_old)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1 - eps, 1 + eps) * adv
    inside = (ratio > 1 - eps) & (ratio < 1 + eps)
    live = (unclipped <= clipped) | inside
    return np.where(live, unclipped, 0.0) / len(adv)


def value_loss(v_pred, returns) -> float:
    d = np.asarray(v_pred, dtype=float) - np.asarray(returns, dtype=float)
    return float(np.mean(d * d))


def total_loss(policy_part: float, value_part: float, entropy_part: float,
               c1: float, c2: float) -> float:
    return policy_part - c1 * value_part + c2 * entropy_part


def objective_and_grads(policy, value, obs, masks, actions, logp_old, adv, returns,
                        eps: float, c1: float, c2: float):
    """Total objective on a minibatch and its gradients (ascent direction).

    Returns ``(L, parts, policy_grads, value_grads)`` where ``parts`` holds the
    individual terms and diagnostics.
    """
    B = len(actions)
    logits, p_acts = policy.forward(obs)
    logp_all = masked_log_softmax(logits, masks)
    probs = np.exp(logp_all)
    rows = np.arange(B)
    logp = logp_all[rows, actions]
    ent_rows = entropy(probs, masks)

    v, v_acts = value.forward(obs)
    v = v[:, 0]

    l_clip = clipped_policy_loss(logp, logp_old, adv, eps)
    l_vf = value_loss(v, returns)
    ent = float(ent_rows.mean())
    L = total_loss(l_clip, l_vf, ent, c1, c2)

    g_logp = clipped_policy_grad(logp, logp_old, adv, eps)
    onehot = np.zeros_like(probs)
    onehot[rows, actions] = 1.0
    d_logits = g_logp[:, None] * (onehot - probs)
    safe_logp = np.where(masks, logp_all, 0.0)
    d_logits += (c2 / B) * (-probs * (safe_logp + ent_rows[:, None]))
    d_v = (-c1 * 2.0 / B) * (v - returns)

    pg = policy.backward(p_acts, d_logits)
    vg = value.backward(v_acts, d_v[:, None])
    ratio = np.exp(logp - logp_old)
    parts = {
        "policy_loss": l_clip, "value_loss": l_vf, "entropy": ent,
        "ratio": float(ratio.mean()),
        "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > eps)),
    }
    return L, parts, pg, vg
