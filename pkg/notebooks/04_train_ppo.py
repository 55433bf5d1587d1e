# %% [markdown]
# # Training the PPO scheduler
#
# The desk preset trains in well under a minute on one core. The curve below
# is the mean training-episode reward between updates.

# %%
import numpy as np

from satedge.config import load_config, preset_path
from satedge.runner import evaluate, train_cell

cfg = load_config(preset_path("desk"), environ={})
res = train_cell(cfg, seed=0, out=None, tag="demo")
rewards = [row["mean_episode_reward"] for row in res.curve]
for k in range(0, len(rewards), max(1, len(rewards) // 10)):
    print(f"update {k:4d}  steps {res.curve[k]['env_steps']:6d}  reward {rewards[k]:8.2f}")
print("final (last 50 episodes):", round(res.final_reward(), 3))

# %% [markdown]
# Deterministic evaluation against Greedy-100 on the same 20 episodes.

# %%
for policy in ("ppo", "greedy", "all_local"):
    rows = evaluate(cfg.scenario, policy, 0, 20, model=res.model,
                    greedy_samples=cfg["greedy_samples"])
    print(f"{policy:<10} mean reward {np.mean([r['reward'] for r in rows]):8.3f}")
