# %% [markdown]
# # Parameter sweeps
#
# The harness writes `results.csv` (one row per episode) and `summary.csv`
# (mean and spread per cell). Here: the number of malicious satellites and the
# local CPU frequency.

# %%
import tempfile
from pathlib import Path

from satedge.config import load_config, preset_path
from satedge.runner import run, summarize

base = load_config(preset_path("desk"), environ={}).with_overrides(episodes=3, seeds=[0, 1])
out = Path(tempfile.mkdtemp())

# %%
mu = base.with_overrides(policy="all_local,all_offloading", sweep_axis="mu",
                         sweep_values=[0, 3, 6, 9, 12])
for row in summarize(run(mu, out_dir=out / "mu")):
    print(f"mu={row['sweep_value']:4.0f} {row['policy']:<15} cost {row['mean_cost']:8.3f}")

# %% [markdown]
# All-Local never exposes a task, so its cost is identical for every mu.
# All-Offloading pays more as attackers multiply.

# %%
f = base.with_overrides(policy="all_local", sweep_axis="f_local",
                        sweep_values=[3.5e9, 4.5e9, 5.5e9, 6.5e9])
for row in summarize(run(f, out_dir=out / "f")):
    print(f"f_local={row['sweep_value'] / 1e9:.1f} GHz cost {row['mean_cost']:8.3f}")
print("CSV files in", out)
