# %% [markdown]
# # One scheduling period, task by task
#
# A period's tasks share four FCFS resources: the local CPU, the encryption
# unit, a single uplink radio and one CPU per satellite. This walks through a
# mixed decision and prints when each task starts and finishes.

# %%
import numpy as np

from satedge.config import load_config, preset_path
from satedge.orbit import initial_states
from satedge.rng import substream
from satedge.simcore import PeriodDecision, QueueState, execute_period
from satedge.workload import generate_period

sc = load_config(preset_path("desk"), environ={}).scenario
tasks = generate_period(sc.workload, substream(0, "workload"))
sats = initial_states(sc.constellation)
for t in tasks:
    print(f"task {t.id}: {t.data_size / 8e6:6.2f} MB, level {t.level.name:<6} block {t.block_length}")
print("satellite angles:", [round(s.gamma, 1) for s in sats])

# %% [markdown]
# Sizes are Poisson in bits with a mean of 1.6e8, so they barely vary
# (standard deviation about 1.3e4 bits). What separates the tasks is their
# security level.
#
# Send the High task (256-bit blocks, unbreakable) and one Medium task to the
# two satellites nearest the zenith, and keep the rest local. The dispatch
# order puts the uploads first so the radio starts early.

# %%
high = next(t.id for t in tasks if t.level.name == "HIGH")
medium = next(t.id for t in tasks if t.level.name == "MEDIUM")
assignment = tuple(2 if i == high else 3 if i == medium else 0 for i in range(len(tasks)))
order = (high, medium) + tuple(i for i in range(len(tasks)) if i not in (high, medium))
decision = PeriodDecision(assignment, order)
out, queues = execute_period(tasks, decision, QueueState.empty(sc.n_sats), sats, 0.0, sc,
                             attack_mode="expected")
for r in out.records:
    where = "local" if r.destination == 0 else f"sat {r.destination}"
    tx = "" if np.isnan(r.tx_start) else f" uplink {r.tx_start:6.2f}-{r.tx_end:6.2f}"
    print(f"task {r.task_id} -> {where:<6} start {r.start:6.2f} end {r.end:6.2f}{tx}"
          f"  E={r.energy:.3f} J  attack={r.attack:.3f}  r={r.success_prob:.6f}")
print(f"makespan {out.makespan:.3f} s, energy {out.energy:.3f} J, "
      f"expected attacks {out.attacks:.3f}, r_total {out.r_total:.6f}, cost {out.cost:.3f}")

# %% [markdown]
# The same tasks all kept local, for comparison. No attacks, but the local CPU
# serialises everything.

# %%
local, _ = execute_period(tasks, PeriodDecision((0,) * 5, tuple(range(5))),
                          QueueState.empty(sc.n_sats), sats, 0.0, sc, attack_mode="expected")
print(f"all local: makespan {local.makespan:.3f} s, energy {local.energy:.3f} J, cost {local.cost:.3f}")
