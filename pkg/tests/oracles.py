"""Independent reference implementations used by the tests."""
import heapq
import math

from dataclasses import replace

import numpy as np

from satedge import link as lk
from satedge.adversary import AdversaryConfig
from satedge.link import LinkConfig
from satedge.orbit import ConstellationConfig, SatelliteState, gamma_at, slant_range
from satedge.scenario import ComputeConfig, Scenario
from satedge.simcore import PeriodDecision, QueueState, execute_period
from satedge.workload import SecurityLevel, Task


def event_list_period(tasks, decision, queues, sats, t0, scenario):
    """Discrete-event simulation of one period with explicit queues.

    Every task is released at ``t0`` in dispatch order. Servers pick the
    earliest arrival, ties broken by dispatch position. Attacks are the
    expected values so the result is deterministic. Returns per-task
    ``(end, energy, attack, success)`` keyed by task index, plus the final
    server release times.
    """
    cfg = scenario.compute
    c = scenario.constellation
    J = len(sats)
    free = {"local": max(queues.local, t0), "crypto": max(queues.crypto, t0),
            "uplink": max(queues.uplink, t0)}
    for j in range(J):
        free[("sat", j)] = max(queues.satellites[j], t0)
    waiting = {k: [] for k in free}          # server -> heap of (arrival, pos, task)
    events = []                              # (time, seq, kind, payload)
    seq = 0
    pos = {i: k for k, i in enumerate(decision.order)}
    out = {}
    rate = {}

    def service(server, i):
        D = tasks[i].data_size
        if server == "local":
            return D * cfg.q_local / cfg.f_local
        if server == "crypto":
            return D * cfg.q_en / cfg.f_en
        if server == "uplink":
            return D / rate[i]
        return D * cfg.sat_cycles(server[1]) / cfg.sat_freq(server[1])

    def push(t, kind, payload):
        nonlocal seq
        heapq.heappush(events, (t, seq, kind, payload))
        seq += 1

    for i in decision.order:
        d = decision.assignment[i]
        push(t0, "arrive", ("local" if d == 0 else "crypto", i))

    busy = {k: False for k in free}
    log = {}
    while events:
        t, _, kind, payload = heapq.heappop(events)
        if kind == "arrive":
            server, i = payload
            heapq.heappush(waiting[server], (t, pos[i], i))
        else:
            server, i = payload
            busy[server] = False
            free[server] = t
            log[(server, i)] = t
            d = decision.assignment[i]
            if server == "crypto":
                push(t, "arrive", ("uplink", i))
            elif server == "uplink":
                push(t, "arrive", (("sat", d - 1), i))
            else:
                out[i] = t
        # start any idle server whose queue head has arrived
        for server in free:
            if busy[server] or not waiting[server]:
                continue
            arrival, _, i = waiting[server][0]
            if arrival > t:
                continue
            heapq.heappop(waiting[server])
            start = max(arrival, free[server])
            if server == "uplink":
                j = decision.assignment[i] - 1
                g = gamma_at(c, sats[j].gamma, start - t0)
                m = lk.metrics(slant_range(g, c.earth_radius, c.orbit_altitude), scenario.link)
                rate[i] = m.rate
                log[("ber", i)] = m.ber
            busy[server] = True
            push(start + service(server, i), "finish", (server, i))
    result = {}
    mu = scenario.adversary.mean_malicious
    for i, task in enumerate(tasks):
        d = decision.assignment[i]
        D = task.data_size
        if d == 0:
            e = cfg.k * cfg.f_local ** 3 * (D * cfg.q_local / cfg.f_local)
            result[i] = (out[i], e, 0.0, 1.0)
        else:
            e = cfg.k * cfg.f_en ** 3 * (D * cfg.q_en / cfg.f_en) + scenario.link.tx_power * (D / rate[i])
            a = -math.expm1(-mu * task.break_prob)
            ber = log[("ber", i)]
            r = math.exp(D * math.log1p(-ber))
            result[i] = (out[i], e, a, r)
    return result, free


def random_instance(rng: np.random.Generator, max_tasks=6, max_sats=3):
    """Small scenario with random compute speeds, backlogs and satellite angles."""
    J = int(rng.integers(1, max_sats + 1))
    I = int(rng.integers(1, max_tasks + 1))
    sc = Scenario(
        constellation=ConstellationConfig(satellite_count=J, angular_velocity=float(rng.uniform(0, 0.05))),
        link=LinkConfig(tx_power=0.5, noise_power=5e-12),
        compute=ComputeConfig(f_local=float(rng.uniform(1e9, 7e9)),
                              f_en=float(rng.uniform(1e9, 4e9)),
                              f_sat=tuple(float(x) for x in rng.uniform(2e9, 2e10, J))),
        adversary=AdversaryConfig(float(rng.uniform(0, 12))),
    )
    sats = [SatelliteState(j, float(rng.uniform(-9.5, 9.5)), 0.0) for j in range(J)]
    sats = [replace(s, slant_range=slant_range(s.gamma, 6371.0, 780.0)) for s in sats]
    tasks = [Task.make(i, float(rng.integers(1, 4e7)), SecurityLevel(int(rng.integers(3))))
             for i in range(I)]
    t0 = float(rng.uniform(0, 100))
    queues = QueueState(*(t0 + float(x) * float(rng.random() < 0.5) for x in rng.uniform(0, 5, 3)),
                        tuple(t0 + float(x) * float(rng.random() < 0.5) for x in rng.uniform(0, 5, J)))
    order = tuple(int(i) for i in rng.permutation(I))
    assignment = tuple(int(x) for x in rng.integers(0, J + 1, I))
    return sc, sats, tasks, t0, queues, order, assignment


def check_against_oracle(seed):
    rng = np.random.default_rng(seed)
    sc, sats, tasks, t0, queues, order, assignment = random_instance(rng)
    vis = [abs(s.gamma) < sc.constellation.visibility_bound for s in sats]
    assignment = tuple(d if d == 0 or vis[d - 1] else 0 for d in assignment)
    dec = PeriodDecision(assignment, order)
    out, q = execute_period(tasks, dec, queues, sats, t0, sc, attack_mode="expected")
    ref, free = event_list_period(tasks, dec, queues, sats, t0, sc)
    by_id = {r.task_id: r for r in out.records}
    for i, (end, energy, attack, success) in ref.items():
        r = by_id[tasks[i].id]
        if (r.end, r.energy, r.attack, r.success_prob) != (end, energy, attack, success):
            return False
    mk = max(v[0] for v in ref.values()) - t0
    if out.makespan != mk:
        return False
    if (q.local, q.crypto, q.uplink) != (free["local"], free["crypto"], free["uplink"]):
        return False
    return list(q.satellites) == [free[("sat", j)] for j in range(len(sats))]


def brute_force_gae(rewards, values, dones, gamma, lam, last_value=0.0):
    """O(T^2) direct sum of discounted TD errors, stopping at episode ends."""
    T = len(rewards)
    nxt = list(values[1:]) + [last_value]
    delta = [rewards[t] + gamma * nxt[t] * (1.0 - dones[t]) - values[t] for t in range(T)]
    adv = []
    for t in range(T):
        total, w = 0.0, 1.0
        for k in range(t, T):
            total += w * delta[k]
            if dones[k]:
                break
            w *= gamma * lam
        adv.append(total)
    return np.array(adv), np.array(adv) + np.asarray(values)


def fd_check_objective(seed, step=1e-5):
    """Max relative error between the analytic PPO gradient and central differences.

    Builds a 10-transition batch with random masks, advantages and old
    log-probabilities on a small policy/value pair.
    """
    from satedge.ppo.losses import masked_log_softmax, objective_and_grads
    from satedge.ppo.nn import MLP
    rng = np.random.default_rng(seed)
    obs_dim, n_act, B = 6, 5, 10
    pi = MLP((obs_dim, 8, 8, n_act), rng, out_scale=1.0)
    v = MLP((obs_dim, 8, 8, 1), rng)
    obs = rng.standard_normal((B, obs_dim))
    masks = rng.random((B, n_act)) < 0.7
    masks[np.arange(B), rng.integers(0, n_act, B)] = True
    logits, _ = pi.forward(obs)
    logp_cur = masked_log_softmax(logits, masks)
    actions = np.array([rng.choice(np.flatnonzero(m)) for m in masks])
    logp_old = logp_cur[np.arange(B), actions] + rng.normal(0, 0.3, B)
    adv = rng.standard_normal(B)
    ret = rng.standard_normal(B)
    args = (obs, masks, actions, logp_old, adv, ret, 0.2, 0.5, 0.01)

    L, _, pg, vg = objective_and_grads(pi, v, *args)
    worst = 0.0
    for net, grads in ((pi, pg), (v, vg)):
        for p, g in zip(net.params, grads):
            flat = p.reshape(-1)
            gflat = g.reshape(-1)
            for k in range(flat.size):
                old = flat[k]
                flat[k] = old + step
                up = objective_and_grads(pi, v, *args)[0]
                flat[k] = old - step
                down = objective_and_grads(pi, v, *args)[0]
                flat[k] = old
                num = (up - down) / (2 * step)
                denom = max(abs(num), abs(gflat[k]), 1e-6)
                worst = max(worst, abs(num - gflat[k]) / denom)
    return worst
