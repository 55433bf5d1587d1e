"""Acceptance suite. Each test checks one criterion at its stated tolerance and
reports a single pass/fail line (collected and printed at the end of the run)."""
import math
import time

import mpmath as mp
import numpy as np
import pytest

from satedge import link as lk
from satedge.adversary import AdversaryConfig, sample_attack
from satedge.env import OffloadEnv
from satedge.orbit import slant_range
from satedge.ppo.losses import (clipped_policy_loss, entropy, gae, total_loss, value_loss)
from satedge.runner import evaluate, run, train_cell
from satedge.scenario import ComputeConfig, Scenario
from satedge.simcore import (encryption_energy, encryption_time, local_energy, local_latency,
                             offload_energy, satellite_compute_time, transmission_time)
from satedge.stats import not_significantly_decreasing, significantly_decreasing
from satedge.workload import SecurityLevel, Task

from oracles import brute_force_gae, check_against_oracle, fd_check_objective


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


# -- 1. formula oracles ------------------------------------------------------

def test_formula_oracles(criterion):
    t0 = time.perf_counter()
    mp.mp.dps = 50
    R, H = mp.mpf(6371), mp.mpf(780)
    cfg = ComputeConfig()
    worst, worst_ber = 0.0, 0.0
    for g in np.linspace(-180, 180, 37):
        ref = mp.sqrt(R**2 + (R + H)**2 - 2 * R * (R + H) * mp.cos(mp.radians(mp.mpf(g))))
        worst = max(worst, rel(slant_range(float(g), 6371.0, 780.0), float(ref)))
    for s in (1.0, 2.0, 780.0, 1411.6, 3000.0):
        beta = 10 ** -3.7
        h = mp.mpf(beta) / mp.mpf(s) ** 2
        worst = max(worst, rel(lk.path_gain(s, beta), float(h)))
        g = 5 * h / mp.mpf("1e-6")
        worst = max(worst, rel(lk.snr(float(h), lk.LinkConfig()), float(g)))
    for g in (1e-3, 0.1, 1.0, 3.0, 17.0, 30.0):
        worst = max(worst, rel(lk.shannon_rate(g, 20e6), float(20e6 * mp.log(1 + mp.mpf(g), 2))))
        worst_ber = max(worst_ber, rel(lk.bpsk_ber(g), float(mp.erfc(mp.sqrt(mp.mpf(g))) / 2)))
    D = mp.mpf(1.6e8)
    pairs = [
        (local_latency(1.6e8, cfg), D * 80 / mp.mpf(6.5e9)),
        (encryption_time(1.6e8, cfg), D * 20 / mp.mpf(3e9)),
        (transmission_time(1.6e8, 4.76e4), D / mp.mpf(4.76e4)),
        (satellite_compute_time(1.6e8, 0, cfg), D * 80 / mp.mpf(1e10)),
        (local_energy(1.9692, cfg), mp.mpf("1e-31") * mp.mpf(6.5e9) ** 3 * mp.mpf(1.9692)),
        (encryption_energy(1.6e8, cfg), mp.mpf("1e-31") * mp.mpf(3e9) ** 3 * D * 20 / mp.mpf(3e9)),
        (offload_energy(1.6e8, 8e7, cfg, 5.0),
         mp.mpf("1e-31") * mp.mpf(3e9) ** 3 * D * 20 / mp.mpf(3e9) + 5 * D / mp.mpf(8e7)),
        (lk.task_success_prob(1e-9, 1e8, True), mp.exp(mp.mpf(10) ** 8 * mp.log(1 - mp.mpf("1e-9")))),
    ]
    for a, b in pairs:
        worst = max(worst, rel(a, float(b)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and worst_ber <= 1e-6 and elapsed < 1.0
    criterion("1", ok, f"max rel err {worst:.2e} (tol 1e-9), BER {worst_ber:.2e} (tol 1e-6), "
                       f"{elapsed:.2f}s (< 1s)")
    assert ok


# -- 2. queueing equivalence ---------------------------------------------------

def test_queueing_equivalence(criterion):
    t0 = time.perf_counter()
    mismatches = sum(not check_against_oracle(s) for s in range(1000))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 10.0
    criterion("2", ok, f"{mismatches} mismatches in 1000 instances vs event-list oracle, "
                       f"{elapsed:.2f}s (< 10s)")
    assert ok


# -- 3. adversary statistics ---------------------------------------------------

def test_adversary_statistics(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    low = Task.make(0, 1e6, SecurityLevel.LOW)            # phi = 0.5
    cfg = AdversaryConfig()
    freq = sum(sample_attack(low, rng, cfg, forced_x=3) for _ in range(100_000)) / 100_000
    zero = AdversaryConfig(0.0)
    tasks = [Task.make(0, 1e6, lv) for lv in SecurityLevel]
    attacks_mu0 = sum(sample_attack(t, rng, zero) for _ in range(30_000) for t in tasks)
    elapsed = time.perf_counter() - t0
    ok = abs(freq - 0.875) <= 0.01 and attacks_mu0 == 0 and elapsed < 5.0
    criterion("3", ok, f"forced x=3 frequency {freq:.4f} (0.875 +- 0.01), "
                       f"{attacks_mu0} attacks at mu=0, {elapsed:.2f}s (< 5s)")
    assert ok


# -- 4. All-Local invariance in mu ----------------------------------------------

def test_all_local_invariance(criterion, desk_config, tmp_path):
    cfg = desk_config.with_overrides(policy="all_local", sweep_axis="mu",
                                     sweep_values=[0, 3, 6, 9, 12], seeds=[0], episodes=10)
    recs = run(cfg, out_dir=tmp_path)
    lines = (tmp_path / "summary.csv").read_text().splitlines()[1:]
    costs = {line.split(",")[4] for line in lines}
    ok = len(lines) == 5 and len(costs) == 1 and all(r.attacks == 0 for r in recs)
    criterion("4", ok, f"All-Local summary cost over mu in {{0,3,6,9,12}}: {sorted(costs)}")
    assert ok


# -- 5. PPO losses and gradients ----------------------------------------------------

def test_ppo_math(criterion):
    # constructed batch: ratios 1.5, 0.5, 1.0 with eps 0.2
    logp_new = np.log([0.6, 0.2, 0.5])
    logp_old = np.log([0.4, 0.4, 0.5])
    adv = np.array([2.0, -1.0, 0.5])
    # min(3.0, 2.4)=2.4 ; min(-0.5, -0.8)=-0.8 ; 0.5 -> mean 2.1/3 = 0.7
    l_clip = clipped_policy_loss(logp_new, logp_old, adv, 0.2)
    l_vf = value_loss([1.0, 0.0, 2.0], [3.0, 0.0, 1.0])          # (4 + 0 + 1) / 3
    probs = np.array([[0.5, 0.5, 0.0, 0.0], [0.25, 0.25, 0.25, 0.25]])
    masks = np.array([[True, True, False, False], [True, True, True, True]])
    ent = float(entropy(probs, masks).mean())                    # (ln 2 + ln 4) / 2
    exact = [
        (l_clip, (2.4 - 0.8 + 0.5) / 3),
        (l_vf, 5.0 / 3.0),
        (ent, (math.log(2) + math.log(4)) / 2),
        (total_loss(l_clip, l_vf, ent, 0.5, 0.01), l_clip - 0.5 * l_vf + 0.01 * ent),
        (total_loss(l_clip, l_vf, ent, 0.0, 0.0), l_clip),
    ]
    closed_form_err = max(abs(a - b) for a, b in exact)
    fd = max(fd_check_objective(seed) for seed in range(20))
    ok = closed_form_err <= 1e-15 and fd <= 1e-4
    criterion("5", ok, f"closed-form loss error {closed_form_err:.1e}, "
                       f"max FD relative error {fd:.2e} over 20 draws (<= 1e-4)")
    assert ok


# -- 6. GAE -------------------------------------------------------------------------

def test_gae(criterion):
    worst = 0.0
    lam0_exact = lam1_exact = True
    lam1_worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        r, v = rng.normal(size=50), rng.normal(size=50)
        d = rng.random(50) < 0.1
        last = float(rng.normal())
        gamma, lam = float(rng.uniform(0.8, 1.0)), float(rng.uniform(0.0, 1.0))
        adv, ret = gae(r, v, d, gamma, lam, last)
        ref_adv, ref_ret = brute_force_gae(r, v, d, gamma, lam, last)
        worst = max(worst, np.abs(adv - ref_adv).max(), np.abs(ret - ref_ret).max())
        # lambda = 0: the one-step TD error, bit for bit
        adv0, _ = gae(r, v, d, gamma, 0.0, last)
        nxt = np.append(v[1:], last)
        lam0_exact &= bool(np.array_equal(adv0, r + gamma * nxt * (1.0 - d) - v))
        # lambda = 1 with zero values: the discounted return, bit for bit
        adv1, _ = gae(r, np.zeros(50), d, gamma, 1.0, 0.0)
        G, mc = 0.0, np.zeros(50)
        for t in reversed(range(50)):
            G = r[t] + gamma * (0.0 if d[t] else 1.0) * G
            mc[t] = G
        lam1_exact &= bool(np.array_equal(adv1, mc))
        # lambda = 1 with values: discounted bootstrapped return minus V
        adv1v, _ = gae(r, v, d, gamma, 1.0, last)
        G, mcv = last, np.zeros(50)
        for t in reversed(range(50)):
            G = r[t] + gamma * (0.0 if d[t] else 1.0) * G
            mcv[t] = G - v[t]
        lam1_worst = max(lam1_worst, np.abs(adv1v - mcv).max())
    ok = worst <= 1e-10 and lam0_exact and lam1_exact and lam1_worst <= 1e-10
    criterion("6", ok, f"max |GAE - direct sum| {worst:.1e} over 100 sequences (<= 1e-10); "
                       f"lambda=0 exact: {lam0_exact}; lambda=1 exact: {lam1_exact} "
                       f"(with values {lam1_worst:.1e})")
    assert ok


# -- 7. constraint soundness ---------------------------------------------------------

@pytest.mark.slow
def test_constraint_soundness(criterion, desk):
    assert desk.rho == 0.7
    env = OffloadEnv(desk)
    rng = np.random.default_rng(7)
    bound = desk.constellation.visibility_bound
    periods = violations = invisible = offloads = 0
    t0 = time.perf_counter()
    for ep in range(10_000):
        env.reset(ep)
        while not env.episode_done:
            visible = [abs(s.gamma) < bound for s in env.state.sats]
            info = {}
            while not info:
                _, _, _, _, info = env.step(int(rng.choice(np.flatnonzero(env.action_mask()))))
            out = info["outcome"]
            periods += 1
            violations += out.r_total < desk.rho
            for rec in out.records:
                if rec.destination:
                    offloads += 1
                    invisible += not visible[rec.destination - 1]
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and invisible == 0
    criterion("7", ok, f"{periods} periods, {offloads} offloads: {violations} r_total < rho, "
                       f"{invisible} invisible targets ({elapsed:.0f}s)")
    assert ok


# -- 8. desk-scale learning ------------------------------------------------------------

@pytest.mark.slow
def test_desk_learning(criterion, desk_config, tmp_path):
    cfg = desk_config
    sc = cfg.scenario
    assert (sc.n_tasks, sc.n_sats, sc.periods, sc.period_length) == (5, 4, 10, 60.0)
    assert cfg["total_timesteps"] == 50_000 and cfg["episodes"] == 100
    t0 = time.perf_counter()
    seed = 0
    model = train_cell(cfg, seed, tmp_path, "desk").model
    means = {}
    for policy in ("ppo", "greedy", "round_robin", "all_local", "all_offloading"):
        rows = evaluate(sc, policy, seed, cfg["episodes"], model=model,
                        greedy_samples=cfg["greedy_samples"])
        means[policy] = float(np.mean([r["reward"] for r in rows]))
    elapsed = time.perf_counter() - t0
    beaten = all(means["ppo"] >= v for k, v in means.items() if k != "ppo")
    ok = beaten and elapsed <= 600
    detail = ", ".join(f"{k} {v:.3f}" for k, v in means.items())
    criterion("8", ok, f"mean eval reward over 100 episodes: {detail}; {elapsed:.0f}s (<= 600s)")
    assert ok


# -- 9. trend reproduction ---------------------------------------------------------------

SEEDS = range(30)


def _per_seed_cost(scenario, policy, greedy_samples, episodes=1):
    return [float(np.mean([r["cost"] for r in evaluate(scenario, policy, s, episodes,
                                                       greedy_samples=greedy_samples)]))
            for s in SEEDS]


def _sweep(cfg, key, values, policy):
    return [_per_seed_cost(cfg.with_overrides(**{key: v}).scenario, policy, cfg["greedy_samples"])
            for v in values]


def _nondecreasing(series):
    return all(not_significantly_decreasing(a, b) for a, b in zip(series, series[1:]))


@pytest.mark.slow
def test_trend_offloading_mu(criterion, desk_config):
    mus = [0.0, 3.0, 6.0, 9.0, 12.0]
    series = _sweep(desk_config, "mean_malicious", mus, "all_offloading")
    ok = _nondecreasing(series)
    means = ", ".join(f"{np.mean(s):.2f}" for s in series)
    criterion("9a", ok, f"All-Offloading mean cost over mu {mus}: {means} "
                        f"(no significant decrease, sign test 95%, 30 seeds)")
    assert ok


@pytest.mark.slow
def test_trend_local_f(criterion, desk_config):
    fs = [3.5e9, 4.5e9, 5.5e9, 6.5e9]
    series = _sweep(desk_config, "f_local_hz", fs, "all_local")
    ok = all(significantly_decreasing(a, b) for a, b in zip(series, series[1:]))
    means = ", ".join(f"{np.mean(s):.2f}" for s in series)
    criterion("9b", ok, f"All-Local mean cost over f_local 3.5..6.5 GHz: {means} "
                        f"(significant decrease at each step, sign test 95%, 30 seeds)")
    assert ok


@pytest.mark.slow
def test_trend_task_size(criterion, desk_config):
    lams = [10.0, 15.0, 20.0, 25.0, 30.0]
    results = {}
    for policy in ("greedy", "round_robin", "all_local", "all_offloading", "random"):
        series = _sweep(desk_config, "mean_data_size_mb", lams, policy)
        results[policy] = (_nondecreasing(series), [float(np.mean(s)) for s in series])
    ok = all(v[0] for v in results.values())
    detail = "; ".join(f"{k} {'ok' if v[0] else 'DECREASES'} "
                       f"[{', '.join(f'{m:.1f}' for m in v[1])}]" for k, v in results.items())
    criterion("9c", ok, f"mean cost over lambda {lams} MB: {detail}")
    assert ok


# -- 10. convergence sweep ------------------------------------------------------------------

@pytest.mark.slow
def test_convergence_sweep(criterion, desk_config, tmp_path):
    t0 = time.perf_counter()
    finals = {}
    written = []
    for key, values in (("update_interval", [5, 50, 500, 1000]),
                        ("learning_rate", [1e-4, 3e-4, 1e-3, 1e-2])):
        for v in values:
            cfg = desk_config.with_overrides(**{key: v})
            res = train_cell(cfg, 0, tmp_path, f"{key}={v:g}")
            finals[(key, v)] = res.final_reward()
            path = tmp_path / "curves" / f"reward_curve_{key}={v:g}_seed0.csv"
            lines = path.read_text().splitlines()
            written.append(path.exists() and len(lines) >= 2)
    elapsed = time.perf_counter() - t0
    trend = finals[("update_interval", 5)] >= finals[("update_interval", 1000)]
    ok = all(written) and trend and elapsed <= 3600
    detail = ", ".join(f"{k}={v:g}: {r:.2f}" for (k, v), r in finals.items())
    criterion("10", ok, f"{sum(written)}/8 curves written; final rewards {detail}; "
                        f"{elapsed:.0f}s (<= 3600s)")
    assert ok
