import numpy as np
import pytest
from hypothesis import given, strategies as st

from satedge.adversary import (AdversaryConfig, break_prob, expected_attack_prob, sample_attack,
                               security_strength)
from satedge.workload import (SecurityLevel, Task, WorkloadConfig, block_length_for,
                              generate_period)


def test_empty_period():
    assert generate_period(WorkloadConfig(tasks_per_period=0), np.random.default_rng(0)) == []


def test_poisson_mean():
    lam = 1.6e8
    rng = np.random.default_rng(7)
    cfg = WorkloadConfig(tasks_per_period=20, mean_data_size=lam)
    # 1e5 periods of 20 tasks; vectorised draw from the same sampler path
    total, n = 0.0, 0
    for _ in range(200):
        tasks = [generate_period(cfg, rng) for _ in range(500)]
        total += sum(t.data_size for ts in tasks for t in ts)
        n += sum(len(ts) for ts in tasks)
    assert n == 2_000_000
    assert abs(total / n - lam) / lam < 1e-3




@pytest.mark.parametrize("level, n", [(SecurityLevel.LOW, 192), (SecurityLevel.MEDIUM, 224),
                                      (SecurityLevel.HIGH, 256)])
def test_block_lengths(level, n):
    assert block_length_for(level) == n


def test_high_is_unbreakable():
    t = Task.make(0, 1e6, SecurityLevel.HIGH)
    assert (t.block_length, t.break_prob) == (256, 0.0)


@given(st.integers(0, 40), st.integers(0, 2**32 - 1))
def test_generated_tasks_valid(n, seed):
    tasks = generate_period(WorkloadConfig(tasks_per_period=n, mean_data_size=50.0),
                            np.random.default_rng(seed))
    assert len(tasks) == n
    assert [t.id for t in tasks] == list(range(n))
    for t in tasks:
        assert t.data_size > 0 and float(t.data_size).is_integer()
        assert t.block_length == block_length_for(t.level)
        assert t.break_prob == break_prob(t.block_length)


def test_level_distribution_respected():
    cfg = WorkloadConfig(tasks_per_period=1000, level_distribution=(0.0, 0.0, 1.0))
    assert {t.level for t in generate_period(cfg, np.random.default_rng(1))} == {SecurityLevel.HIGH}


@pytest.mark.parametrize("kw", [dict(tasks_per_period=-1), dict(mean_data_size=0),
                                dict(level_distribution=(0.5, 0.5, 0.5))])
def test_workload_config_invalid(kw):
    with pytest.raises(ValueError):
        WorkloadConfig(**kw)


@pytest.mark.parametrize("n, phi", [(256, 0.0), (128, 1.0), (192, 0.5)])
def test_break_prob(n, phi):
    assert break_prob(n) == phi


@pytest.mark.parametrize("n", [127, 257])
def test_break_prob_range(n):
    with pytest.raises(ValueError):
        break_prob(n)


@pytest.mark.parametrize("phi, x, s", [(0.3, 0, 1.0), (0.0, 5, 1.0), (0.5, 3, 0.125)])
def test_security_strength(phi, x, s):
    assert security_strength(phi, x) == s


@given(st.floats(0, 1), st.integers(0, 50), st.integers(0, 50))
def test_security_strength_monotone(phi, x, dx):
    assert security_strength(phi, x + dx) <= security_strength(phi, x)


def _task(level):
    return Task.make(0, 1e6, level)


def test_mu_zero_never_attacks():
    rng = np.random.default_rng(0)
    cfg = AdversaryConfig(0.0)
    t = Task.make(0, 1e6, SecurityLevel.LOW)
    assert sum(sample_attack(t, rng, cfg) for _ in range(20_000)) == 0


def test_unbreakable_never_attacked():
    rng = np.random.default_rng(0)
    t = _task(SecurityLevel.HIGH)
    assert sum(sample_attack(t, rng, AdversaryConfig(12.0)) for _ in range(20_000)) == 0


def test_forced_x_frequency():
    rng = np.random.default_rng(3)
    t = _task(SecurityLevel.LOW)          # phi = 0.5
    freq = np.mean([sample_attack(t, rng, AdversaryConfig(), forced_x=3) for _ in range(100_000)])
    assert abs(freq - 0.875) <= 0.01


def test_expected_attack_matches_monte_carlo():
    # E[1 - (1-phi)^x], x ~ Poisson(mu), by summing the pmf directly
    from scipy.stats import poisson
    phi, mu = 0.5, 3.0
    ks = np.arange(200)
    oracle = float(np.sum(poisson.pmf(ks, mu) * (1 - (1 - phi) ** ks)))
    assert expected_attack_prob(phi, mu) == pytest.approx(oracle, rel=1e-12)
    rng = np.random.default_rng(11)
    t = _task(SecurityLevel.LOW)
    freq = np.mean([sample_attack(t, rng, AdversaryConfig(mu)) for _ in range(50_000)])
    assert abs(freq - oracle) < 0.01


def test_adversary_config_invalid():
    with pytest.raises(ValueError):
        AdversaryConfig(-1.0)
