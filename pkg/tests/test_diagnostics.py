"""Convergence diagnostics against brute-force recomputations."""
import numpy as np
import pytest

from mrrope.diagnostics import ess_bulk, split_rhat


def brute_force_rhat(chains):
    """Textbook split-Rhat over 2m half chains."""
    halves = []
    for chain in chains:
        chain = np.asarray(chain, dtype=float)
        half = chain.size // 2
        halves.append(chain[:half])
        halves.append(chain[half:2 * half])
    halves = np.asarray(halves)
    m, n = halves.shape
    within = halves.var(axis=1, ddof=1).mean()
    between = n * halves.mean(axis=1).var(ddof=1)
    var_plus = (n - 1) / n * within + between / n
    return float(np.sqrt(var_plus / within))


def test_rhat_constant_chains_is_one():
    chains = [np.full(40, 3.5), np.full(40, 3.5)]
    assert split_rhat(chains) == 1.0


def test_rhat_disjoint_constant_chains_is_inf():
    assert split_rhat([np.zeros(4), np.full(4, 10.0)]) == np.inf


def test_rhat_well_mixed_near_one():
    rng = np.random.default_rng(0)
    chains = [rng.standard_normal(4000) for _ in range(4)]
    r = split_rhat(chains)
    assert 0.999 < r < 1.01


def test_rhat_stuck_chain_large():
    rng = np.random.default_rng(1)
    chains = [rng.standard_normal(500), rng.standard_normal(500) + 8.0]
    assert split_rhat(chains) > 3.0


def test_rhat_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(10):
        chains = [rng.standard_normal(100) + rng.normal() for _ in range(3)]
        assert abs(split_rhat(chains) - brute_force_rhat(chains)) < 1e-12


def test_rhat_odd_length_drops_last_draw():
    rng = np.random.default_rng(3)
    chain = rng.standard_normal(101)
    assert split_rhat([chain]) == split_rhat([chain[:100]])


def test_rhat_requires_four_draws():
    with pytest.raises(ValueError):
        split_rhat([np.array([1.0, 2.0, 3.0])])


def test_ess_iid_close_to_sample_size():
    rng = np.random.default_rng(4)
    m, n = 4, 5000
    chains = [rng.standard_normal(n) for _ in range(m)]
    ess = ess_bulk(chains)
    assert 0.8 * m * n < ess <= 2.0 * m * n


def test_ess_antithetic_hits_cap():
    n = 1000
    chain = np.tile([1.0, -1.0], n // 2)
    assert ess_bulk([chain]) == 2.0 * n


def test_ess_correlated_chain_is_small():
    rng = np.random.default_rng(5)
    n, rho = 4000, 0.95
    draws = np.empty(n)
    draws[0] = rng.standard_normal()
    for i in range(1, n):
        draws[i] = rho * draws[i - 1] + np.sqrt(1 - rho ** 2) * rng.standard_normal()
    ess = ess_bulk([draws])
    # AR(1) theory: ESS ~ n (1-rho)/(1+rho) ~ 103
    assert ess < 0.1 * n


def test_ess_constant_chain_warns_and_is_zero():
    with pytest.warns(RuntimeWarning, match="constant chain"):
        assert ess_bulk([np.full(50, 2.0)]) == 0.0


def test_ess_requires_four_draws():
    with pytest.raises(ValueError):
        ess_bulk([np.array([0.0, 1.0])])
