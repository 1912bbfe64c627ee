"""Convergence diagnostics for scalar chains of posterior draws."""
from __future__ import annotations

import warnings

import numpy as np


def _as_chain_list(chains) -> list:
    out = [np.asarray(chain, dtype=float).ravel() for chain in chains]
    if not out:
        raise ValueError("need at least one chain")
    return out


def split_rhat(chains) -> float:
    """Potential scale reduction factor on split chains.

    Each chain is split in half; with h draws per half, W the mean
    within-half variance and B the between-half variance (h * variance of
    the half means), the statistic is sqrt((h-1)/h + B/(h*W)). Constant
    input returns 1.0; mixed constant halves with disagreeing means return
    inf.
    """
    halves = []
    for chain in _as_chain_list(chains):
        n = chain.size
        if n < 4:
            raise ValueError("split_rhat needs at least 4 draws per chain")
        if n % 2:
            chain = chain[:-1]
        h = chain.size // 2
        halves.append(chain[:h])
        halves.append(chain[h:])
    h = min(half.size for half in halves)
    halves = np.stack([half[:h] for half in halves])
    w = halves.var(axis=1, ddof=1).mean()
    b_over_h = halves.mean(axis=1).var(ddof=1)  # B / h
    if w == 0.0:
        return 1.0 if b_over_h == 0.0 else float("inf")
    var_hat = (h - 1.0) / h * w + b_over_h
    return float(np.sqrt(var_hat / w))


def _chain_autocovariance(chain: np.ndarray) -> np.ndarray:
    """Biased autocovariance (normalized by n) via FFT."""
    n = chain.size
    centered = chain - chain.mean()
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(centered, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n].real
    return acov / n


def ess_bulk(chains) -> float:
    """Effective sample size from the autocorrelation sum.

    Chain autocorrelations are combined across chains, summed in Geyer
    pairs with the initial monotone truncation, and inverted. The result is
    capped at twice the total draw count (antithetic chains can be
    super-efficient); a constant input warns and returns 0.
    """
    chain_list = _as_chain_list(chains)
    n = min(chain.size for chain in chain_list)
    if n < 4:
        raise ValueError("ess_bulk needs at least 4 draws per chain")
    draws = np.stack([chain[:n] for chain in chain_list])
    m = draws.shape[0]

    w = draws.var(axis=1, ddof=1).mean()
    if m >= 2:
        var_hat = (n - 1.0) / n * w + draws.mean(axis=1).var(ddof=1)
    else:
        var_hat = w
    if var_hat == 0.0:
        warnings.warn("constant chain: effective sample size is 0", RuntimeWarning)
        return 0.0

    acov = np.stack([_chain_autocovariance(chain) for chain in draws]).mean(axis=0)
    rho = 1.0 - (w - acov) / var_hat

    # Geyer pairs (rho_0 + rho_1), (rho_2 + rho_3), ...: keep while the pair
    # sum stays positive, then enforce monotone nonincreasing sums.
    pair_total = 0.0
    prev_pair = np.inf
    for k in range(n // 2):
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev_pair)
        pair_total += pair
        prev_pair = pair
    tau = max(-1.0 + 2.0 * pair_total, 0.5)  # tau >= 1/2 caps ess at 2x draws
    ess = m * n / tau
    return float(min(ess, 2.0 * m * n))
