"""Hamiltonian Monte Carlo over the model's unconstrained coordinates.

The engine runs plain HMC with a jittered trajectory length: each iteration
draws the number of leapfrog steps uniformly from [1, max_leapfrog_steps],
and a trajectory is cut short when the energy error explodes. Warm-up
adapts the step size by dual averaging toward a target acceptance rate and
estimates a diagonal mass matrix from a middle window of warm-up draws;
retained draws come from the final keep_last iterations at a frozen step
size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from . import _kernels
from .dataset import Dataset
from .diagnostics import ess_bulk, split_rhat
from .model import (ParameterState, PriorSpec, coordinate_labels, dim,
                    make_logpost_grad, unpack)

DIVERGENCE_ENERGY = 1000.0
MAX_DIVERGENCE_RATE = 0.1

# dual-averaging constants
DA_GAMMA = 0.05
DA_T0 = 10.0
DA_KAPPA = 0.75


class DivergenceError(RuntimeError):
    """Too many post-warm-up divergences; the run is not trustworthy."""


class NonFiniteGradientError(RuntimeError):
    """The gradient is not finite at the initial point."""

    def __init__(self, message: str, bad_indices=()):
        super().__init__(message)
        self.bad_indices = tuple(int(i) for i in bad_indices)


@dataclass(frozen=True)
class SamplerConfig:
    total_iterations: int = 20000
    keep_last: int = 5000
    chains: int = 1
    target_acceptance: float = 0.8
    max_leapfrog_steps: int = 512
    seed: int = 0
    init_step_size: Optional[float] = None

    def __post_init__(self):
        if self.keep_last < 1 or self.total_iterations < self.keep_last:
            raise ValueError("need total_iterations >= keep_last >= 1")
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError("target_acceptance must lie in (0, 1)")
        if self.max_leapfrog_steps < 1:
            raise ValueError("max_leapfrog_steps must be positive")
        if self.init_step_size is not None and not self.init_step_size > 0:
            raise ValueError("init_step_size must be positive")


@dataclass
class ChainResult:
    positions: np.ndarray
    accept_rate: float
    divergences: int
    step_size: float
    inv_mass: np.ndarray


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained draws and diagnostics from one sampler run."""

    positions: List[np.ndarray]
    beta: np.ndarray
    rhat: float
    ess: float
    accept_rate: float
    divergences: int
    step_sizes: List[float]
    config: SamplerConfig
    data: Optional[Dataset] = field(default=None, repr=False, compare=False)

    @property
    def chain_betas(self) -> List[np.ndarray]:
        return [pos[:, 0] for pos in self.positions]

    def states(self, chain: int = 0) -> List[ParameterState]:
        if self.data is None:
            raise ValueError("draws were not produced from a dataset")
        return [unpack(q, self.data) for q in self.positions[chain]]


class _DualAveraging:
    def __init__(self, eps0: float, target: float):
        self.mu = math.log(10.0 * eps0)
        self.target = target
        self.log_eps = math.log(eps0)
        self.log_eps_bar = 0.0
        self.h_bar = 0.0
        self.count = 0

    def update(self, accept_prob: float) -> float:
        self.count += 1
        m = self.count
        frac = 1.0 / (m + DA_T0)
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.target - accept_prob)
        self.log_eps = self.mu - math.sqrt(m) / DA_GAMMA * self.h_bar
        eta = m ** -DA_KAPPA
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar
        return math.exp(self.log_eps)

    @property
    def adapted(self) -> float:
        return math.exp(self.log_eps_bar) if self.count else math.exp(self.log_eps)


def _hamiltonian(logp: float, p: np.ndarray, inv_mass: np.ndarray) -> float:
    return -logp + 0.5 * float(np.sum(p * p * inv_mass))


def _trajectory(logp_grad, q, p, logp, grad, eps, n_steps, inv_mass):
    """Leapfrog integration with an energy-divergence guard."""
    h0 = _hamiltonian(logp, p, inv_mass)
    for _ in range(n_steps):
        p = p + 0.5 * eps * grad
        q = q + eps * inv_mass * p
        logp, grad = logp_grad(q)
        if not math.isfinite(logp) or not np.all(np.isfinite(grad)):
            return q, logp, grad, h0, math.inf, True
        p = p + 0.5 * eps * grad
        h = _hamiltonian(logp, p, inv_mass)
        if h - h0 > DIVERGENCE_ENERGY:
            return q, logp, grad, h0, h, True
    return q, logp, grad, h0, h, False


def _find_initial_step(logp_grad, q, logp, grad, inv_mass, rng) -> float:
    """Double or halve the step size until one leapfrog step has acceptance
    probability near one half."""
    eps = 1.0
    p = rng.standard_normal(q.size) / np.sqrt(inv_mass)
    _, _, _, h0, h1, diverged = _trajectory(
        logp_grad, q.copy(), p, logp, grad, eps, 1, inv_mass)
    log_ratio = h0 - h1 if not diverged else -math.inf
    direction = 1.0 if log_ratio > math.log(0.5) else -1.0
    for _ in range(60):
        eps *= 2.0 ** direction
        _, _, _, h0, h1, diverged = _trajectory(
            logp_grad, q.copy(), p, logp, grad, eps, 1, inv_mass)
        log_ratio = h0 - h1 if not diverged else -math.inf
        if direction > 0 and log_ratio <= math.log(0.5):
            break
        if direction < 0 and log_ratio >= math.log(0.5):
            break
        if eps < 1e-12 or eps > 1e6:
            break
    return eps


def _run_chain(logp_grad, dim_: int, cfg: SamplerConfig, rng) -> ChainResult:
    q = rng.uniform(-0.5, 0.5, dim_)
    logp, grad = logp_grad(q)
    if not math.isfinite(logp) or not np.all(np.isfinite(grad)):
        bad = np.flatnonzero(~np.isfinite(grad))
        raise NonFiniteGradientError(
            "gradient not finite at the initial point", bad_indices=bad)

    inv_mass = np.ones(dim_)
    warmup = cfg.total_iterations - cfg.keep_last
    eps = (cfg.init_step_size if cfg.init_step_size is not None
           else _find_initial_step(logp_grad, q, logp, grad, inv_mass, rng))
    averager = _DualAveraging(eps, cfg.target_acceptance)

    # mass-estimation window inside warm-up
    if warmup >= 150:
        window_start = max(10, int(0.15 * warmup))
        window_end = int(0.75 * warmup)
    else:
        window_start = window_end = warmup + 1  # no mass adaptation
    window: List[np.ndarray] = []

    positions = np.empty((cfg.keep_last, dim_))
    accept_sum = 0.0
    kept = 0
    divergences = 0

    for it in range(cfg.total_iterations):
        in_warmup = it < warmup
        p = rng.standard_normal(dim_) * np.sqrt(1.0 / inv_mass)
        n_steps = int(rng.integers(1, cfg.max_leapfrog_steps + 1))
        q_new, logp_new, grad_new, h0, h1, diverged = _trajectory(
            logp_grad, q.copy(), p, logp, grad, eps, n_steps, inv_mass)
        accept_prob = 0.0 if diverged else math.exp(min(0.0, h0 - h1))
        if rng.uniform() < accept_prob:
            q, logp, grad = q_new, logp_new, grad_new

        if in_warmup:
            eps = averager.update(accept_prob)
            if window_start <= it < window_end:
                window.append(q.copy())
            if it == window_end - 1 and len(window) >= 10:
                draws = np.asarray(window)
                var = draws.var(axis=0, ddof=1)
                nw = len(window)
                var = nw / (nw + 5.0) * var + 5.0 / (nw + 5.0) * 1e-3
                inv_mass = np.maximum(var, 1e-12)
                window.clear()
                eps = averager.adapted
                averager = _DualAveraging(eps, cfg.target_acceptance)
            if it == warmup - 1:
                eps = averager.adapted
        else:
            accept_sum += accept_prob
            divergences += int(diverged)
            positions[kept] = q
            kept += 1

    return ChainResult(positions=positions,
                       accept_rate=accept_sum / cfg.keep_last,
                       divergences=divergences, step_size=eps,
                       inv_mass=inv_mass)


def run_hmc(logp_grad: Callable, dim_: int, cfg: SamplerConfig) -> List[ChainResult]:
    """Run the configured chains over an arbitrary log-density closure."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
    results = []
    for chain_seed in seeds:
        rng = np.random.Generator(np.random.PCG64(chain_seed))
        results.append(_run_chain(logp_grad, dim_, cfg, rng))
    total = cfg.chains * cfg.keep_last
    divergences = sum(res.divergences for res in results)
    if divergences > MAX_DIVERGENCE_RATE * total:
        raise DivergenceError(
            f"{divergences}/{total} retained transitions diverged; "
            "lower the step size (raise target_acceptance) or extend warm-up")
    return results


def sample(data: Dataset, cfg: SamplerConfig = None,
           priors: PriorSpec = None) -> PosteriorDraws:
    """Draw from the model posterior for a dataset.

    Identical data, priors and config (including seed) give bit-identical
    draws on a fixed backend. Raises DivergenceError when more than 10% of
    retained transitions diverge.
    """
    cfg = cfg or SamplerConfig()
    priors = priors or PriorSpec()
    logp_grad = make_logpost_grad(data, priors)
    try:
        chains = run_hmc(logp_grad, dim(data), cfg)
    except NonFiniteGradientError as err:
        labels = coordinate_labels(data)
        names = ", ".join(labels[i] for i in err.bad_indices[:5])
        raise NonFiniteGradientError(
            f"gradient not finite at the initial point (coordinates: {names})",
            bad_indices=err.bad_indices) from err

    positions = [res.positions for res in chains]
    chain_betas = [pos[:, 0] for pos in positions]
    return PosteriorDraws(
        positions=positions,
        beta=np.concatenate(chain_betas),
        rhat=split_rhat(chain_betas),
        ess=ess_bulk(chain_betas),
        accept_rate=float(np.mean([res.accept_rate for res in chains])),
        divergences=sum(res.divergences for res in chains),
        step_sizes=[res.step_size for res in chains],
        config=cfg,
        data=data,
    )


def backend() -> str:
    """Active kernel backend, 'numba' or 'numpy'."""
    return _kernels.BACKEND


def with_seed(cfg: SamplerConfig, seed: int) -> SamplerConfig:
    return replace(cfg, seed=int(seed))
