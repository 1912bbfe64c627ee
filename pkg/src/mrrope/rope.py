"""Interval-null decisions from posterior draws of the causal effect.

The sampler runs under a continuous normal prior on beta. The hypothesis
test targets a mixture prior: weight pi0 on the sampling normal and 1 - pi0
on a uniform density over the interval null [-T, T]. Each draw is
importance-reweighted by the ratio of the two priors, the reweighted mass
inside and outside the interval gives posterior odds, and a ternary rule
turns the odds into a decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


class Outcome(Enum):
    ACCEPT_H0 = "accept_h0"
    ACCEPT_H1 = "accept_h1"
    UNCERTAIN = "uncertain"


@dataclass(frozen=True)
class RopeConfig:
    """Interval null [-threshold, threshold] and decision thresholds."""

    threshold: float
    pi0: float = 0.5
    beta_used_sd: float = 10.0
    upper_odds: float = 10.0
    lower_odds: float = 0.1

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not 0.0 < self.pi0 < 1.0:
            raise ValueError("pi0 must lie strictly between 0 and 1")
        if not self.beta_used_sd > 0:
            raise ValueError("beta_used_sd must be positive")
        if not 0.0 < self.lower_odds < self.upper_odds:
            raise ValueError("need 0 < lower_odds < upper_odds")


@dataclass(frozen=True)
class Decision:
    outcome: Outcome
    v0: float
    v1: float
    odds: float
    threshold: float


def importance_weight(beta, cfg: RopeConfig):
    """Prior ratio weight for a draw of beta.

    Outside the interval the mixture and sampling priors differ only by the
    point-mass factor, so the weight is exactly pi0. Inside, the uniform
    slab density replaces the normal one:

        w = pi0 + (1 - pi0) * Uniform(beta; -T, T) / Normal(beta; 0, sd^2)
    """
    beta_arr = np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(beta_arr)):
        raise ValueError("beta draws must be finite")
    t = cfg.threshold
    sd = cfg.beta_used_sd
    normal = np.exp(-0.5 * (beta_arr / sd) ** 2 - math.log(sd) - 0.5 * LOG_2PI)
    inside = np.abs(beta_arr) <= t
    w = np.where(inside, cfg.pi0 + (1.0 - cfg.pi0) / (2.0 * t) / normal, cfg.pi0)
    if beta_arr.ndim == 0:
        return float(w)
    return w


def rope_odds(beta_draws, cfg: RopeConfig):
    """Reweighted posterior mass (v0, v1) and odds v0/v1.

    The interval is closed: draws exactly on a boundary count as inside.
    Odds are computed as the weight-sum ratio, +inf when no draw falls
    outside and 0 when none falls inside.
    """
    draws = np.asarray(beta_draws, dtype=float).ravel()
    if draws.size == 0:
        raise ValueError("need at least one posterior draw")
    weights = importance_weight(draws, cfg)
    inside = np.abs(draws) <= cfg.threshold
    s_in = float(weights[inside].sum())
    s_out = float(weights[~inside].sum())
    total = s_in + s_out
    v0 = s_in / total
    v1 = s_out / total
    odds = math.inf if s_out == 0.0 else s_in / s_out
    return v0, v1, odds


def classify_odds(odds: float, cfg: RopeConfig) -> Outcome:
    """Ternary rule on the posterior odds; boundary values stay uncertain."""
    if odds > cfg.upper_odds:
        return Outcome.ACCEPT_H0
    if odds < cfg.lower_odds:
        return Outcome.ACCEPT_H1
    return Outcome.UNCERTAIN


def decide(beta_draws, cfg: RopeConfig) -> Decision:
    """Full decision for a set of posterior draws."""
    v0, v1, odds = rope_odds(beta_draws, cfg)
    return Decision(outcome=classify_odds(odds, cfg), v0=v0, v1=v1,
                    odds=odds, threshold=cfg.threshold)


def resample(draws, weights, size: int, seed) -> np.ndarray:
    """Multinomial resample of draws proportional to weights."""
    draws = np.asarray(draws, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if draws.size != weights.size:
        raise ValueError("draws and weights must have the same length")
    if draws.size == 0:
        raise ValueError("need at least one draw")
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
        raise ValueError("weights must be finite and positive")
    rng = np.random.default_rng(seed)
    idx = rng.choice(draws.size, size=int(size), replace=True,
                     p=weights / weights.sum())
    return draws[idx]
