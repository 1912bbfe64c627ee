"""Latent-confounder instrumental-variable model for a binary outcome.

The generative structure: a scalar confounder u_i with N(0, u_variance)
prior feeds both the exposure and the outcome,

    x_i ~ N(alpha'z_i + delta_x u_i + gamma_x'c_i, sigma_x^2)
    y_i ~ Bernoulli(expit(omega + beta x_i + delta_y u_i + gamma_y'c_i))

Missing exposures are treated as latent coordinates on the standardized
scale. delta_x is constrained nonnegative, which pins the sign of u and
makes the confounder loading identifiable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dataset import Dataset


def expit(a):
    """Numerically stable inverse logit, clipped into the open unit interval."""
    out = 0.5 * (1.0 + np.tanh(0.5 * np.asarray(a, dtype=float)))
    out = np.clip(out, 5e-324, 1.0 - 2.0 ** -53)
    if np.ndim(a) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters of the prior layer.

    sigma_x carries an inverse-gamma(shape, scale) prior and is sampled on
    the log scale. delta_x and delta_y share delta_sd: delta_x is
    half-normal(delta_sd), delta_y is normal(0, delta_sd^2). beta_sd is the
    sampling prior scale for the causal effect; u_variance the confounder
    prior variance.
    """

    alpha_mean: float = 0.5
    alpha_sd: float = 0.2
    sigma_x_shape: float = 3.0
    sigma_x_scale: float = 2.0
    beta_sd: float = 10.0
    u_variance: float = 0.1
    delta_sd: float = 1.0
    intercept_sd: float = 10.0
    gamma_sd: float = 1.0

    def __post_init__(self):
        for name in ("alpha_sd", "sigma_x_shape", "sigma_x_scale", "beta_sd",
                     "u_variance", "delta_sd", "intercept_sd", "gamma_sd"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ParameterState:
    """One point in parameter space, on the natural scale."""

    beta: float
    alpha: np.ndarray
    sigma_x: float
    delta_x: float
    delta_y: float
    intercept: float
    u: np.ndarray
    gamma_x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gamma_y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    x_missing: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not self.sigma_x > 0:
            raise ValueError("sigma_x must be positive")
        if self.delta_x < 0:
            raise ValueError("delta_x must be nonnegative")
        for name in ("alpha", "u", "gamma_x", "gamma_y", "x_missing"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


def dim(data: Dataset) -> int:
    """Number of unconstrained coordinates for a dataset."""
    return 5 + data.n_instruments + 2 * data.n_covariates + data.n + data.n_missing


def coordinate_labels(data: Dataset) -> list:
    """Names of the unconstrained coordinates, in packing order."""
    labels = ["beta"]
    labels += [f"alpha[{j}]" for j in range(data.n_instruments)]
    labels += ["log_sigma_x", "delta_x", "delta_y", "intercept"]
    labels += [f"gamma_x[{p}]" for p in range(data.n_covariates)]
    labels += [f"gamma_y[{p}]" for p in range(data.n_covariates)]
    labels += [f"u[{i}]" for i in range(data.n)]
    labels += [f"x_missing[{k}]" for k in range(data.n_missing)]
    return labels


def pack(state: ParameterState, data: Dataset) -> np.ndarray:
    """Map a natural-scale state to the unconstrained position vector."""
    nj, nc = data.n_instruments, data.n_covariates
    if state.alpha.shape != (nj,):
        raise ValueError(f"alpha must have {nj} entries")
    if state.u.shape != (data.n,):
        raise ValueError(f"u must have {data.n} entries")
    if state.gamma_x.shape != (nc,) or state.gamma_y.shape != (nc,):
        raise ValueError(f"gamma_x and gamma_y must have {nc} entries")
    if state.x_missing.shape != (data.n_missing,):
        raise ValueError(f"x_missing must have {data.n_missing} entries")
    q = np.empty(dim(data))
    q[0] = state.beta
    q[1:1 + nj] = state.alpha
    q[1 + nj] = np.log(state.sigma_x)
    q[2 + nj] = state.delta_x
    q[3 + nj] = state.delta_y
    q[4 + nj] = state.intercept
    q[5 + nj:5 + nj + nc] = state.gamma_x
    q[5 + nj + nc:5 + nj + 2 * nc] = state.gamma_y
    base = 5 + nj + 2 * nc
    q[base:base + data.n] = state.u
    q[base + data.n:] = state.x_missing
    return q


def unpack(q: np.ndarray, data: Dataset) -> ParameterState:
    """Inverse of pack; folds t_dx back onto the nonnegative delta_x branch."""
    nj, nc, n = data.n_instruments, data.n_covariates, data.n
    base = 5 + nj + 2 * nc
    return ParameterState(
        beta=float(q[0]),
        alpha=q[1:1 + nj].copy(),
        sigma_x=float(np.exp(q[1 + nj])),
        delta_x=float(abs(q[2 + nj])),
        delta_y=float(q[3 + nj]),
        intercept=float(q[4 + nj]),
        gamma_x=q[5 + nj:5 + nj + nc].copy(),
        gamma_y=q[5 + nj + nc:5 + nj + 2 * nc].copy(),
        u=q[base:base + n].copy(),
        x_missing=q[base + n:].copy(),
    )


def kernel_args(data: Dataset, priors: PriorSpec) -> tuple:
    """Positional argument tuple for the log-posterior kernels."""
    obs_idx = data.observed_idx.astype(np.int64)
    miss_idx = data.missing_idx.astype(np.int64)
    return (
        data.z, data.c, data.y,
        np.ascontiguousarray(data.x[obs_idx]), obs_idx, miss_idx,
        float(priors.alpha_mean), float(priors.alpha_sd),
        float(priors.sigma_x_shape), float(priors.sigma_x_scale),
        float(priors.beta_sd), float(priors.u_variance),
        float(priors.delta_sd), float(priors.intercept_sd),
        float(priors.gamma_sd),
    )


def make_logpost_grad(data: Dataset, priors: PriorSpec = None):
    """Closure mapping a position vector to (log posterior, gradient)."""
    args = kernel_args(data, priors or PriorSpec())
    kern = _kernels.logpost_grad

    def logpost_grad(q):
        return kern(q, *args)

    return logpost_grad


def log_posterior(state: ParameterState, data: Dataset,
                  priors: PriorSpec = None) -> float:
    """Log joint density at a natural-scale state.

    Includes the likelihood, all priors, and the log-Jacobian of the
    log-sigma_x coordinate, so the value matches the density the sampler
    targets at pack(state).
    """
    priors = priors or PriorSpec()
    logp, _ = _kernels.logpost_grad(pack(state, data), *kernel_args(data, priors))
    return float(logp)


def grad_log_posterior(state: ParameterState, data: Dataset,
                       priors: PriorSpec = None) -> np.ndarray:
    """Analytic gradient with respect to every unconstrained coordinate."""
    priors = priors or PriorSpec()
    _, grad = _kernels.logpost_grad(pack(state, data), *kernel_args(data, priors))
    return grad
