"""Joint log-posterior and gradient kernels.

Two interchangeable implementations of the same arithmetic:

* ``logpost_grad_loops``: scalar loops, compiled with numba when available.
* ``logpost_grad_numpy``: vectorized numpy, always available.

``logpost_grad`` is the active backend. Set ``MRROPE_NO_NUMBA=1`` to force
the numpy path; ``BACKEND`` records which one is live.

The position vector ``q`` packs the unconstrained coordinates in this order:

    [beta, alpha_1..alpha_J, log(sigma_x), t_dx, delta_y, omega,
     gamma_x_1..gamma_x_P, gamma_y_1..gamma_y_P, u_1..u_n,
     x at missing rows]

with sigma_x = exp(log sigma_x) and delta_x = |t_dx|. The value returned is
the log joint density over these coordinates: model likelihood, priors, the
log-Jacobian of the log-sigma_x transform, and a N(0, delta_sd^2) density on
t_dx whose magnitude marginal is the half-normal prior on delta_x.
"""
from __future__ import annotations

import math
import os

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


def logpost_grad_loops(q, z, c, y, x_obs, obs_idx, miss_idx,
                       alpha_mean, alpha_sd, sigma_shape, sigma_scale,
                       beta_sd, u_var, delta_sd, intercept_sd, gamma_sd):
    n, nj = z.shape
    nc = c.shape[1]
    n_miss = miss_idx.shape[0]
    base = 5 + nj + 2 * nc

    beta = q[0]
    log_sigma = q[1 + nj]
    t_dx = q[2 + nj]
    delta_y = q[3 + nj]
    omega = q[4 + nj]
    sigma = math.exp(log_sigma)
    delta_x = abs(t_dx)
    sign_dx = 1.0 if t_dx >= 0.0 else -1.0
    inv_var = 1.0 / (sigma * sigma)

    x = np.empty(n)
    for k in range(obs_idx.shape[0]):
        x[obs_idx[k]] = x_obs[k]
    for k in range(n_miss):
        x[miss_idx[k]] = q[base + n + k]

    grad = np.zeros(q.shape[0])
    r_arr = np.empty(n)
    e_arr = np.empty(n)
    logp = 0.0
    sum_r_diff = 0.0  # sum (x-m)^2 / sigma^2, feeds the log-sigma gradient
    sum_r_u = 0.0     # sum r*u, feeds the delta_x gradient

    for i in range(n):
        ui = q[base + i]
        m = delta_x * ui
        for j in range(nj):
            m += q[1 + j] * z[i, j]
        for p in range(nc):
            m += q[5 + nj + p] * c[i, p]
        diff = x[i] - m
        r = diff * inv_var
        r_arr[i] = r

        logp += -0.5 * (LOG_2PI + math.log(u_var)) - 0.5 * ui * ui / u_var
        logp += -0.5 * LOG_2PI - log_sigma - 0.5 * r * diff

        eta = omega + beta * x[i] + delta_y * ui
        for p in range(nc):
            eta += q[5 + nj + nc + p] * c[i, p]
        if eta > 0.0:
            logp += y[i] * eta - (eta + math.log1p(math.exp(-eta)))
            mu = 1.0 / (1.0 + math.exp(-eta))
        else:
            logp += y[i] * eta - math.log1p(math.exp(eta))
            ex = math.exp(eta)
            mu = ex / (1.0 + ex)
        e = y[i] - mu
        e_arr[i] = e

        grad[0] += e * x[i]
        for j in range(nj):
            grad[1 + j] += r * z[i, j]
        grad[3 + nj] += e * ui
        grad[4 + nj] += e
        for p in range(nc):
            grad[5 + nj + p] += r * c[i, p]
            grad[5 + nj + nc + p] += e * c[i, p]
        grad[base + i] = -ui / u_var + r * delta_x + e * delta_y
        sum_r_diff += r * diff
        sum_r_u += r * ui

    for k in range(n_miss):
        i = miss_idx[k]
        grad[base + n + k] = -r_arr[i] + e_arr[i] * beta

    a_var = alpha_sd * alpha_sd
    for j in range(nj):
        aj = q[1 + j]
        logp += -0.5 * LOG_2PI - math.log(alpha_sd) - 0.5 * (aj - alpha_mean) ** 2 / a_var
        grad[1 + j] += -(aj - alpha_mean) / a_var

    # inverse-gamma prior on sigma_x plus the log-Jacobian of log sigma_x
    logp += (sigma_shape * math.log(sigma_scale) - math.lgamma(sigma_shape)
             - (sigma_shape + 1.0) * log_sigma - sigma_scale / sigma + log_sigma)
    grad[1 + nj] = (sum_r_diff - n) - sigma_shape + sigma_scale / sigma

    b_var = beta_sd * beta_sd
    logp += -0.5 * LOG_2PI - math.log(beta_sd) - 0.5 * beta * beta / b_var
    grad[0] += -beta / b_var

    d_var = delta_sd * delta_sd
    logp += -0.5 * LOG_2PI - math.log(delta_sd) - 0.5 * t_dx * t_dx / d_var
    grad[2 + nj] = sign_dx * sum_r_u - t_dx / d_var

    logp += -0.5 * LOG_2PI - math.log(delta_sd) - 0.5 * delta_y * delta_y / d_var
    grad[3 + nj] += -delta_y / d_var

    w_var = intercept_sd * intercept_sd
    logp += -0.5 * LOG_2PI - math.log(intercept_sd) - 0.5 * omega * omega / w_var
    grad[4 + nj] += -omega / w_var

    g_var = gamma_sd * gamma_sd
    for p in range(nc):
        gx = q[5 + nj + p]
        gy = q[5 + nj + nc + p]
        logp += -LOG_2PI - 2.0 * math.log(gamma_sd) - 0.5 * (gx * gx + gy * gy) / g_var
        grad[5 + nj + p] += -gx / g_var
        grad[5 + nj + nc + p] += -gy / g_var

    return logp, grad


def logpost_grad_numpy(q, z, c, y, x_obs, obs_idx, miss_idx,
                       alpha_mean, alpha_sd, sigma_shape, sigma_scale,
                       beta_sd, u_var, delta_sd, intercept_sd, gamma_sd):
    n, nj = z.shape
    nc = c.shape[1]
    base = 5 + nj + 2 * nc

    beta = q[0]
    alpha = q[1:1 + nj]
    log_sigma = q[1 + nj]
    t_dx = q[2 + nj]
    delta_y = q[3 + nj]
    omega = q[4 + nj]
    gamma_x = q[5 + nj:5 + nj + nc]
    gamma_y = q[5 + nj + nc:5 + nj + 2 * nc]
    u = q[base:base + n]
    delta_x = abs(t_dx)
    sign_dx = 1.0 if t_dx >= 0.0 else -1.0

    x = np.empty(n)
    x[obs_idx] = x_obs
    x[miss_idx] = q[base + n:]

    # exploding trajectories must come back as inf/nan for the energy
    # guard, matching the compiled kernel; np.exp over math.exp and the
    # errstate block keep scale overflow/underflow from raising instead
    with np.errstate(all="ignore"):
        sigma = np.exp(log_sigma)
        m = z @ alpha + delta_x * u + c @ gamma_x
        diff = x - m
        r = diff / (sigma * sigma)
        eta = omega + beta * x + delta_y * u + c @ gamma_y
        mu = 0.5 * (1.0 + np.tanh(0.5 * eta))
        e = y - mu

        a_var = alpha_sd * alpha_sd
        b_var = beta_sd * beta_sd
        d_var = delta_sd * delta_sd
        w_var = intercept_sd * intercept_sd
        g_var = gamma_sd * gamma_sd

        logp = (
            np.sum(-0.5 * (LOG_2PI + math.log(u_var)) - 0.5 * u * u / u_var)
            + np.sum(-0.5 * LOG_2PI - log_sigma - 0.5 * r * diff)
            + np.sum(y * eta - np.logaddexp(0.0, eta))
            + np.sum(-0.5 * LOG_2PI - math.log(alpha_sd)
                     - 0.5 * (alpha - alpha_mean) ** 2 / a_var)
            + (sigma_shape * math.log(sigma_scale) - math.lgamma(sigma_shape)
               - (sigma_shape + 1.0) * log_sigma - sigma_scale / sigma
               + log_sigma)
            + (-0.5 * LOG_2PI - math.log(beta_sd) - 0.5 * beta * beta / b_var)
            + (-0.5 * LOG_2PI - math.log(delta_sd) - 0.5 * t_dx * t_dx / d_var)
            + (-0.5 * LOG_2PI - math.log(delta_sd)
               - 0.5 * delta_y * delta_y / d_var)
            + (-0.5 * LOG_2PI - math.log(intercept_sd)
               - 0.5 * omega * omega / w_var)
            + np.sum(-0.5 * LOG_2PI - math.log(gamma_sd)
                     - 0.5 * gamma_x ** 2 / g_var)
            + np.sum(-0.5 * LOG_2PI - math.log(gamma_sd)
                     - 0.5 * gamma_y ** 2 / g_var)
        )

        grad = np.zeros_like(q)
        grad[0] = e @ x - beta / b_var
        grad[1:1 + nj] = z.T @ r - (alpha - alpha_mean) / a_var
        grad[1 + nj] = (r @ diff - n) - sigma_shape + sigma_scale / sigma
        grad[2 + nj] = sign_dx * (r @ u) - t_dx / d_var
        grad[3 + nj] = e @ u - delta_y / d_var
        grad[4 + nj] = np.sum(e) - omega / w_var
        grad[5 + nj:5 + nj + nc] = c.T @ r - gamma_x / g_var
        grad[5 + nj + nc:5 + nj + 2 * nc] = c.T @ e - gamma_y / g_var
        grad[base:base + n] = -u / u_var + r * delta_x + e * delta_y
        grad[base + n:] = -r[miss_idx] + e[miss_idx] * beta
    return float(logp), grad


def _numba_disabled() -> bool:
    return os.environ.get("MRROPE_NO_NUMBA", "").strip() not in ("", "0")


if not _numba_disabled():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = None
else:
    njit = None

if njit is not None:
    # numpy error model: scale underflow during an exploding trajectory
    # must yield inf, to be caught by the energy guard, not raise
    logpost_grad = njit(cache=True, fastmath=False,
                        error_model="numpy")(logpost_grad_loops)
    BACKEND = "numba"
else:
    logpost_grad = logpost_grad_numpy
    BACKEND = "numpy"
