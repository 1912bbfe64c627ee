"""Frequentist Mendelian randomization baselines.

Two estimators: two-stage least squares on fully observed data (outcome
treated as 0/1 numeric) and fixed-effect inverse-variance weighting of
per-instrument Wald ratios for the split-sample design where the exposure
block and the outcome block come from disjoint individuals.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .model import expit

Z95 = 1.959964
SEPARATION_SLOPE = 30.0


class CollinearityError(np.linalg.LinAlgError):
    """A regression design matrix is rank deficient."""


class SeparationError(RuntimeError):
    """A single-instrument logistic fit diverged (separated data)."""


class NoUsableInstrumentsError(RuntimeError):
    """Every instrument was dropped before the IVW combination."""


@dataclass(frozen=True)
class FreqEstimate:
    beta_hat: float
    se: float
    ci_low: float
    ci_high: float
    reject_null: bool
    method: str
    n_dropped: int = 0


def _check_full_rank(design: np.ndarray, names) -> None:
    _, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    tol = design.shape[0] * np.finfo(float).eps * max(diag.max(), 1.0)
    bad = np.flatnonzero(diag <= tol)
    if bad.size:
        listed = ", ".join(names[int(b)] for b in bad)
        raise CollinearityError(f"collinear design columns: {listed}")


def _ols(design: np.ndarray, response: np.ndarray, names) -> np.ndarray:
    _check_full_rank(design, names)
    coef, *_ = np.linalg.lstsq(design, response, rcond=None)
    return coef


def tsls_fit(z: np.ndarray, x: np.ndarray, y: np.ndarray) -> FreqEstimate:
    """Two-stage least squares on raw arrays; y may be any numeric response.

    Stage one regresses x on [1, z]; stage two regresses y on the fitted
    exposure. The variance estimate uses second-stage residuals computed
    with the observed exposure, the standard 2SLS convention.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = x.size
    if z.shape[0] != n or y.size != n:
        raise ValueError("z, x and y must agree on the number of rows")
    if n < z.shape[1] + 3:
        raise ValueError("too few rows for the instrument count")

    ones = np.ones((n, 1))
    stage1 = np.hstack([ones, z])
    names1 = ["intercept"] + [f"z_{j + 1}" for j in range(z.shape[1])]
    x_hat = stage1 @ _ols(stage1, x, names1)

    stage2 = np.hstack([ones, x_hat[:, None]])
    coef = _ols(stage2, y, ["intercept", "x_hat"])
    beta_hat = float(coef[1])

    resid = y - (coef[0] + coef[1] * x)
    sigma2 = float(resid @ resid) / (n - 2)
    cov = sigma2 * np.linalg.inv(stage2.T @ stage2)
    se = float(np.sqrt(cov[1, 1]))

    ci_low, ci_high = beta_hat - Z95 * se, beta_hat + Z95 * se
    return FreqEstimate(beta_hat=beta_hat, se=se, ci_low=ci_low,
                        ci_high=ci_high, reject_null=not ci_low <= 0.0 <= ci_high,
                        method="2sls")


def two_stage_least_squares(data: Dataset) -> FreqEstimate:
    """2SLS on a fully observed dataset."""
    if data.n_missing:
        raise ValueError("2SLS requires a fully observed exposure")
    return tsls_fit(data.z, data.x, data.y)


def logistic_fit_single(z: np.ndarray, y: np.ndarray,
                        tol: float = 1e-10, max_iter: int = 100) -> tuple:
    """Slope and standard error of the logistic regression y ~ 1 + z.

    Newton iterations run until the score norm drops below tol. A slope
    escaping past +-30 on the way is treated as separation.
    """
    z = np.asarray(z, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if z.size != y.size:
        raise ValueError("z and y must have the same length")
    if np.all(y == y[0]):
        raise ValueError("outcome has a single class; slope is not identified")
    if np.all(z == z[0]):
        raise ValueError("constant instrument column")
    # complete or quasi-complete separation: the class supports touch at
    # most in a point, so the MLE does not exist
    z0, z1 = z[y == 0.0], z[y == 1.0]
    if z0.max() <= z1.min() or z1.max() <= z0.min():
        raise SeparationError("instrument separates the outcome classes")

    design = np.column_stack([np.ones_like(z), z])
    coef = np.zeros(2)
    for _ in range(max_iter):
        mu = expit(design @ coef)
        score = design.T @ (y - mu)
        if np.linalg.norm(score) < tol:
            break
        w = mu * (1.0 - mu)
        hess = design.T @ (design * w[:, None])
        try:
            coef = coef + np.linalg.solve(hess, score)
        except np.linalg.LinAlgError as err:
            raise SeparationError(f"singular information matrix: {err}") from err
        if abs(coef[1]) > SEPARATION_SLOPE:
            raise SeparationError(
                f"slope escaped past {SEPARATION_SLOPE}; data look separated")
    else:
        raise SeparationError("logistic fit did not converge")

    mu = expit(design @ coef)
    w = mu * (1.0 - mu)
    hess = design.T @ (design * w[:, None])
    cov = np.linalg.inv(hess)
    return float(coef[1]), float(np.sqrt(cov[1, 1]))


def ivw_from_summary(gamma_hats, big_gamma_hats, ses,
                     n_dropped: int = 0) -> FreqEstimate:
    """Fixed-effect IVW combination of per-instrument summary statistics."""
    g = np.asarray(gamma_hats, dtype=float).ravel()
    big_g = np.asarray(big_gamma_hats, dtype=float).ravel()
    se = np.asarray(ses, dtype=float).ravel()
    if not g.size == big_g.size == se.size:
        raise ValueError("summary vectors must share a length")
    if g.size == 0:
        raise NoUsableInstrumentsError("no instruments to combine")
    if np.any(se <= 0.0) or not np.all(np.isfinite(se)):
        raise ValueError("standard errors must be positive and finite")

    w = g * g / (se * se)
    beta_hat = float(np.sum(g * big_g / (se * se)) / np.sum(w))
    se_hat = float(np.sum(w) ** -0.5)
    ci_low, ci_high = beta_hat - Z95 * se_hat, beta_hat + Z95 * se_hat
    return FreqEstimate(beta_hat=beta_hat, se=se_hat, ci_low=ci_low,
                        ci_high=ci_high, reject_null=not ci_low <= 0.0 <= ci_high,
                        method="ivw", n_dropped=n_dropped)


def ivw_fit_arrays(z_a: np.ndarray, x_a: np.ndarray,
                   z_b: np.ndarray, y_b: np.ndarray) -> FreqEstimate:
    """IVW from an exposure block (z_a, x_a) and an outcome block (z_b, y_b).

    Per instrument, the exposure association is the OLS slope of x on that
    column over block A and the outcome association comes from a single
    logistic fit over block B. Instruments whose logistic fit separates are
    dropped with a warning.
    """
    z_a = np.asarray(z_a, dtype=float)
    z_b = np.asarray(z_b, dtype=float)
    if z_a.ndim == 1:
        z_a = z_a[:, None]
    if z_b.ndim == 1:
        z_b = z_b[:, None]
    x_a = np.asarray(x_a, dtype=float).ravel()
    y_b = np.asarray(y_b, dtype=float).ravel()
    if z_a.shape[1] != z_b.shape[1]:
        raise ValueError("blocks must share the instrument columns")

    gammas, big_gammas, ses = [], [], []
    n_dropped = 0
    for j in range(z_a.shape[1]):
        col_a = z_a[:, j]
        design = np.column_stack([np.ones_like(col_a), col_a])
        slope = float(_ols(design, x_a, ["intercept", f"z_{j + 1}"])[1])
        try:
            big_gamma, se = logistic_fit_single(z_b[:, j], y_b)
        except SeparationError as err:
            warnings.warn(f"dropping instrument z_{j + 1}: {err}", RuntimeWarning)
            n_dropped += 1
            continue
        gammas.append(slope)
        big_gammas.append(big_gamma)
        ses.append(se)

    if not gammas:
        raise NoUsableInstrumentsError(
            "every instrument separated in the outcome block")
    return ivw_from_summary(gammas, big_gammas, ses, n_dropped=n_dropped)


def ivw_estimate(data: Dataset) -> FreqEstimate:
    """IVW on a split-sample dataset: observed-x rows form the exposure
    block (outcome discarded), missing-x rows the outcome block."""
    obs = data.observed_idx
    mis = data.missing_idx
    if obs.size == 0 or mis.size == 0:
        raise ValueError("ivw needs both an observed-x block and a missing-x block")
    return ivw_fit_arrays(data.z[obs], data.x[obs], data.z[mis], data.y[mis])
