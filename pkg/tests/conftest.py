"""Shared helpers for building small standardized datasets."""
import numpy as np
import pytest

from mrrope.dataset import Dataset


def standardized_columns(raw: np.ndarray) -> np.ndarray:
    out = np.asarray(raw, dtype=float).copy()
    out -= out.mean(axis=0)
    out /= out.std(axis=0, ddof=1)
    return out


def make_dataset(seed: int, n: int = 30, n_instruments: int = 5,
                 n_covariates: int = 0, n_missing: int = 0) -> Dataset:
    """Random valid dataset with exact column standardization."""
    rng = np.random.default_rng(seed)
    z = standardized_columns(rng.normal(size=(n, n_instruments)))
    x = rng.normal(size=n)
    if n_missing:
        gaps = rng.choice(n, size=n_missing, replace=False)
        x[gaps] = np.nan
    obs = np.isfinite(x)
    x[obs] = (x[obs] - x[obs].mean()) / x[obs].std(ddof=1)
    y = rng.integers(0, 2, size=n).astype(float)
    if y.min() == y.max():
        y[0] = 1.0 - y[0]
    c = rng.normal(size=(n, n_covariates)) if n_covariates else None
    return Dataset(z=z, x=x, y=y, c=c)


@pytest.fixture
def small_data():
    return make_dataset(seed=101, n=30, n_instruments=5)


@pytest.fixture
def missing_data():
    return make_dataset(seed=202, n=30, n_instruments=5,
                        n_covariates=1, n_missing=8)
