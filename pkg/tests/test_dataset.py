import numpy as np
import pytest

from mrrope.dataset import DataError, Dataset, standardize

from conftest import make_dataset, standardized_columns


def test_standardize_three_values_exact():
    out = standardize(np.array([1.0, 2.0, 3.0]))
    assert np.array_equal(out, np.array([-1.0, 0.0, 1.0]))


def test_standardize_skips_missing_entries():
    out = standardize(np.array([1.0, np.nan, 2.0, 3.0]))
    assert np.isnan(out[1])
    obs = out[[0, 2, 3]]
    assert abs(obs.mean()) < 1e-15
    assert abs(obs.std(ddof=1) - 1.0) < 1e-12


def test_standardize_rejects_constant_column():
    with pytest.raises(DataError, match="constant"):
        standardize(np.array([2.0, 2.0, 2.0]), name="z_1")


def test_standardize_rejects_single_observation():
    with pytest.raises(DataError):
        standardize(np.array([np.nan, 5.0, np.nan]), name="x")


def test_dataset_validates_instrument_scaling():
    z = np.ones((4, 1))
    z[:2, 0] = -1.0  # mean 0 but sd != 1
    x = np.array([-1.0, 0.0, 1.0, 0.0])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    with pytest.raises(DataError):
        Dataset(z=z / 2.0, x=x, y=y)


def test_dataset_rejects_bad_outcome_value():
    data = make_dataset(seed=5, n=10)
    y = data.y.copy()
    y[3] = 2.0
    with pytest.raises(DataError, match="row 3 has y=2.0"):
        Dataset(z=data.z, x=data.x, y=y)


def test_dataset_rejects_infinite_exposure():
    data = make_dataset(seed=6, n=10)
    x = data.x.copy()
    x[0] = np.inf
    with pytest.raises(DataError):
        Dataset(z=data.z, x=x, y=data.y)


def test_missing_bookkeeping():
    data = make_dataset(seed=7, n=20, n_missing=6)
    assert data.n == 20
    assert data.n_missing == 6
    assert data.observed.sum() == 14
    assert np.array_equal(np.flatnonzero(~data.observed), data.missing_idx)
    assert np.array_equal(np.flatnonzero(data.observed), data.observed_idx)
    # missing entries stay NaN, observed entries are standardized
    assert np.isnan(data.x[data.missing_idx]).all()
    obs = data.x[data.observed_idx]
    assert abs(obs.mean()) < 1e-12


def test_dataset_arrays_are_read_only():
    data = make_dataset(seed=8, n=12)
    with pytest.raises(ValueError):
        data.z[0, 0] = 5.0
    with pytest.raises(ValueError):
        data.x[0] = 5.0


def test_standardized_constructor_matches_manual():
    rng = np.random.default_rng(11)
    z_raw = rng.integers(0, 3, size=(25, 4)).astype(float)
    x_raw = rng.normal(loc=3.0, scale=2.0, size=25)
    y = rng.integers(0, 2, size=25).astype(float)
    data = Dataset.standardized(z=z_raw, x=x_raw, y=y)
    assert np.allclose(data.z, standardized_columns(z_raw), atol=1e-12)
    assert np.allclose(data.x, standardize(x_raw), atol=1e-12)


def test_standardized_rejects_single_observed_exposure():
    z = standardized_columns(np.random.default_rng(12).normal(size=(5, 2)))
    x = np.array([np.nan, np.nan, 4.0, np.nan, np.nan])
    y = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
    with pytest.raises(DataError):
        Dataset.standardized(z=z, x=x, y=y)
