"""Containers and validation for instrument/exposure/outcome data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STANDARDIZE_TOL = 1e-8


class DataError(ValueError):
    """Raised when an input dataset violates the model's assumptions."""


def standardize(values: np.ndarray, name: str = "column") -> np.ndarray:
    """Center to mean 0 and scale to sample standard deviation 1.

    NaN entries are ignored when computing the moments and preserved in the
    output. Raises DataError when the observed part is constant or has fewer
    than two entries.
    """
    values = np.asarray(values, dtype=float)
    observed = values[np.isfinite(values)]
    if observed.size < 2:
        raise DataError(f"{name}: need at least two observed values to standardize")
    sd = observed.std(ddof=1)
    if sd == 0.0:
        raise DataError(f"{name}: constant column cannot be standardized")
    return (values - observed.mean()) / sd


@dataclass(frozen=True)
class Dataset:
    """One analysis dataset.

    z : (n, J) standardized instrument matrix.
    x : (n,) exposure on the standardized scale; NaN marks a missing entry.
    y : (n,) binary outcome coded 0/1.
    c : (n, P) covariates, P >= 0, kept on their input scale.
    """

    z: np.ndarray
    x: np.ndarray
    y: np.ndarray
    c: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        z = np.ascontiguousarray(np.asarray(self.z, dtype=float))
        x = np.ascontiguousarray(np.asarray(self.x, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float))
        c = self.c
        if c is None:
            c = np.zeros((z.shape[0] if z.ndim == 2 else 0, 0))
        c = np.ascontiguousarray(np.asarray(c, dtype=float))

        if z.ndim != 2:
            raise DataError("z must be a 2-d array")
        n, j = z.shape
        if n < 1 or j < 1:
            raise DataError("need at least one individual and one instrument")
        if x.shape != (n,) or y.shape != (n,):
            raise DataError("x and y must have one entry per individual")
        if c.ndim != 2 or c.shape[0] != n:
            raise DataError("c must have one row per individual")
        if not np.all(np.isfinite(z)):
            raise DataError("z contains non-finite entries")
        if not np.all(np.isfinite(c)):
            raise DataError("covariates contain non-finite entries")
        if np.any(np.isinf(x)):
            raise DataError("x contains infinite entries; use NaN for missing")
        if not np.all(np.isin(y, (0.0, 1.0))):
            bad = int(np.flatnonzero(~np.isin(y, (0.0, 1.0)))[0])
            raise DataError(f"y must be coded 0/1; row {bad} has y={float(y[bad])!r}")

        means = z.mean(axis=0)
        if np.any(np.abs(means) > STANDARDIZE_TOL):
            bad = int(np.argmax(np.abs(means)))
            raise DataError(f"z column {bad} is not centered (mean {means[bad]:.3g})")
        if n >= 2:
            sds = z.std(axis=0, ddof=1)
            if np.any(np.abs(sds - 1.0) > STANDARDIZE_TOL):
                bad = int(np.argmax(np.abs(sds - 1.0)))
                raise DataError(f"z column {bad} is not scaled (sd {sds[bad]:.3g})")

        for arr in (z, x, y, c):
            arr.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "c", c)

    @classmethod
    def standardized(cls, z, x, y, c=None, column_names=None) -> "Dataset":
        """Build a Dataset from raw columns, standardizing z and observed x.

        Standardization uses observed entries only. `column_names` supplies
        instrument labels for error messages (defaults to z_1..z_J).
        """
        z = np.asarray(z, dtype=float)
        if z.ndim != 2:
            raise DataError("z must be a 2-d array")
        names = column_names or [f"z_{j + 1}" for j in range(z.shape[1])]
        z_std = np.empty_like(z)
        for j in range(z.shape[1]):
            z_std[:, j] = standardize(z[:, j], name=names[j])
        x = np.asarray(x, dtype=float)
        n_obs = int(np.isfinite(x).sum())
        if n_obs >= 2:
            x = standardize(x, name="x")
        elif n_obs == 1:
            raise DataError("x: a single observed value cannot be standardized")
        return cls(z=z_std, x=x, y=np.asarray(y, dtype=float), c=c)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def n_instruments(self) -> int:
        return self.z.shape[1]

    @property
    def n_covariates(self) -> int:
        return self.c.shape[1]

    @property
    def observed(self) -> np.ndarray:
        return np.isfinite(self.x)

    @property
    def observed_idx(self) -> np.ndarray:
        return np.flatnonzero(self.observed)

    @property
    def missing_idx(self) -> np.ndarray:
        return np.flatnonzero(~self.observed)

    @property
    def n_missing(self) -> int:
        return int((~self.observed).sum())
