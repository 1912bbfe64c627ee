"""File formats: dataset CSV, experiment config JSON, reports.

The dataset CSV has a header row with an optional ``id`` column,
instrument columns ``z_1..z_J``, an exposure column ``x`` whose empty
fields mark missing entries, a binary ``y`` column, and any covariate
columns requested by name. All output writers are deterministic: no
timestamps, sorted JSON keys, repr-shortest floats.
"""
from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import asdict
from typing import List, Optional, Sequence

import numpy as np

from .dataset import DataError, Dataset
from .loss import LossReport
from .model import PriorSpec
from .sampler import SamplerConfig
from .simulate import ExperimentConfig, ScenarioConfig, full_grid

LOSS_CSV_COLUMNS = ("scenario", "method", "T", "a", "expected_loss",
                    "n_replicates", "n_h0", "n_h1", "n_uncertain")

_Z_COLUMN = re.compile(r"^z_(\d+)$")


def _parse_number(text: str, row: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"row {row}, column {column}: not a number: {text!r}")


def load_dataset(path, covariates: Sequence[str] = ()) -> Dataset:
    """Read and standardize a dataset CSV.

    Instrument columns are found by the z_<k> pattern and must be numbered
    1..J without gaps. Row numbers in error messages count data rows from
    1 (the header is row 0).
    """
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        fields = list(reader.fieldnames)
        z_numbers = sorted(int(m.group(1)) for name in fields
                           if (m := _Z_COLUMN.match(name)))
        if not z_numbers:
            raise DataError("no instrument columns (expected z_1, z_2, ...)")
        if z_numbers != list(range(1, len(z_numbers) + 1)):
            raise DataError(f"instrument columns must be numbered 1..J "
                            f"without gaps; found {z_numbers}")
        for required in ("x", "y"):
            if required not in fields:
                raise DataError(f"missing required column {required!r}")
        for cov in covariates:
            if cov not in fields:
                raise DataError(f"covariate column {cov!r} not in the file")

        z_names = [f"z_{k}" for k in range(1, len(z_numbers) + 1)]
        z_rows, x_rows, y_rows, c_rows = [], [], [], []
        for row_number, record in enumerate(reader, start=1):
            if None in record or any(v is None for v in record.values()):
                raise DataError(f"row {row_number}: wrong number of fields")
            z_rows.append([_parse_number(record[name], row_number, name)
                           for name in z_names])
            x_text = record["x"].strip()
            x_rows.append(np.nan if x_text == ""
                          else _parse_number(x_text, row_number, "x"))
            y_val = _parse_number(record["y"], row_number, "y")
            if y_val not in (0.0, 1.0):
                raise DataError(f"row {row_number}, column y: must be 0 or 1, "
                                f"got {record['y']!r}")
            y_rows.append(y_val)
            c_rows.append([_parse_number(record[cov], row_number, cov)
                           for cov in covariates])

    if not z_rows:
        raise DataError(f"{path}: no data rows")
    c = np.asarray(c_rows, dtype=float) if covariates else None
    return Dataset.standardized(z=np.asarray(z_rows, dtype=float),
                                x=np.asarray(x_rows, dtype=float),
                                y=np.asarray(y_rows, dtype=float),
                                c=c, column_names=z_names)


def write_dataset(path, data: Dataset) -> None:
    """Write a dataset back to CSV; missing exposures become empty fields."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        z_names = [f"z_{j + 1}" for j in range(data.n_instruments)]
        c_names = [f"c_{p + 1}" for p in range(data.n_covariates)]
        writer.writerow(["id"] + z_names + ["x", "y"] + c_names)
        for i in range(data.n):
            x_field = "" if not np.isfinite(data.x[i]) else repr(float(data.x[i]))
            row = ([str(i + 1)] + [repr(float(v)) for v in data.z[i]]
                   + [x_field, str(int(data.y[i]))]
                   + [repr(float(v)) for v in data.c[i]])
            writer.writerow(row)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if np.isnan(value):
            return ""
        return repr(value)
    return str(value)


def write_loss_csv(path, reports: Sequence[LossReport]) -> None:
    """Loss reports as CSV with the fixed column set."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(LOSS_CSV_COLUMNS)
        for rep in reports:
            writer.writerow([
                rep.scenario, rep.method, _format_cell(rep.threshold),
                _format_cell(rep.uncertain_loss),
                _format_cell(rep.expected_loss), str(rep.n_replicates),
                str(rep.n_accept_h0), str(rep.n_accept_h1),
                str(rep.n_uncertain),
            ])


_INT_COLUMNS = ("n_replicates", "n_h0", "n_h1", "n_uncertain")
_FLOAT_COLUMNS = ("T", "a", "expected_loss")


def read_loss_csv(path) -> List[dict]:
    """Parse a loss table; blank cells come back as None."""
    rows = []
    with open(path, newline="") as handle:
        for record in csv.DictReader(handle):
            row = dict(record)
            for key in _FLOAT_COLUMNS:
                row[key] = float(row[key]) if row[key] != "" else None
            for key in _INT_COLUMNS:
                row[key] = int(row[key]) if row[key] != "" else None
            rows.append(row)
    return rows


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def sha256_config(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def dump_json(path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _pop_section(raw: dict, key: str) -> dict:
    section = raw.pop(key, {}) or {}
    if not isinstance(section, dict):
        raise ValueError(f"config section {key!r} must be an object")
    return section


def sampler_config_from_dict(section: dict, default_seed: int = 0) -> SamplerConfig:
    section = dict(section)
    section.setdefault("seed", default_seed)
    return SamplerConfig(**section)


def scenario_from_dict(section: dict) -> ScenarioConfig:
    return ScenarioConfig(**section)


def experiment_config_from_dict(raw: dict, mode: str) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed JSON.

    `scenarios` is either the string "full-grid" or a list of scenario
    objects with at least missing_rate, alpha_all and beta_true.
    """
    raw = dict(raw)
    seed = int(raw.pop("seed", 0))
    replicates = int(raw.pop("replicates", 1))
    scenarios_raw = raw.pop("scenarios", "full-grid")
    if scenarios_raw == "full-grid":
        scenarios = full_grid()
    else:
        scenarios = [scenario_from_dict(s) for s in scenarios_raw]
    sampler = sampler_config_from_dict(_pop_section(raw, "sampler"))
    priors = PriorSpec(**_pop_section(raw, "priors"))
    rope = _pop_section(raw, "rope")

    kwargs = {}
    for key in ("t_range", "a_range", "t_grid", "a_grid"):
        if key in raw:
            kwargs[key] = tuple(float(v) for v in raw.pop(key))
    for key in ("pi0", "beta_used_sd", "upper_odds", "lower_odds"):
        if key in rope:
            kwargs[key] = float(rope[key])
    if raw:
        raise ValueError(f"unknown experiment config keys: {sorted(raw)}")
    return ExperimentConfig(scenarios=scenarios, replicates=replicates,
                            seed=seed, mode=mode, sampler=sampler,
                            priors=priors, **kwargs)


def scenario_dict(scenario: ScenarioConfig) -> dict:
    return asdict(scenario)


def failures_payload(result) -> dict:
    return {
        "n_failures": result.n_failures,
        "failures": [asdict(f) for f in result.failures],
    }
