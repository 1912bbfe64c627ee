"""Command line interface.

Subcommands:

* ``analyze``   posterior analysis of one dataset CSV
* ``simulate``  loss experiment, one random (T, a) pair per replicate
* ``calibrate`` loss surface over a fixed (T, a) grid
* ``freq``      frequentist estimate only (2sls or ivw)

Exit status 0 means the run completed with zero replicate failures; 2
means it completed but some replicates were skipped (see failures.json);
1 is a hard error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .dataset import DataError
from .freq import ivw_estimate, two_stage_least_squares
from .model import PriorSpec
from .report import DEFAULT_THRESHOLDS, analysis_payload, render_text
from .sampler import DivergenceError, sample
from .simulate import run_experiment


def _load_json(path) -> dict:
    if path is None:
        return {}
    with open(path) as handle:
        parsed = json.load(handle)
    if not isinstance(parsed, dict):
        raise ValueError(f"{path}: top-level JSON must be an object")
    return parsed


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_analyze(args) -> int:
    config = _load_json(args.config)
    covariates = [c for c in (args.covariates or "").split(",") if c]
    data = io.load_dataset(args.data, covariates=covariates)

    seed = int(config.get("seed", 0))
    sampler_cfg = io.sampler_config_from_dict(config.get("sampler", {}),
                                              default_seed=seed)
    prior_spec = PriorSpec(**config.get("priors", {}))
    thresholds = [float(t) for t in config.get("thresholds", DEFAULT_THRESHOLDS)]
    rope_kwargs = {k: float(v) for k, v in config.get("rope", {}).items()}

    draws = sample(data, sampler_cfg, prior_spec)
    provenance = {
        "seed": sampler_cfg.seed,
        "config_sha256": io.sha256_config(config),
        "data_sha256": io.sha256_file(args.data),
        "covariates": covariates,
    }
    payload = analysis_payload(data, draws, thresholds, rope_kwargs, provenance)
    out = _out_dir(args.out)
    io.dump_json(out / "report.json", payload)
    (out / "report.txt").write_text(render_text(payload))
    print(render_text(payload), end="")
    return 0


def _cmd_experiment(args, mode: str) -> int:
    config = _load_json(args.config)
    experiment = io.experiment_config_from_dict(config, mode=mode)
    result = run_experiment(experiment)
    out = _out_dir(args.out)
    io.write_loss_csv(out / "loss.csv", result.reports)
    if result.n_failures:
        io.dump_json(out / "failures.json", io.failures_payload(result))
        print(f"{result.n_failures} replicate(s) failed; see failures.json",
              file=sys.stderr)
        return 2
    print(f"wrote {out / 'loss.csv'} ({len(result.reports)} rows)")
    return 0


def _cmd_freq(args) -> int:
    data = io.load_dataset(args.data)
    if args.mode == "2sls":
        estimate = two_stage_least_squares(data)
    else:
        estimate = ivw_estimate(data)
    payload = {
        "method": estimate.method,
        "beta_hat": estimate.beta_hat,
        "se": estimate.se,
        "ci95": [estimate.ci_low, estimate.ci_high],
        "reject_null": estimate.reject_null,
        "n_dropped": estimate.n_dropped,
        "data_sha256": io.sha256_file(args.data),
    }
    out = _out_dir(args.out)
    io.dump_json(out / "freq.json", payload)
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrrope",
        description="Bayesian Mendelian randomization with interval nulls")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze one dataset CSV")
    analyze.add_argument("--data", required=True)
    analyze.add_argument("--config", default=None)
    analyze.add_argument("--covariates", default="",
                         help="comma-separated covariate column names")
    analyze.add_argument("--out", required=True)

    simulate = sub.add_parser("simulate",
                              help="loss experiment with random (T, a) draws")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--out", required=True)

    calibrate = sub.add_parser("calibrate",
                               help="loss surface over a (T, a) grid")
    calibrate.add_argument("--config", required=True)
    calibrate.add_argument("--out", required=True)

    freq = sub.add_parser("freq", help="frequentist estimate only")
    freq.add_argument("--data", required=True)
    freq.add_argument("--mode", choices=("2sls", "ivw"), required=True)
    freq.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "simulate":
            return _cmd_experiment(args, mode="random")
        if args.command == "calibrate":
            return _cmd_experiment(args, mode="grid")
        if args.command == "freq":
            return _cmd_freq(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (DataError, DivergenceError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
