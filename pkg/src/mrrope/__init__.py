"""Bayesian Mendelian randomization with interval nulls and decision loss."""

__version__ = "0.1.0"

from .dataset import DataError, Dataset, standardize
from .diagnostics import ess_bulk, split_rhat
from .freq import (CollinearityError, FreqEstimate, NoUsableInstrumentsError,
                   SeparationError, ivw_estimate, ivw_fit_arrays,
                   ivw_from_summary, logistic_fit_single, tsls_fit,
                   two_stage_least_squares)
from .loss import LossReport, expected_loss, grid_reports, replicate_loss
from .model import (ParameterState, PriorSpec, coordinate_labels, expit,
                    grad_log_posterior, log_posterior, make_logpost_grad,
                    pack, unpack)
from .rope import (Decision, Outcome, RopeConfig, classify_odds, decide,
                   importance_weight, resample, rope_odds)
from .sampler import (DivergenceError, NonFiniteGradientError, PosteriorDraws,
                      SamplerConfig, backend, run_hmc, sample)
from .simulate import (ExperimentConfig, ExperimentResult, ScenarioConfig,
                       calibration_grid, full_grid, run_experiment,
                       simulate_population, split_missing)

__all__ = [
    "CollinearityError", "DataError", "Dataset", "Decision",
    "DivergenceError", "ExperimentConfig", "ExperimentResult",
    "FreqEstimate", "LossReport", "NonFiniteGradientError",
    "NoUsableInstrumentsError", "Outcome", "ParameterState",
    "PosteriorDraws", "PriorSpec", "RopeConfig", "SamplerConfig",
    "ScenarioConfig", "SeparationError", "backend", "calibration_grid",
    "classify_odds", "coordinate_labels", "decide", "ess_bulk",
    "expected_loss", "expit", "full_grid", "grad_log_posterior",
    "grid_reports", "importance_weight", "ivw_estimate", "ivw_fit_arrays",
    "ivw_from_summary", "log_posterior", "logistic_fit_single",
    "make_logpost_grad", "pack", "replicate_loss", "resample", "rope_odds",
    "run_experiment",
    "run_hmc", "sample", "simulate_population", "split_missing",
    "split_rhat", "standardize", "tsls_fit", "two_stage_least_squares",
    "unpack",
]
