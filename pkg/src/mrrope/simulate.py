"""Synthetic data generation and the decision-loss simulation harness.

A population is generated from the model's own structure: standardized
genotypes drive a continuous exposure confounded with a binary outcome
through a shared latent variable. Analysis datasets subsample the
population and mask the exposure for the outcome-only block, mimicking a
split-sample design where exposure and outcome come from different
individuals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .dataset import DataError, Dataset, standardize
from .freq import (FreqEstimate, NoUsableInstrumentsError, ivw_estimate,
                   two_stage_least_squares)
from .loss import (LossReport, expected_loss, grid_reports, replicate_loss,
                   tally_outcomes)
from .model import PriorSpec, expit
from .rope import Outcome, RopeConfig, decide
from .sampler import DivergenceError, SamplerConfig, sample, with_seed

MISSING_RATES = (0.8, 0.4, 0.0)
ALPHA_LEVELS = (0.3, 0.1, 0.05)
BETA_LEVELS = (0.3, 0.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation cell.

    beta_true acts on the exposure as generated; the exposure column is
    re-standardized afterwards so the fitted model sees a unit-scale
    variable. Only the truth class (beta_true == 0 or not) feeds the loss.
    """

    missing_rate: float
    alpha_all: float
    beta_true: float
    n_instruments: int = 15
    population_size: int = 1000
    n_total: int = 400
    delta_x: float = 1.0
    delta_y: float = 1.0
    sigma_x: float = 1.0
    intercept: float = 0.0
    u_variance: float = 0.1
    maf_low: float = 0.1
    maf_high: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError("missing_rate must lie in [0, 1)")
        if self.n_instruments < 1:
            raise ValueError("need at least one instrument")
        if self.n_total < 2 or self.population_size < 2:
            raise ValueError("need at least two individuals")
        if self.n_total > self.population_size:
            raise ValueError("n_total cannot exceed population_size")
        if self.sigma_x <= 0 or self.u_variance <= 0:
            raise ValueError("scale parameters must be positive")
        if not 0.0 < self.maf_low <= self.maf_high < 1.0:
            raise ValueError("need 0 < maf_low <= maf_high < 1")

    @property
    def truth_is_null(self) -> bool:
        return self.beta_true == 0.0

    @property
    def label(self) -> str:
        return (f"miss{self.missing_rate:g}_alpha{self.alpha_all:g}"
                f"_beta{self.beta_true:g}")


def full_grid(**overrides) -> List[ScenarioConfig]:
    """The 3 x 3 x 2 scenario grid over missingness, instrument strength
    and effect existence."""
    cells = []
    for rate in MISSING_RATES:
        for alpha in ALPHA_LEVELS:
            for beta in BETA_LEVELS:
                cells.append(ScenarioConfig(missing_rate=rate, alpha_all=alpha,
                                            beta_true=beta, **overrides))
    return cells


def generate_population_arrays(cfg: ScenarioConfig, rng) -> tuple:
    """Raw population draws: (z standardized, x pre-standardization, y, u)."""
    n, nj = cfg.population_size, cfg.n_instruments
    maf = rng.uniform(cfg.maf_low, cfg.maf_high, nj)
    z = np.empty((n, nj))
    for j in range(nj):
        column = rng.binomial(2, maf[j], n).astype(float)
        for _ in range(100):
            if column.std() > 0:
                break
            column = rng.binomial(2, maf[j], n).astype(float)
        else:
            raise DataError(f"z_{j + 1}: degenerate genotype column")
        z[:, j] = standardize(column, name=f"z_{j + 1}")

    u = rng.normal(0.0, math.sqrt(cfg.u_variance), n)
    alpha = np.full(nj, cfg.alpha_all)
    x_raw = z @ alpha + cfg.delta_x * u + rng.normal(0.0, cfg.sigma_x, n)
    prob = expit(cfg.intercept + cfg.beta_true * x_raw + cfg.delta_y * u)
    y = rng.binomial(1, prob).astype(float)
    return z, x_raw, y, u


def simulate_population(cfg: ScenarioConfig, seed) -> Dataset:
    """Fully observed population dataset with standardized exposure."""
    rng = np.random.default_rng(seed)
    z, x_raw, y, _ = generate_population_arrays(cfg, rng)
    return Dataset(z=z, x=standardize(x_raw, name="x"), y=y)


def split_missing(population: Dataset, n_total: int, missing_rate: float,
                  seed) -> Dataset:
    """Subsample an analysis dataset and mask the outcome block's exposure.

    The first round((1 - missing_rate) * n_total) rows keep their exposure
    (block A); the rest have it masked (block B). Columns are
    re-standardized over the subsample, the exposure over block A only.
    """
    if not 0.0 <= missing_rate < 1.0:
        raise ValueError("missing_rate must lie in [0, 1)")
    if n_total > population.n:
        raise ValueError("n_total cannot exceed the population size")
    n_a = int(round((1.0 - missing_rate) * n_total))
    rng = np.random.default_rng(seed)
    rows = rng.choice(population.n, size=n_total, replace=False)
    x = population.x[rows].copy()
    x[n_a:] = np.nan
    return Dataset.standardized(z=population.z[rows], x=x,
                                y=population.y[rows])


@dataclass(frozen=True)
class ExperimentConfig:
    """A full simulation experiment.

    mode 'random' draws one (T, a) pair per replicate from t_range and
    a_range; mode 'grid' evaluates every (T, a) cell of t_grid x a_grid
    from the same posterior draws.
    """

    scenarios: Sequence[ScenarioConfig]
    replicates: int
    seed: int = 0
    mode: str = "random"
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    priors: PriorSpec = field(default_factory=PriorSpec)
    t_range: tuple = (0.01, 0.1)
    a_range: tuple = (0.0, 0.6)
    t_grid: Sequence[float] = (0.02, 0.04, 0.06, 0.08, 0.1)
    a_grid: Sequence[float] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    pi0: float = 0.5
    beta_used_sd: float = 10.0
    upper_odds: float = 10.0
    lower_odds: float = 0.1

    def __post_init__(self):
        if self.mode not in ("random", "grid"):
            raise ValueError("mode must be 'random' or 'grid'")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not self.scenarios:
            raise ValueError("need at least one scenario")

    def rope_kwargs(self) -> dict:
        return dict(pi0=self.pi0, beta_used_sd=self.beta_used_sd,
                    upper_odds=self.upper_odds, lower_odds=self.lower_odds)


@dataclass(frozen=True)
class ReplicateFailure:
    scenario: str
    replicate: int
    stage: str
    message: str


@dataclass(frozen=True)
class ExperimentResult:
    reports: List[LossReport]
    failures: List[ReplicateFailure]

    @property
    def n_failures(self) -> int:
        return len(self.failures)


def _replicate_seeds(master_seed: int, cell_index: int, replicate: int):
    """Independent deterministic streams for one replicate."""
    root = np.random.SeedSequence(entropy=int(master_seed),
                                  spawn_key=(int(cell_index), int(replicate)))
    gen_ss, sampler_ss, pick_ss = root.spawn(3)
    sampler_seed = int(sampler_ss.generate_state(1, dtype=np.uint64)[0] >> 1)
    return gen_ss, sampler_seed, pick_ss


def _frequentist_outcome(data: Dataset, missing_rate: float) -> Outcome:
    if missing_rate == 0.0:
        est: FreqEstimate = two_stage_least_squares(data)
    else:
        est = ivw_estimate(data)
    return Outcome.ACCEPT_H1 if est.reject_null else Outcome.ACCEPT_H0


def _run_cell(cfg: ExperimentConfig, scenario: ScenarioConfig,
              cell_index: int) -> tuple:
    """All replicates of one scenario. Returns (reports, failures)."""
    draws_sets: List[np.ndarray] = []
    freq_outcomes: List[Outcome] = []
    random_rows: List[tuple] = []  # (T, a, bayes outcome, freq outcome)
    failures: List[ReplicateFailure] = []

    for rep in range(cfg.replicates):
        gen_ss, sampler_seed, pick_ss = _replicate_seeds(cfg.seed, cell_index, rep)
        gen_rng = np.random.default_rng(gen_ss)
        try:
            population = simulate_population(scenario, gen_rng)
            data = split_missing(population, scenario.n_total,
                                 scenario.missing_rate, gen_rng)
        except DataError as err:
            failures.append(ReplicateFailure(scenario.label, rep, "generate", str(err)))
            continue

        try:
            draws = sample(data, with_seed(cfg.sampler, sampler_seed), cfg.priors)
        except (DivergenceError, FloatingPointError, np.linalg.LinAlgError) as err:
            failures.append(ReplicateFailure(scenario.label, rep, "sample", str(err)))
            continue

        try:
            freq_outcome = _frequentist_outcome(data, scenario.missing_rate)
        except (NoUsableInstrumentsError, np.linalg.LinAlgError, ValueError) as err:
            failures.append(ReplicateFailure(scenario.label, rep, "frequentist",
                                             str(err)))
            continue

        if cfg.mode == "random":
            pick_rng = np.random.default_rng(pick_ss)
            t = float(pick_rng.uniform(*cfg.t_range))
            a = float(pick_rng.uniform(*cfg.a_range))
            rope_cfg = RopeConfig(threshold=t, **cfg.rope_kwargs())
            outcome = decide(draws.beta, rope_cfg).outcome
            random_rows.append((t, a, outcome, freq_outcome))
        else:
            draws_sets.append(draws.beta)
            freq_outcomes.append(freq_outcome)

    truth_is_null = scenario.truth_is_null
    reports: List[LossReport] = []
    if cfg.mode == "random":
        if random_rows:
            bayes_losses = [replicate_loss(truth_is_null, o, a) for _, a, o, _ in random_rows]
            freq_losses = [replicate_loss(truth_is_null, fo, a) for _, a, _, fo in random_rows]
            bayes_outcomes = [o for _, _, o, _ in random_rows]
            f_outcomes = [fo for _, _, _, fo in random_rows]
            for method, losses, outs in (("bayesian", bayes_losses, bayes_outcomes),
                                         ("frequentist", freq_losses, f_outcomes)):
                n_h0, n_h1, n_unc = tally_outcomes(outs)
                reports.append(LossReport(
                    scenario=scenario.label, method=method, threshold=None,
                    uncertain_loss=None, expected_loss=expected_loss(losses),
                    n_replicates=len(losses), n_accept_h0=n_h0,
                    n_accept_h1=n_h1, n_uncertain=n_unc))
        else:
            for method in ("bayesian", "frequentist"):
                reports.append(LossReport(
                    scenario=scenario.label, method=method, threshold=None,
                    uncertain_loss=None, expected_loss=float("nan"),
                    n_replicates=0, n_accept_h0=0, n_accept_h1=0, n_uncertain=0))
    else:
        if draws_sets:
            reports.extend(grid_reports(
                scenario.label, truth_is_null, draws_sets, freq_outcomes,
                cfg.t_grid, cfg.a_grid, cfg.rope_kwargs()))
        else:
            for method in ("bayesian", "frequentist"):
                for t in cfg.t_grid:
                    for a in cfg.a_grid:
                        reports.append(LossReport(
                            scenario=scenario.label, method=method,
                            threshold=float(t), uncertain_loss=float(a),
                            expected_loss=float("nan"), n_replicates=0,
                            n_accept_h0=0, n_accept_h1=0, n_uncertain=0))
    return reports, failures


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every scenario cell; failed replicates are skipped and logged."""
    reports: List[LossReport] = []
    failures: List[ReplicateFailure] = []
    for cell_index, scenario in enumerate(cfg.scenarios):
        cell_reports, cell_failures = _run_cell(cfg, scenario, cell_index)
        reports.extend(cell_reports)
        failures.extend(cell_failures)
    return ExperimentResult(reports=reports, failures=failures)


def calibration_grid(scenario: ScenarioConfig, t_grid, a_grid, replicates: int,
                     seed: int = 0, sampler: Optional[SamplerConfig] = None,
                     priors: Optional[PriorSpec] = None,
                     cell_index: int = 0, **rope_kwargs) -> ExperimentResult:
    """Grid-mode loss surface for one scenario, one draw set per replicate."""
    cfg = ExperimentConfig(
        scenarios=[scenario], replicates=replicates, seed=seed, mode="grid",
        sampler=sampler or SamplerConfig(), priors=priors or PriorSpec(),
        t_grid=tuple(t_grid), a_grid=tuple(a_grid), **rope_kwargs)
    cell_reports, cell_failures = _run_cell(cfg, scenario, cell_index)
    return ExperimentResult(reports=cell_reports, failures=cell_failures)
