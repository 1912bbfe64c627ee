"""Decision loss and its aggregation over simulation replicates.

A confident decision costs nothing when right and 1 when wrong. Declining
to decide costs a fixed amount a in [0, 1], the price of remaining
uncertain. Frequentist tests never abstain, so their loss only uses the
confident rows of the table.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rope import Outcome, RopeConfig, decide


def replicate_loss(truth_is_null: bool, outcome: Outcome, uncertain_loss: float) -> float:
    """Loss of one decision against the simulation truth."""
    if not 0.0 <= uncertain_loss <= 1.0:
        raise ValueError("uncertain_loss must lie in [0, 1]")
    if outcome == Outcome.UNCERTAIN:
        return float(uncertain_loss)
    correct = (outcome == Outcome.ACCEPT_H0) == bool(truth_is_null)
    return 0.0 if correct else 1.0


def expected_loss(losses) -> float:
    """Mean replicate loss."""
    arr = np.asarray(losses, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one replicate loss")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("losses must lie in [0, 1]")
    return float(arr.mean())


@dataclass(frozen=True)
class LossReport:
    """Aggregate decision performance for one (scenario, method) cell.

    threshold and uncertain_loss are None for random-mode aggregates where
    each replicate drew its own (T, a).
    """

    scenario: str
    method: str
    threshold: Optional[float]
    uncertain_loss: Optional[float]
    expected_loss: float
    n_replicates: int
    n_accept_h0: int
    n_accept_h1: int
    n_uncertain: int


def tally_outcomes(outcomes) -> tuple:
    n_h0 = sum(1 for o in outcomes if o == Outcome.ACCEPT_H0)
    n_h1 = sum(1 for o in outcomes if o == Outcome.ACCEPT_H1)
    n_unc = sum(1 for o in outcomes if o == Outcome.UNCERTAIN)
    return n_h0, n_h1, n_unc


def report_from_outcomes(scenario: str, method: str, truth_is_null: bool,
                         outcomes, uncertain_loss: float,
                         threshold: Optional[float]) -> LossReport:
    losses = [replicate_loss(truth_is_null, o, uncertain_loss) for o in outcomes]
    n_h0, n_h1, n_unc = tally_outcomes(outcomes)
    return LossReport(
        scenario=scenario, method=method, threshold=threshold,
        uncertain_loss=uncertain_loss, expected_loss=expected_loss(losses),
        n_replicates=len(losses), n_accept_h0=n_h0, n_accept_h1=n_h1,
        n_uncertain=n_unc,
    )


def grid_reports(scenario: str, truth_is_null: bool, bayes_draw_sets,
                 freq_outcomes, t_grid, a_grid,
                 rope_kwargs: Optional[dict] = None) -> list:
    """Loss surface over a (T, a) grid, reusing draws across cells.

    bayes_draw_sets holds one beta-draw vector per surviving replicate;
    freq_outcomes one confident Outcome per replicate (or None to skip the
    frequentist rows). Weights depend on T only, so each replicate is
    decided once per T and the a axis just reprices uncertainty.
    """
    rope_kwargs = dict(rope_kwargs or {})
    rope_kwargs.pop("threshold", None)
    decisions_by_t = {}
    for t in t_grid:
        cfg = RopeConfig(threshold=float(t), **rope_kwargs)
        decisions_by_t[t] = [decide(draws, cfg).outcome for draws in bayes_draw_sets]

    reports = []
    for t in t_grid:
        for a in a_grid:
            reports.append(report_from_outcomes(
                scenario, "bayesian", truth_is_null, decisions_by_t[t],
                uncertain_loss=float(a), threshold=float(t)))
    if freq_outcomes is not None:
        for t in t_grid:
            for a in a_grid:
                reports.append(report_from_outcomes(
                    scenario, "frequentist", truth_is_null, freq_outcomes,
                    uncertain_loss=float(a), threshold=float(t)))
    return reports
