"""Assembly of the analysis report for one dataset."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from . import __version__
from .dataset import Dataset
from .rope import RopeConfig, decide, importance_weight
from .sampler import PosteriorDraws, backend

DEFAULT_THRESHOLDS = (0.02, 0.04, 0.06, 0.08)


def weighted_summary(draws, weights=None) -> dict:
    """Mean, sd and central 95% interval under optional draw weights.

    Quantiles interpolate the weighted empirical distribution with the
    midpoint convention, so uniform weights reproduce the usual sample
    quantiles up to interpolation detail.
    """
    draws = np.asarray(draws, dtype=float).ravel()
    if draws.size == 0:
        raise ValueError("need at least one draw")
    if weights is None:
        weights = np.ones_like(draws)
    weights = np.asarray(weights, dtype=float).ravel()
    total = weights.sum()
    mean = float(np.sum(weights * draws) / total)
    var = float(np.sum(weights * (draws - mean) ** 2) / total)
    order = np.argsort(draws, kind="stable")
    sorted_draws = draws[order]
    w = weights[order]
    cdf = (np.cumsum(w) - 0.5 * w) / total
    lo, hi = np.interp([0.025, 0.975], cdf, sorted_draws)
    return {"mean": mean, "sd": float(np.sqrt(var)),
            "ci95": [float(lo), float(hi)]}


def analysis_payload(data: Dataset, draws: PosteriorDraws,
                     thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
                     rope_kwargs: Optional[dict] = None,
                     provenance: Optional[dict] = None) -> dict:
    """JSON-ready analysis report: posterior summary, one decision block
    per interval threshold, diagnostics and provenance."""
    rope_kwargs = dict(rope_kwargs or {})
    beta = draws.beta
    decisions = []
    for t in thresholds:
        cfg = RopeConfig(threshold=float(t), **rope_kwargs)
        decision = decide(beta, cfg)
        weights = importance_weight(beta, cfg)
        decisions.append({
            "threshold": float(t),
            "v0": decision.v0,
            "v1": decision.v1,
            "odds": decision.odds,
            "outcome": decision.outcome.value,
            "weighted_beta": weighted_summary(beta, weights),
        })

    payload = {
        "beta_posterior": dict(weighted_summary(beta),
                               n_draws=int(beta.size)),
        "decisions": decisions,
        "diagnostics": {
            "rhat": draws.rhat,
            "ess_bulk": draws.ess,
            "accept_rate": draws.accept_rate,
            "divergences": draws.divergences,
            "step_sizes": [float(s) for s in draws.step_sizes],
            "backend": backend(),
        },
        "data": {
            "n": data.n,
            "n_instruments": data.n_instruments,
            "n_covariates": data.n_covariates,
            "n_missing": data.n_missing,
        },
        "provenance": dict(provenance or {}, package_version=__version__),
    }
    return payload


def render_text(payload: dict) -> str:
    """Short human-readable rendering of an analysis payload."""
    post = payload["beta_posterior"]
    diag = payload["diagnostics"]
    lines = [
        "causal effect posterior",
        f"  mean {post['mean']:.4f}  sd {post['sd']:.4f}  "
        f"95% CI ({post['ci95'][0]:.4f}, {post['ci95'][1]:.4f})  "
        f"draws {post['n_draws']}",
        "",
        "interval null decisions",
    ]
    for block in payload["decisions"]:
        lines.append(
            f"  T={block['threshold']:<6g} odds={block['odds']:<12.5g} "
            f"-> {block['outcome']}")
    lines += [
        "",
        "diagnostics",
        f"  rhat {diag['rhat']:.4f}  ess_bulk {diag['ess_bulk']:.1f}  "
        f"accept {diag['accept_rate']:.3f}  divergences {diag['divergences']}",
        f"  backend {diag['backend']}",
    ]
    return "\n".join(lines) + "\n"
