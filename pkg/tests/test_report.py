"""Posterior summaries and the assembled analysis report."""
import numpy as np
import pytest

from mrrope.report import analysis_payload, render_text, weighted_summary
from mrrope.rope import Outcome, RopeConfig, decide
from mrrope.sampler import SamplerConfig, sample

from conftest import make_dataset


@pytest.fixture(scope="module")
def small_run():
    data = make_dataset(seed=404, n=30, n_instruments=4)
    cfg = SamplerConfig(total_iterations=400, keep_last=150, chains=2,
                        max_leapfrog_steps=16, seed=11)
    return data, sample(data, cfg)


def test_uniform_weights_match_plain_statistics():
    rng = np.random.default_rng(0)
    draws = rng.normal(0.2, 0.7, size=4000)
    summary = weighted_summary(draws)
    assert summary["mean"] == pytest.approx(np.mean(draws), abs=1e-12)
    assert summary["sd"] == pytest.approx(np.std(draws), abs=1e-12)
    lo, hi = np.quantile(draws, [0.025, 0.975])
    assert summary["ci95"][0] == pytest.approx(lo, abs=0.01)
    assert summary["ci95"][1] == pytest.approx(hi, abs=0.01)


def test_weighted_mean_and_sd_by_hand():
    # draws {0, 1} with weights {3, 1}: mean 1/4, variance 3/16
    summary = weighted_summary([0.0, 1.0], weights=[3.0, 1.0])
    assert summary["mean"] == pytest.approx(0.25, abs=1e-12)
    assert summary["sd"] == pytest.approx(np.sqrt(3.0 / 16.0), abs=1e-12)


def test_weight_scale_does_not_matter():
    rng = np.random.default_rng(1)
    draws = rng.normal(size=500)
    w = rng.uniform(0.1, 2.0, size=500)
    a = weighted_summary(draws, w)
    b = weighted_summary(draws, w * 37.5)
    assert a["mean"] == pytest.approx(b["mean"], abs=1e-12)
    assert a["sd"] == pytest.approx(b["sd"], abs=1e-12)
    assert a["ci95"] == pytest.approx(b["ci95"], abs=1e-12)


def test_degenerate_weights_collapse_to_one_draw():
    summary = weighted_summary([1.0, 2.0, 3.0], weights=[0.0, 1.0, 0.0])
    assert summary["mean"] == pytest.approx(2.0)
    assert summary["sd"] == pytest.approx(0.0)


def test_empty_draws_rejected():
    with pytest.raises(ValueError):
        weighted_summary([])


def test_payload_decisions_match_decide(small_run):
    data, draws = small_run
    thresholds = (0.03, 0.07)
    payload = analysis_payload(data, draws, thresholds=thresholds,
                               rope_kwargs={"pi0": 0.4})
    assert [b["threshold"] for b in payload["decisions"]] == list(thresholds)
    for block in payload["decisions"]:
        cfg = RopeConfig(threshold=block["threshold"], pi0=0.4)
        expected = decide(draws.beta, cfg)
        assert block["v0"] == pytest.approx(expected.v0, abs=1e-15)
        assert block["odds"] == pytest.approx(expected.odds, rel=1e-15)
        assert block["outcome"] == expected.outcome.value
        assert Outcome(block["outcome"])  # round-trips through the enum
        wb = block["weighted_beta"]
        assert wb["ci95"][0] <= wb["mean"] <= wb["ci95"][1]


def test_payload_bookkeeping(small_run):
    data, draws = small_run
    payload = analysis_payload(data, draws, provenance={"seed": 11})
    post = payload["beta_posterior"]
    assert post["n_draws"] == draws.beta.size
    assert post["mean"] == pytest.approx(np.mean(draws.beta), abs=1e-12)
    assert payload["data"] == {
        "n": data.n,
        "n_instruments": data.n_instruments,
        "n_covariates": data.n_covariates,
        "n_missing": data.n_missing,
    }
    assert payload["provenance"]["seed"] == 11
    assert "package_version" in payload["provenance"]
    diag = payload["diagnostics"]
    assert diag["backend"] in ("numba", "numpy")
    assert len(diag["step_sizes"]) == 2


def test_render_text_shape(small_run):
    data, draws = small_run
    payload = analysis_payload(data, draws, thresholds=(0.02, 0.06))
    text = render_text(payload)
    assert text.splitlines()[0] == "causal effect posterior"
    assert text.count("T=") == 2
    for block in payload["decisions"]:
        assert block["outcome"] in text
    assert "backend" in text
    assert text.endswith("\n")
