"""Tests for the property-check suite."""
import json

import pytest

from sketchbound.errors import InvalidParameter
from sketchbound.experiments.lemmas import LEMMA_CHECKS, MONOTONICITY_CHECKS, run_checks, run_lemma_suite
from sketchbound.schemas import ExperimentConfig

QUICK_CHECKS = [
    "chaining",
    "projector_idempotence",
    "best_rank_lower_bound",
    "spectral_norm_agreement",
    "polar_t_squared",
    "single_vector_monotonicity",
    "multi_column_monotonicity",
    "worst_case_t_monotonicity",
    "svd_factor_identity",
    "power_jensen",
    "w_sandwich",
    "tail_monotonicity",
]
HEAVY_CHECKS = [name for name in LEMMA_CHECKS if name not in QUICK_CHECKS]


@pytest.mark.parametrize("name", QUICK_CHECKS)
def test_check_passes(name):
    result = LEMMA_CHECKS[name](0, False)
    assert result.passed, f"{name}: {result.failures} failures, worst slack {result.worst_slack}"
    assert result.instances > 0


@pytest.mark.slow
@pytest.mark.parametrize("name", HEAVY_CHECKS)
def test_heavy_check_passes(name):
    result = LEMMA_CHECKS[name](0, False)
    assert result.passed, f"{name}: {result.detail}"


@pytest.mark.parametrize("name", MONOTONICITY_CHECKS)
def test_negated_monotonicity_fails(name):
    result = LEMMA_CHECKS[name](0, True)
    assert not result.passed
    assert result.worst_slack < 0


def test_run_checks_selection_and_report():
    report = run_checks(seed=1, names=["chaining", "w_sandwich"])
    assert [result.name for result in report.results] == ["chaining", "w_sandwich"]
    assert report.passed
    assert report.failed_names == []


def test_negated_suite_reports_failures():
    report = run_checks(seed=0, negate=True, names=list(MONOTONICITY_CHECKS))
    assert report.negated
    assert not report.passed
    assert report.failed_names == list(MONOTONICITY_CHECKS)


def test_unknown_check_name():
    with pytest.raises(InvalidParameter):
        run_checks(names=["chaining", "no_such_check"])


def test_lemma_suite_writes_json(tmp_path):
    cfg = ExperimentConfig(name="lemma_suite", output_dir=str(tmp_path), self_test_negate=True)
    report = run_lemma_suite(cfg, names=["single_vector_monotonicity"])
    payload = json.loads((tmp_path / "lemma_suite.json").read_text())
    assert payload["passed"] is False
    assert payload["failed"] == ["single_vector_monotonicity"]
    assert payload["negated"] is True
    assert not report.passed


def test_limit_checks_reject_t_above_cap():
    with pytest.raises(InvalidParameter):
        run_checks(names=["chaining"], t=1e9)
    with pytest.raises(InvalidParameter):
        run_checks(names=["chaining"], t=0.5)


@pytest.mark.slow
def test_limit_checks_use_requested_t(tmp_path):
    report = run_checks(names=["limit_identity"], t=2e6)
    assert report.passed
    assert "t=2e+06" in report.results[0].detail

    cfg = ExperimentConfig(name="lemma_suite", t=3e6, checks=["power_limit"], output_dir=str(tmp_path))
    report = run_lemma_suite(cfg)
    assert report.passed
    assert "t=3e+06" in report.results[0].detail
