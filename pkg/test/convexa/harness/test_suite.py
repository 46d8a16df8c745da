"""
Tests for the verification suite: determinism, seeding, failure injection
and error mapping.
"""
import json
from unittest.mock import patch

import pytest

from convexa.config.loader import Settings
from convexa.errors import NearBoundary
from convexa.harness.checks import CheckResult
from convexa.harness.registry import CheckRegistry
from convexa.harness.suite import check_generator, resolve_checks, run_check, run_suite
from convexa.utils.common import SEED_ENV_VAR

FAST_CHECKS = ["bruhat-oracle", "minor-predicate", "total-curvature"]


@pytest.fixture
def settings():
    return (
        Settings()
        .with_overrides("numerics", grid_cells=64)
        .with_overrides("suite", oracle_samples=200, seed=7)
    )


@pytest.fixture(autouse=True)
def no_seed_override(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)


def test_fast_checks_pass(settings):
    report = run_suite(settings, FAST_CHECKS, workers=1)
    assert [result.name for result in report.results] == FAST_CHECKS
    assert report.passed
    assert report.seed == 7


def test_reports_do_not_depend_on_the_worker_count(settings):
    serial = run_suite(settings, FAST_CHECKS, workers=1)
    parallel = run_suite(settings, FAST_CHECKS, workers=2)
    assert serial.to_json() == parallel.to_json()


def test_check_order_does_not_change_results(settings):
    forward = run_suite(settings, FAST_CHECKS, workers=1).to_dict()["checks"]
    backward = run_suite(settings, FAST_CHECKS[::-1], workers=1).to_dict()["checks"]
    assert forward == backward[::-1]


def test_seed_comes_from_the_environment(settings, monkeypatch):
    monkeypatch.setenv(SEED_ENV_VAR, "99")
    assert run_suite(settings, ["total-curvature"]).seed == 99


def test_generators_are_per_check():
    a = check_generator(1, "bruhat-oracle").random(4)
    assert (a == check_generator(1, "bruhat-oracle").random(4)).all()
    assert not (a == check_generator(1, "minor-predicate").random(4)).all()
    assert not (a == check_generator(2, "bruhat-oracle").random(4)).all()


def test_flipped_minor_sign_is_detected(settings):
    mutated = settings.with_overrides("suite", minor_sign=-1)
    result = run_check("minor-predicate", mutated, 7)
    assert result.status == "fail"
    assert result.details["disagreements"] > 0


def test_unknown_check_names(settings):
    with pytest.raises(KeyError):
        resolve_checks(settings, ["no-such-check"])
    with pytest.raises(KeyError):
        run_suite(settings, ["total-curvature", "no-such-check"])


def test_configured_checks_are_the_default(settings):
    configured = settings.with_overrides("suite", checks=("total-curvature",))
    assert resolve_checks(configured) == ["total-curvature"]
    assert len(resolve_checks(settings)) == 11


def test_raising_checks_become_errors(settings):
    def broken(settings, rng):
        raise NearBoundary("entry 3.2e-07 within a decade of the tolerance")

    registry = CheckRegistry()
    registry.register_check_function("broken", broken)
    with patch("convexa.harness.suite.get_registered_checks", return_value=registry):
        report = run_suite(settings, ["broken"])
    result = report.results[0]
    assert result.status == "error"
    assert result.details == {"error": "NearBoundary"}
    assert not report.passed
    assert report.failures == [result]


def test_report_json(settings, tmp_path):
    report = run_suite(settings, ["total-curvature"])
    path = report.write(tmp_path / "out" / "report.json")
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["format_version"] == "1"
    assert doc["seed"] == 7
    assert doc["passed"] is True
    assert doc["checks"][0]["name"] == "total-curvature"
    assert "time" not in path.read_text(encoding="utf-8")


def test_check_result_status():
    assert CheckResult("x", "pass", "").passed
    assert not CheckResult("x", "error", "").passed
