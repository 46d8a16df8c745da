"""
Runs the individual reproduction checks. The topological and surgery checks
scan whole families and are marked slow.
"""
import numpy as np
import pytest

from convexa.config.loader import Settings
from convexa.harness.checks import CheckResult, _num
from convexa.harness.suite import check_generator, run_check

FAST = ["bruhat-oracle", "minor-predicate", "total-curvature", "gamma-family", "no-common-tangent"]
SLOW = ["ellipse-fit", "multiconvex", "surgeries", "degree-g0", "mk-intersections", "h-hat"]


@pytest.fixture(scope="module")
def settings():
    return Settings().with_overrides("numerics", grid_cells=256).with_overrides("suite", oracle_samples=500)


@pytest.mark.parametrize("name", FAST)
def test_fast_checks(settings, name):
    result = run_check(name, settings, 20240501)
    assert isinstance(result, CheckResult)
    assert result.status == "pass", result.summary


@pytest.mark.slow
@pytest.mark.parametrize("name", SLOW)
def test_slow_checks(name):
    result = run_check(name, Settings(), 20240501)
    assert result.status == "pass", result.summary


def test_numbers_are_rounded_to_twelve_digits():
    assert _num(np.pi) == 3.14159265359
    assert _num(1e-20) == 1e-20


def test_checks_are_deterministic(settings):
    first = run_check("bruhat-oracle", settings, 4).to_dict()
    assert first == run_check("bruhat-oracle", settings, 4).to_dict()
    assert check_generator(4, "bruhat-oracle").integers(1 << 30) == check_generator(4, "bruhat-oracle").integers(1 << 30)


def test_no_common_tangent_reports_both_bands(settings):
    result = run_check("no-common-tangent", settings, 1)
    assert set(result.details["minima"]) == {"pi/4", "pi/2", "3pi/4"}
    for label, far in result.details["far_minima"].items():
        assert far >= result.details["minima"][label] > 0.0
