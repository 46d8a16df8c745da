"""
Runs the reproduction checks and assembles a deterministic report.

Every check draws from its own generator, seeded by the suite seed and the
check name, so results do not depend on the order or the number of workers.
Reports carry no timings.
"""
import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from pathlib import Path

import numpy as np

from convexa.config.loader import Settings
from convexa.errors import ConvexaError
from convexa.harness.checks import CheckResult
from convexa.harness.registry import get_registered_checks
from convexa.utils.common import resolve_seed

logger = logging.getLogger(__name__)

REPORT_VERSION = "1"


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [result for result in self.results if not result.passed]

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_VERSION,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [result.to_dict() for result in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding="utf-8")
        return path


def check_generator(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(name.encode("utf-8"))]))


def run_check(name: str, settings: Settings, seed: int) -> CheckResult:
    fn = get_registered_checks().get(name)
    logger.info(f"Running check {name}")
    try:
        result = fn(settings, check_generator(seed, name))
    except (ConvexaError, ValueError, np.linalg.LinAlgError) as e:
        logger.error(f"Check {name} raised {type(e).__name__}: {e}")
        return CheckResult(name, "error", f"{type(e).__name__}: {e}", {"error": type(e).__name__})
    logger.info(f"Check {name}: {result.status} ({result.summary})")
    return result


def resolve_checks(settings: Settings, checks=None) -> list[str]:
    """The requested checks, else the configured ones, else all; unknown names raise KeyError."""
    registry = get_registered_checks()
    names = list(checks or settings.suite.checks or registry.names())
    for name in names:
        registry.get(name)
    return names


def run_suite(settings: Settings, checks=None, workers: int | None = None) -> SuiteReport:
    names = resolve_checks(settings, checks)
    seed = resolve_seed(settings)
    workers = workers or settings.suite.workers
    logger.info(f"Running {len(names)} checks with seed {seed} on {workers} worker(s)")

    if workers > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_check, names, repeat(settings), repeat(seed)))
    else:
        results = [run_check(name, settings, seed) for name in names]

    report = SuiteReport(seed, tuple(results))
    for failure in report.failures:
        logger.error(f"Check {failure.name} {failure.status}: {failure.summary}")
    return report
