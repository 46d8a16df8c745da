"""
Tests for the command line: subcommands, exit codes and error reporting.
"""
import json
from unittest.mock import AsyncMock, patch

import numpy as np
import pytest
from rich.console import Console

from convexa.harness.serialize import load_curve
from convexa.main import EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_OK, build_parser, run
from convexa.utils.common import SEED_ENV_VAR

S = 1.0 / np.sqrt(2.0)


@pytest.fixture(autouse=True)
def quiet(tmp_path, monkeypatch):
    monkeypatch.setenv(SEED_ENV_VAR, "1")
    with patch("convexa.main.setup_logging"), patch("convexa.main.get_convexa_dir", return_value=tmp_path):
        yield


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"numerics": {"grid_cells": 64}, "suite": {"seed": 9}}), encoding="utf-8")
    return path


def _run(config, *argv):
    console = Console(record=True, width=160, color_system=None)
    code = run(["--config", str(config), *argv], console)
    return code, console.export_text()


def test_integrate_the_standard_circle(config, tmp_path):
    v = np.sqrt(2.0) * np.pi
    w = str(v - 1.0 / v)
    code, text = _run(config, "integrate", "--w", w, "--what", w, "-o", str(tmp_path / "nu1.json"))
    assert code == EXIT_OK
    assert "endpoint lift: -1.000000000000" in text
    assert "total curvature: 6.28318530" in text
    assert load_curve(tmp_path / "nu1.json").metadata["family"] == "constant-log"


def test_classify_a_quaternion(config):
    code, text = _run(config, "classify-cell", "--quat", "0", str(S), "0", str(S))
    assert code == EXIT_OK
    assert "stably convex: True" in text


def test_classify_a_matrix(config):
    code, text = _run(config, "classify-cell", "--matrix", "0", "0", "1", "0", "-1", "0", "1", "0", "0")
    assert code == EXIT_OK
    assert "open cell: (13);2" in text


def test_classify_rejects_non_rotations(config):
    code, text = _run(config, "classify-cell", "--matrix", *["1"] * 9)
    assert code == EXIT_INPUT_ERROR
    assert "Error:" in text


def test_family_deform_and_component(config, tmp_path):
    nu2 = tmp_path / "nu2.json"
    looped = tmp_path / "looped.json"
    assert _run(config, "family", "nu", "--param", "s=2", "-o", str(nu2))[0] == EXIT_OK
    code, text = _run(config, "classify-component", str(nu2))
    assert (code, text.strip()) == (EXIT_OK, "Pos")
    assert _run(config, "deform", "add-loops", str(nu2), "--t0", "0.25", "--n", "1", "-o", str(looped))[0] == EXIT_OK
    code, text = _run(config, "classify-component", str(looped))
    assert (code, text.strip()) == (EXIT_OK, "NegNonconvex")


def test_deform_rejects_a_zero_count(config, tmp_path):
    with pytest.raises(SystemExit) as info:
        _run(config, "deform", "add-loops", str(tmp_path / "any.json"), "--n", "0")
    assert info.value.code == 2


def test_missing_curve_file(config, tmp_path):
    code, text = _run(config, "classify-component", str(tmp_path / "missing.json"))
    assert code == EXIT_INPUT_ERROR
    assert "cannot read" in text


def test_verify_writes_a_report(config, tmp_path):
    report = tmp_path / "report.json"
    code, text = _run(config, "verify", "total-curvature", "--seed", "5", "--json", str(report))
    assert code == EXIT_OK
    assert "all 1 checks passed" in text
    assert json.loads(report.read_text(encoding="utf-8"))["seed"] == 5


def test_verify_reports_failing_checks(tmp_path):
    path = tmp_path / "mutated.json"
    path.write_text(json.dumps({"suite": {"minor_sign": -1, "oracle_samples": 200}}), encoding="utf-8")
    code, text = _run(path, "verify", "minor-predicate")
    assert code == EXIT_CHECK_FAILED
    assert "did not pass" in text


def test_verify_unknown_check(config):
    code, text = _run(config, "verify", "no-such-check")
    assert code == EXIT_INPUT_ERROR
    assert "unknown check" in text


def test_export_plot(config, tmp_path):
    curve = tmp_path / "nu1.json"
    _run(config, "family", "nu", "--param", "s=1", "-o", str(curve))
    code, _ = _run(config, "export-plot", str(curve), "-o", str(tmp_path / "nu1.csv"))
    assert code == EXIT_OK
    assert (tmp_path / "nu1.csv").read_text(encoding="utf-8").startswith("t,x,y,z")
    code, _ = _run(config, "export-plot", str(curve), "--minor", "0", "--samples", "8", "-o", str(tmp_path / "m.csv"))
    assert code == EXIT_OK
    code, _ = _run(config, "export-plot", str(curve), "--samples", "8", "-o", str(tmp_path / "u.csv"))
    assert code == EXIT_OK
    assert len((tmp_path / "u.csv").read_text(encoding="utf-8").splitlines()) == 10


@pytest.mark.parametrize("argv", [
    ["export-plot", "--mk", "3", "-o", "out.csv"],
    ["export-plot", "-o", "out.csv"],
])
def test_export_plot_input_errors(config, argv):
    assert _run(config, *argv)[0] == EXIT_INPUT_ERROR


def test_console_runs_the_loop(config):
    with patch("convexa.main.run_console_loop", new_callable=AsyncMock) as loop:
        assert _run(config, "console")[0] == EXIT_OK
    loop.assert_awaited_once()
    assert loop.await_args.args[0].settings.numerics.grid_cells == 64


def test_bad_config_exits_with_status_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(SystemExit) as info:
        run(["--config", str(path), "verify"])
    assert info.value.code == 2


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
