"""
Tests for the rich renderings of reports and curves.
"""
from rich.console import Console

from convexa.display.components import DisplayStyles, render_curve_summary, render_suite_report, status_spinner
from convexa.geometry.families import nu
from convexa.harness.checks import CheckResult
from convexa.harness.suite import SuiteReport


def _console():
    return Console(record=True, width=120, color_system=None)


def test_passing_report():
    console = _console()
    report = SuiteReport(5, (CheckResult("total-curvature", "pass", "largest deviation 1.0e-12"),))
    render_suite_report(report, console)
    text = console.export_text()
    assert "seed 5" in text
    assert "total-curvature" in text
    assert "all 1 checks passed" in text


def test_failing_report():
    console = _console()
    report = SuiteReport(5, (
        CheckResult("bruhat-oracle", "pass", "ok"),
        CheckResult("h-hat", "error", "NearBoundary: entry"),
    ))
    render_suite_report(report, console)
    text = console.export_text()
    assert "1 of 2 checks did not pass" in text
    assert "! error" in text


def test_curve_summary():
    console = _console()
    render_curve_summary(nu(2, 64), console)
    text = console.export_text()
    assert "nu" in text
    assert "Pos" in text
    assert "12.566370614" in text


def test_curve_summary_of_an_open_curve():
    console = _console()
    render_curve_summary(nu(0.5, 64), console)
    assert "component" in console.export_text()


def test_styles():
    assert DisplayStyles.status_text("pass") == "[bold green]✓ pass[/bold green]"
    assert DisplayStyles.status_text("weird") == "[white]? weird[/white]"
    assert DisplayStyles.separator_line(3) == "<ansigray>───</ansigray>"


def test_spinner_is_transient():
    console = _console()
    with status_spinner(console, "working"):
        pass
    assert "working" not in console.export_text()
