"""
Rich renderings of suite reports and curve summaries.
"""
from contextlib import contextmanager

import numpy as np
from rich import box
from rich.console import Console
from rich.live import Live
from rich.panel import Panel
from rich.spinner import Spinner
from rich.table import Table
from rich.text import Text

from convexa.errors import WrongEndpoint
from convexa.geometry.curves import FramedCurve, total_curvature
from convexa.harness.topology import classify_component

from .display_styles import DisplayStyles


def _quaternion(q) -> str:
    return "(" + ", ".join(f"{x:+.6f}" for x in np.asarray(q)) + ")"


def suite_table(report) -> Table:
    table = Table(title=f"convexa suite (seed {report.seed})", box=box.SIMPLE_HEAVY,
                  title_style=DisplayStyles.TITLE_STYLE)
    table.add_column("check", style="bold")
    table.add_column("status")
    table.add_column("summary", overflow="fold")
    for result in report.results:
        table.add_row(result.name, DisplayStyles.status_text(result.status), result.summary)
    return table


def render_suite_report(report, console: Console | None = None):
    console = console or Console()
    console.print(suite_table(report))
    failed = len(report.failures)
    total = len(report.results)
    if failed:
        message = Text(f"{failed} of {total} checks did not pass", style="bold red")
        border = DisplayStyles.BORDER_FAIL
    else:
        message = Text(f"all {total} checks passed", style="bold green")
        border = DisplayStyles.BORDER_PASS
    console.print(Panel(message, border_style=border, expand=False))


def curve_summary(curve: FramedCurve) -> Table:
    table = Table.grid(padding=(0, 2))
    table.add_column(style="dim")
    table.add_column()
    table.add_row("family", str(curve.metadata.get("family", "-")))
    table.add_row("cells", str(curve.cells))
    table.add_row("endpoint lift", _quaternion(curve.endpoint_lift))
    table.add_row("total curvature", f"{total_curvature(curve):.9f}")
    table.add_row("locally convex", "yes" if curve.is_locally_convex else "no")
    try:
        table.add_row("component", classify_component(curve).value)
    except WrongEndpoint:
        table.add_row("component", "-")
    return table


def render_curve_summary(curve: FramedCurve, console: Console | None = None):
    console = console or Console()
    console.print(Panel(curve_summary(curve), title="curve", title_align="left",
                        border_style=DisplayStyles.TITLE_STYLE, expand=False))


@contextmanager
def status_spinner(console: Console, text: str):
    """A transient spinner shown while a long computation runs."""
    spinner = Spinner("dots", text=Text(f" {text}", style="cyan"))
    with Live(spinner, console=console, refresh_per_second=12, transient=True):
        yield
