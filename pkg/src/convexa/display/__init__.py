"""
Display module for convexa.
"""
from .components import DisplayStyles, render_curve_summary, render_suite_report, status_spinner

__all__ = [
    "DisplayStyles",
    "render_curve_summary",
    "render_suite_report",
    "status_spinner",
]
