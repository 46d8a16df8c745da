"""
Components module for convexa display functionality.
"""
from .display_styles import DisplayStyles
from .report_panel import render_curve_summary, render_suite_report, status_spinner

__all__ = [
    "DisplayStyles",
    "render_curve_summary",
    "render_suite_report",
    "status_spinner",
]
