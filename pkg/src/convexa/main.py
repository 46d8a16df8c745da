import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path

import numpy as np
from rich.console import Console
from rich.markup import escape

from convexa.config.loader import Settings, load_config
from convexa.display import render_curve_summary, render_suite_report
from convexa.errors import ConvexaError
from convexa.geometry import bruhat
from convexa.geometry import rotations as rot
from convexa.geometry.curves import LogCoords, integrate_frame, total_curvature
from convexa.geometry.deform import (GraftSpec, LoopSpec, add_loops, find_graft_window, graft,
                                     graft_normalized, spread_loops, spread_loops_search)
from convexa.harness.catalog import build_family, family_names, parse_params
from convexa.harness.export import export_minor_trace, export_mk_trace, export_samples
from convexa.harness.serialize import load_curve, save_curve
from convexa.harness.suite import run_suite
from convexa.harness.topology import classify_component, g0_family, looped_family
from convexa.interface.cli import ConsoleSession, run_console_loop
from convexa.log.manager import setup_logging
from convexa.utils.common import SEED_ENV_VAR, get_convexa_dir

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _quaternion(q) -> str:
    return " ".join(f"{x:+.12f}" for x in np.asarray(q))


def _emit(curve, output, console: Console):
    render_curve_summary(curve, console)
    if output:
        path = save_curve(curve, output)
        console.print(f"wrote {path}")


def cmd_integrate(args, settings: Settings, console: Console) -> int:
    cells = args.cells or settings.numerics.grid_cells
    grid = np.linspace(0.0, 1.0, cells + 1)
    coords = LogCoords(grid, np.full(cells, args.w), np.full(cells, args.what), args.chart)
    curve = integrate_frame(coords).with_metadata(family="constant-log", w=args.w, w_hat=args.what)
    console.print(f"endpoint lift: {_quaternion(curve.endpoint_lift)}")
    console.print(f"total curvature: {total_curvature(curve):.12f}")
    if args.output:
        console.print(f"wrote {save_curve(curve, args.output)}")
    return EXIT_OK


def cmd_classify_cell(args, settings: Settings, console: Console) -> int:
    tol = settings.numerics.zero_tol
    if args.quat is not None:
        z = np.array(args.quat, dtype=float)
        if np.linalg.norm(z) == 0.0:
            raise ValueError("quaternion must be non-zero")
        z = rot.normalize(z)
        console.print(f"cell: {bruhat.cell_of_quaternion(z, tol)}")
        console.print(f"signed cell: {bruhat.signed_cell(z, tol, steps=settings.numerics.lift_steps)}")
        console.print(f"convex: {bruhat.is_convex_quat(z, tol)}")
        console.print(f"stably convex: {bruhat.is_stably_convex_quat(z, tol)}")
        console.print(f"anticonvex: {bruhat.is_anticonvex_quat(z, tol)}")
        return EXIT_OK

    q = np.array(args.matrix, dtype=float).reshape(3, 3)
    if not np.allclose(q.T @ q, np.eye(3), atol=1e-8) or np.linalg.det(q) < 0:
        raise ValueError("matrix must be a rotation (row-major, 9 numbers)")
    cell = bruhat.cell_id(q, tol)
    console.print(f"cell: {cell} (dimension {cell.dim})")
    console.print(f"convex: {bruhat.is_convex_matrix(q, tol)}")
    code = bruhat.open_cell_code(q, tol)
    if code is not None:
        console.print(f"open cell: (13);{code}")
    return EXIT_OK


def cmd_classify_component(args, settings: Settings, console: Console) -> int:
    curve = load_curve(args.file)
    console.print(classify_component(curve).value)
    return EXIT_OK


def cmd_family(args, settings: Settings, console: Console) -> int:
    curve = build_family(args.name, parse_params(args.param), settings)
    _emit(curve, args.output, console)
    return EXIT_OK


def cmd_deform(args, settings: Settings, console: Console) -> int:
    curve = load_curve(args.file)
    if args.op == "add-loops":
        out = add_loops(curve, LoopSpec(args.t0, args.n, args.eps))
    elif args.op == "spread-loops":
        if args.n is None:
            n, out = spread_loops_search(curve, max_n=settings.families.spread_search_max)
            console.print(f"spread with n = {n}")
        else:
            out = spread_loops(curve, args.n)
    else:
        if args.t1 is None:
            window = find_graft_window(curve, args.t0)
            console.print(f"graft window [{window.t0:.9f}, {window.t1:.9f}] in (13);{window.ell}")
            spec = GraftSpec(window.t0, window.t1, args.s, window.ell, args.eps)
        else:
            spec = GraftSpec(args.t0, args.t1, args.s, args.ell, args.eps)
        if args.normalized:
            out = graft_normalized(curve, spec.t0, spec.t1, spec.s, spec.eps)
        else:
            out = graft(curve, spec)
    _emit(out, args.output, console)
    return EXIT_OK


def cmd_verify(args, settings: Settings, console: Console) -> int:
    if args.seed is not None:
        os.environ[SEED_ENV_VAR] = str(args.seed)
    report = run_suite(settings, checks=args.checks or None, workers=args.workers)
    render_suite_report(report, console)
    if args.json:
        console.print(f"wrote {report.write(args.json)}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_export_plot(args, settings: Settings, console: Console) -> int:
    extra = {} if args.samples is None else {"samples": args.samples}
    if args.mk is not None:
        if args.mk != 2:
            raise ValueError("M_k traces are exported for the sphere family, k = 2")
        family = g0_family(settings.numerics.grid_cells, settings.topology)
        if args.looped is not None:
            family = looped_family(family, LoopSpec(args.looped, 2))
        path = export_mk_trace(family, args.mk, args.output, alpha=args.radius, **extra)
    else:
        if args.file is None:
            raise ValueError("a curve file is required unless --mk is given")
        curve = load_curve(args.file)
        if args.minor is not None:
            path = export_minor_trace(curve, args.minor, args.output, **extra)
        else:
            path = export_samples(curve, args.output, **extra)
    console.print(f"wrote {path}")
    return EXIT_OK


def cmd_console(args, settings: Settings, console: Console) -> int:
    try:
        asyncio.run(run_console_loop(ConsoleSession(settings, console)))
    except KeyboardInterrupt:
        print("\nGoodbye!")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convexa", description="Locally convex spherical curves")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        help="Set the logging level for console output (DEBUG, INFO, WARNING, ERROR, CRITICAL)"
    )
    parser.add_argument("--config", type=Path, default=None, help="Path to a JSON configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="Integrate constant log coordinates")
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--what", type=float, required=True, help="w_hat (chart L) or v_hat (chart I)")
    p.add_argument("--cells", type=int, default=None)
    p.add_argument("--chart", choices=["L", "I"], default="L")
    p.add_argument("-o", "--output", type=Path, default=None)
    p.set_defaults(handler=cmd_integrate)

    p = sub.add_parser("classify-cell", help="Bruhat cell and convexity of a frame")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--quat", type=float, nargs=4, metavar=("W", "X", "Y", "Z"))
    group.add_argument("--matrix", type=float, nargs=9, metavar="Q")
    p.set_defaults(handler=cmd_classify_cell)

    p = sub.add_parser("classify-component", help="Component of a closed curve")
    p.add_argument("file", type=Path)
    p.set_defaults(handler=cmd_classify_component)

    p = sub.add_parser("family", help=f"Build a named curve ({', '.join(family_names())})")
    p.add_argument("name", choices=family_names())
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("-o", "--output", type=Path, default=None)
    p.set_defaults(handler=cmd_family)

    p = sub.add_parser("deform", help="Add loops, spread loops or graft")
    p.add_argument("op", choices=["add-loops", "spread-loops", "graft"])
    p.add_argument("file", type=Path)
    p.add_argument("--t0", type=float, default=0.5)
    p.add_argument("--t1", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--ell", type=int, default=7, choices=[1, 4, 7])
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--normalized", action="store_true", help="Graft a curve already in normalized position")
    p.add_argument("-o", "--output", type=Path, default=None)
    p.set_defaults(handler=cmd_deform)

    p = sub.add_parser("verify", help="Run the reproduction checks")
    p.add_argument("checks", nargs="*", metavar="CHECK")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--json", type=Path, default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("export-plot", help="CSV exports for figures")
    p.add_argument("file", type=Path, nargs="?", default=None)
    p.add_argument("--mk", type=int, default=None, metavar="K")
    p.add_argument("--looped", type=float, default=None, metavar="T0",
                   help="With --mk: add two loops at T0 to every curve of the family")
    p.add_argument("--radius", type=float, default=0.05, help="With --mk: polar radius of the loop around s")
    p.add_argument("--minor", type=float, default=None, metavar="T0")
    p.add_argument("--samples", type=int, default=None,
                   help="Uniform samples (default: the curve grid, 512 minor or 64 loop samples)")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(handler=cmd_export_plot)

    p = sub.add_parser("console", help="Interactive console")
    p.set_defaults(handler=cmd_console)
    return parser


def run(argv=None, console: Console | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Determine log directory and setup logging
    log_dir = get_convexa_dir()
    setup_logging(console_level=args.log_level, log_dir=log_dir)

    settings = load_config(args.config)
    if args.command == "deform" and args.op == "add-loops" and args.n is None:
        args.n = 2
    if args.command == "deform" and args.n is not None and args.n < 1:
        parser.error("--n must be positive")

    console = console or Console()
    try:
        return args.handler(args, settings, console)
    except (ConvexaError, KeyError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
        return EXIT_INPUT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
