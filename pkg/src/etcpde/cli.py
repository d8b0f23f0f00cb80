"""Command-line front end.

    etcpde synth    <config.toml>            trigger constant synthesis
    etcpde simulate <config.toml> [--mode]   closed-loop run -> CSV + JSON
    etcpde verify   <config.toml>            kernel/transform check suite
    etcpde compare  <config.toml>            event-triggered vs continuous legs

Exit codes: 0 success, 1 infeasible design or failed check, 2 configuration
error, 3 numerical abort.  The output directory is the --outdir flag when
given, else $ETCPDE_OUTDIR, else the working directory.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import report as rpt
from .closed_loop import lyapunov_series, run, summarize
from .config import AppConfig, ConfigError, load_config, make_run_config
from .certify import verify_kernel_bounds, verify_kernel_pde, verify_ladder_growth
from .kernels import SeriesConvergenceError
from .plant import PlantState, SpatialGrid, l2_norm
from .profiles import check_assumption2, check_gevrey
from .transform import TransformOperator
from .trigger import MonitorStepError

OUTDIR_ENV = "ETCPDE_OUTDIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _outdir(args) -> Path:
    raw = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    d = Path(raw)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _print_report(report) -> None:
    from dataclasses import asdict

    for key, value in asdict(report).items():
        print(f"  {key:>22}: {value}")


def cmd_synth(args) -> int:
    app = load_config(args.config)
    _, report = make_run_config(app, mode="etc")
    print(f"trigger synthesis for epsilon={app.plant.epsilon}, q={app.plant.q}, "
          f"D={app.plant.profile.gevrey_D}")
    _print_report(report)
    rpt.write_synthesis_json(report, _outdir(args) / "synthesis.json")
    if not report.feasible:
        print("design infeasible: Lyapunov weight below its feasibility floor")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_simulate(args) -> int:
    app = load_config(args.config)
    rc, report = make_run_config(app, mode=args.mode)
    trace = run(rc)
    outdir = _outdir(args)

    weight = rc.lyapunov_weight
    diag = None
    if app.diagnostics and weight is not None:
        diag = lyapunov_series(trace, weight)
    summary = summarize(trace, weight=weight)
    if math.isinf(summary["min_dwell"]):
        summary["min_dwell"] = None

    csv_path = rpt.write_trace_csv(trace, outdir / f"trace_{rc.mode}.csv", diagnostics=diag)
    rpt.write_events_csv(trace, outdir / f"events_{rc.mode}.csv")
    rpt.write_summary_json(summary, outdir / f"summary_{rc.mode}.json")
    if args.plot:
        rpt.render_trace_plots(csv_path, outdir, fmt=args.plot)

    print(f"{rc.mode} run: {trace.t.size - 1} steps, {trace.event_count} updates, "
          f"final norm {trace.u_norm[-1]:.6g}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    app = load_config(args.config)
    plant = app.plant
    lines: list[tuple[str, bool, str]] = []

    gev = check_gevrey(plant.profile)
    lines.append(("derivative growth within declared class", gev.passed,
                  f"max ratio {gev.max_ratio:.3g}"))
    lines.append(("actuation margin q > (D + eps)/(2 eps)", check_assumption2(plant),
                  f"margin {plant.assumption2_margin:.3g}"))

    pde = verify_kernel_pde(plant.profile, plant.epsilon)
    lines.append(("gain kernel PDE residual refines at order 2", pde.second_order,
                  f"ratios {pde.forward_ratio:.2f}/{pde.inverse_ratio:.2f}"))
    lines.append(("kernel diagonal matches -lambda x/(2 eps)",
                  pde.diagonal_mismatch < 1e-10, f"mismatch {pde.diagonal_mismatch:.3g}"))

    ladder = verify_ladder_growth(plant.profile, plant.epsilon)
    lines.append(("series coefficient growth bound", ladder.ok,
                  f"worst ratio {ladder.observed:.3g}"))

    bounds = verify_kernel_bounds(plant.profile, plant.epsilon)
    worst = min(b.margin for b in bounds)
    lines.append((f"all {len(bounds)} kernel amplitude bounds", all(b.ok for b in bounds),
                  f"smallest margin {worst:.3g}"))

    grid = SpatialGrid(n_cells=app.n_cells)
    op = TransformOperator(plant, grid)
    rng = np.random.default_rng(7)
    worst_rt = 0.0
    for _ in range(5):
        coef = rng.normal(size=6) / (1.0 + np.arange(6)) ** 2
        u = sum(c * np.cos(k * np.pi * grid.nodes) for k, c in enumerate(coef))
        state = PlantState(u=u, t=0.0)
        back = op.from_target(op.to_target(state))
        worst_rt = max(worst_rt, l2_norm(back.u - u, grid.h) / l2_norm(u, grid.h))
    rt_tol = 1e-5 * (200.0 / app.n_cells) ** 2
    lines.append(("transform round-trip", worst_rt <= rt_tol,
                  f"worst {worst_rt:.3g} (tol {rt_tol:.3g})"))

    ok_all = True
    for name, ok, detail in lines:
        ok_all &= ok
        print(f"  {'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok_all else EXIT_CHECK_FAILED


def cmd_compare(args) -> int:
    app = load_config(args.config)
    outdir = _outdir(args)

    rc_etc, report = make_run_config(app, mode="etc")
    rc_ctc, _ = make_run_config(app, mode="ctc")
    tr_etc = run(rc_etc)
    tr_ctc = run(rc_ctc)

    etc_csv = rpt.write_trace_csv(tr_etc, outdir / "trace_etc.csv")
    ctc_csv = rpt.write_trace_csv(tr_ctc, outdir / "trace_ctc.csv")
    comparison = {
        "etc_updates": tr_etc.event_count,
        "ctc_updates": tr_ctc.event_count,
        "update_ratio": tr_etc.event_count / tr_ctc.event_count,
        "etc_final_norm": float(tr_etc.u_norm[-1]),
        "ctc_final_norm": float(tr_ctc.u_norm[-1]),
        "final_norm_ratio": float(tr_etc.u_norm[-1] / tr_ctc.u_norm[-1]),
    }
    rpt.write_summary_json(comparison, outdir / "comparison.json")
    if args.plot:
        rpt.render_compare_plot(etc_csv, ctc_csv, outdir, fmt=args.plot)

    print(f"updates: {comparison['etc_updates']} event-triggered vs "
          f"{comparison['ctc_updates']} continuous "
          f"({100.0 * comparison['update_ratio']:.2f}%)")
    print(f"final norms: {comparison['etc_final_norm']:.6g} vs "
          f"{comparison['ctc_final_norm']:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etcpde",
        description="Event-triggered backstepping control of a reaction-diffusion plant",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="TOML configuration file")
        p.add_argument("--outdir", default=None,
                       help=f"output directory (default: ${OUTDIR_ENV} or cwd)")

    p = sub.add_parser("synth", help="synthesize trigger constants")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="run the closed loop, emit trace CSV + summary")
    common(p)
    p.add_argument("--mode", choices=("etc", "ctc", "open"), default=None,
                   help="override [run] mode")
    p.add_argument("--plot", choices=("svg", "png"), default=None,
                   help="also render input/norm figures from the CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run kernel and transform checks")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="run both update policies and compare")
    common(p)
    p.add_argument("--plot", choices=("svg", "png"), default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, MonitorStepError, SeriesConvergenceError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
