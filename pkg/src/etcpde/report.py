"""Trace emission: CSV files, JSON summaries, and figures.

The CSV is the contract; figures are optional conveniences re-read from the
CSV so the numeric pipeline never depends on a rendering backend.  Floats are
written with shortest round-trip repr, which makes byte-identical output a
direct consequence of deterministic simulation.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .closed_loop import LyapunovSeries, Trace

__all__ = [
    "TRACE_COLUMNS",
    "write_trace_csv",
    "write_events_csv",
    "write_summary_json",
    "write_synthesis_json",
    "render_trace_plots",
    "render_compare_plot",
]

TRACE_COLUMNS = ("t", "u_norm", "u_boundary", "U_held", "d", "m", "event")


def _fmt(x) -> str:
    return repr(float(x))


def write_trace_csv(trace: Trace, path, diagnostics: LyapunovSeries | None = None) -> Path:
    """One row per time step; diagnostics add w_norm/V on snapshot rows only."""
    path = Path(path)
    header = list(TRACE_COLUMNS)
    diag_at = {}
    if diagnostics is not None:
        header += ["w_norm", "V"]
        diag_at = {int(k): (w, v) for k, w, v in
                   zip(diagnostics.indices, diagnostics.w_norm, diagnostics.value)}
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for k in range(trace.t.size):
            row = [
                _fmt(trace.t[k]), _fmt(trace.u_norm[k]), _fmt(trace.u_boundary[k]),
                _fmt(trace.U_held[k]), _fmt(trace.d[k]), _fmt(trace.m[k]),
                str(int(trace.event[k])),
            ]
            if diagnostics is not None:
                if k in diag_at:
                    row += [_fmt(diag_at[k][0]), _fmt(diag_at[k][1])]
                else:
                    row += ["", ""]
            out.writerow(row)
    return path


def write_events_csv(trace: Trace, path) -> Path:
    """Event log: firing instant and the input value committed there."""
    path = Path(path)
    ev_rows = [k for k in range(trace.t.size) if trace.event[k]]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "U"])
        for t_event, k in zip(trace.events, ev_rows):
            out.writerow([_fmt(t_event), _fmt(trace.U_held[k])])
    return path


def write_summary_json(summary: dict, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_synthesis_json(report, path) -> Path:
    from dataclasses import asdict

    path = Path(path)
    with open(path, "w") as fh:
        json.dump(asdict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = [float(r["t"]) for r in rows]
    u_norm = [float(r["u_norm"]) for r in rows]
    held = [float(r["U_held"]) for r in rows]
    event = [int(r["event"]) for r in rows]
    return t, u_norm, held, event


def render_trace_plots(csv_path, outdir, fmt: str = "svg") -> list[Path]:
    """Input and norm evolution figures, built from an emitted trace CSV."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    t, u_norm, held, event = _read_trace_csv(csv_path)
    stem = Path(csv_path).stem
    made = []

    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.step(t, held, where="post", lw=1.0)
    ev_t = [ti for ti, e in zip(t, event) if e]
    ev_u = [ui for ui, e in zip(held, event) if e]
    if 0 < len(ev_t) < len(t):
        ax.plot(ev_t, ev_u, "k.", ms=4, label=f"{len(ev_t)} updates")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel("t")
    ax.set_ylabel("boundary input U")
    fig.tight_layout()
    p = outdir / f"{stem}_input.{fmt}"
    fig.savefig(p)
    plt.close(fig)
    made.append(p)

    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.semilogy(t, u_norm, lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("state norm")
    fig.tight_layout()
    p = outdir / f"{stem}_norm.{fmt}"
    fig.savefig(p)
    plt.close(fig)
    made.append(p)
    return made


def render_compare_plot(etc_csv, ctc_csv, outdir, fmt: str = "svg") -> Path:
    """Overlay of held inputs and norms for the two update policies."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t1, n1, h1, e1 = _read_trace_csv(etc_csv)
    t2, n2, h2, _ = _read_trace_csv(ctc_csv)
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6.0, 5.4), sharex=True)
    ax0.step(t1, h1, where="post", lw=1.0, label=f"event-triggered ({sum(e1)} updates)")
    ax0.plot(t2, h2, lw=1.0, alpha=0.7, label=f"continuous ({len(t2) - 1} updates)")
    ax0.set_ylabel("boundary input U")
    ax0.legend(frameon=False, fontsize=8)
    ax1.semilogy(t1, n1, lw=1.2, label="event-triggered")
    ax1.semilogy(t2, n2, lw=1.2, alpha=0.7, label="continuous")
    ax1.set_xlabel("t")
    ax1.set_ylabel("state norm")
    ax1.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    p = Path(outdir) / f"compare.{fmt}"
    fig.savefig(p)
    plt.close(fig)
    return p
