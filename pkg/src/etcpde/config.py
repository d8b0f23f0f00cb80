"""Run configuration from TOML files.

Sections and keys:

    [plant]    epsilon, q, profile ("constant" | "rational_decay" | "sinusoid"),
               profile parameters (lambda0 | a | amplitude, omega), optional
               gevrey_D override
    [grid]     n_cells, dt
    [trigger]  threshold_ratio, monitor_decay, slack_fraction, young_split,
               lyapunov_weight, monitor_init
    [run]      t_final, mode, ic, ic_amplitude, ic_center, ic_width, ic_mode,
               snapshot_stride, event_refine, diagnostics

Only [plant] is required.  Unknown sections or keys are rejected rather than
ignored, so typos surface as configuration errors instead of silently running
defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .closed_loop import InitialCondition, RunConfig
from .kernels import SeriesConfig
from .profiles import (
    ConstantReaction,
    PlantConfig,
    RationalDecayReaction,
    SinusoidReaction,
)
from .trigger import TriggerParams, synthesize

__all__ = ["ConfigError", "TriggerSettings", "AppConfig", "load_config", "make_run_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration file."""


@dataclass(frozen=True)
class TriggerSettings:
    """User-tunable synthesis inputs; the gains themselves are derived."""

    threshold_ratio: float = 1.0
    monitor_decay: float = 1.0
    slack_fraction: float = 0.5
    young_split: float | None = None
    lyapunov_weight: float | None = None
    monitor_init: float = 1e-4


@dataclass(frozen=True)
class AppConfig:
    plant: PlantConfig
    trigger: TriggerSettings = TriggerSettings()
    n_cells: int = 200
    dt: float = 1e-4
    t_final: float = 3.0
    mode: str = "etc"
    ic: InitialCondition = InitialCondition()
    snapshot_stride: int = 100
    event_refine: str = "none"
    diagnostics: bool = False


_PLANT_KEYS = {"epsilon", "q", "profile", "lambda0", "a", "amplitude", "omega", "gevrey_D"}
_GRID_KEYS = {"n_cells", "dt"}
_TRIGGER_KEYS = {
    "threshold_ratio", "monitor_decay", "slack_fraction",
    "young_split", "lyapunov_weight", "monitor_init",
}
_RUN_KEYS = {
    "t_final", "mode", "ic", "ic_amplitude", "ic_center", "ic_width", "ic_mode",
    "snapshot_stride", "event_refine", "diagnostics",
}
_SECTIONS = {"plant": _PLANT_KEYS, "grid": _GRID_KEYS, "trigger": _TRIGGER_KEYS, "run": _RUN_KEYS}


def _check_keys(section: str, table: dict, allowed: set) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{section}] has unknown keys: {', '.join(sorted(unknown))}")


def _number(section: str, table: dict, key: str, default=None):
    if key not in table:
        if default is None:
            raise ConfigError(f"[{section}] missing required key {key!r}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {v!r}")
    return v


def _build_profile(table: dict):
    kind = table.get("profile", "constant")
    override = {}
    if "gevrey_D" in table:
        override["gevrey_D"] = _number("plant", table, "gevrey_D")
    try:
        if kind == "constant":
            return ConstantReaction(lambda0=_number("plant", table, "lambda0"), **override)
        if kind == "rational_decay":
            return RationalDecayReaction(a=_number("plant", table, "a"), **override)
        if kind == "sinusoid":
            return SinusoidReaction(
                amplitude=_number("plant", table, "amplitude"),
                omega=_number("plant", table, "omega"),
                **override,
            )
    except ValueError as exc:
        raise ConfigError(f"[plant] invalid profile parameters: {exc}") from exc
    raise ConfigError(f"[plant] unknown profile kind {kind!r}")


def load_config(path) -> AppConfig:
    """Parse and validate a TOML configuration file."""
    p = Path(path)
    try:
        with open(p, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {p}: {exc}") from exc

    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(sorted(unknown))}")
    for name in doc:
        if not isinstance(doc[name], dict):
            raise ConfigError(f"[{name}] must be a table")
        _check_keys(name, doc[name], _SECTIONS[name])
    if "plant" not in doc:
        raise ConfigError("missing required section [plant]")

    plant_tbl = doc["plant"]
    profile = _build_profile(plant_tbl)
    try:
        plant = PlantConfig(
            epsilon=_number("plant", plant_tbl, "epsilon"),
            q=_number("plant", plant_tbl, "q"),
            profile=profile,
        )
    except ValueError as exc:
        raise ConfigError(f"[plant] {exc}") from exc

    grid_tbl = doc.get("grid", {})
    n_cells = _number("grid", grid_tbl, "n_cells", 200)
    if not isinstance(n_cells, int):
        raise ConfigError(f"[grid] n_cells must be an integer, got {n_cells!r}")
    dt = float(_number("grid", grid_tbl, "dt", 1e-4))

    trig_tbl = doc.get("trigger", {})
    trigger = TriggerSettings(
        threshold_ratio=float(_number("trigger", trig_tbl, "threshold_ratio", 1.0)),
        monitor_decay=float(_number("trigger", trig_tbl, "monitor_decay", 1.0)),
        slack_fraction=float(_number("trigger", trig_tbl, "slack_fraction", 0.5)),
        young_split=(float(_number("trigger", trig_tbl, "young_split"))
                     if "young_split" in trig_tbl else None),
        lyapunov_weight=(float(_number("trigger", trig_tbl, "lyapunov_weight"))
                         if "lyapunov_weight" in trig_tbl else None),
        monitor_init=float(_number("trigger", trig_tbl, "monitor_init", 1e-4)),
    )

    run_tbl = doc.get("run", {})
    mode = run_tbl.get("mode", "etc")
    if mode not in ("etc", "ctc", "open"):
        raise ConfigError(f"[run] mode must be etc, ctc or open, got {mode!r}")
    refine = run_tbl.get("event_refine", "none")
    if refine not in ("none", "bisect"):
        raise ConfigError(f"[run] event_refine must be none or bisect, got {refine!r}")
    diagnostics = run_tbl.get("diagnostics", False)
    if not isinstance(diagnostics, bool):
        raise ConfigError("[run] diagnostics must be a boolean")
    ic_kind = run_tbl.get("ic", "quartic_bump")
    stride = run_tbl.get("snapshot_stride", 100)
    if not isinstance(stride, int):
        raise ConfigError(f"[run] snapshot_stride must be an integer, got {stride!r}")
    try:
        ic = InitialCondition(
            kind=ic_kind,
            amplitude=float(_number("run", run_tbl, "ic_amplitude", 10.0)),
            center=float(_number("run", run_tbl, "ic_center", 0.5)),
            width=float(_number("run", run_tbl, "ic_width", 0.1)),
            mode=int(_number("run", run_tbl, "ic_mode", 1)),
        )
    except ValueError as exc:
        raise ConfigError(f"[run] {exc}") from exc

    return AppConfig(
        plant=plant,
        trigger=trigger,
        n_cells=n_cells,
        dt=dt,
        t_final=float(_number("run", run_tbl, "t_final", 3.0)),
        mode=mode,
        ic=ic,
        snapshot_stride=stride,
        event_refine=refine,
        diagnostics=diagnostics,
    )


def make_run_config(app: AppConfig, mode: str | None = None):
    """Synthesize trigger gains and assemble the simulation configuration.

    Returns (run_config, synthesis_report); the report is None in open-loop
    mode, where no feedback constants are needed.
    """
    mode = mode or app.mode
    if mode == "open":
        rc = RunConfig(
            plant=app.plant, trigger=None, mode="open", n_cells=app.n_cells,
            dt=app.dt, t_final=app.t_final, ic=app.ic,
            snapshot_stride=app.snapshot_stride, event_refine=app.event_refine,
            series=SeriesConfig(),
        )
        return rc, None
    ts = app.trigger
    report = synthesize(
        app.plant,
        threshold_ratio=ts.threshold_ratio,
        monitor_decay=ts.monitor_decay,
        slack_fraction=ts.slack_fraction,
        young_split=ts.young_split,
        lyapunov_weight=ts.lyapunov_weight,
    )
    try:
        params = TriggerParams.from_synthesis(report, monitor_init=ts.monitor_init)
    except ValueError as exc:
        raise ConfigError(f"[trigger] {exc}") from exc
    weight = report.lyapunov_weight if report.lyapunov_weight > 0.0 else None
    rc = RunConfig(
        plant=app.plant, trigger=params, mode=mode, n_cells=app.n_cells,
        dt=app.dt, t_final=app.t_final, ic=app.ic,
        snapshot_stride=app.snapshot_stride, event_refine=app.event_refine,
        lyapunov_weight=weight, series=SeriesConfig(),
    )
    return rc, report
