"""Event-triggered backstepping boundary control of a reaction-diffusion PDE.

Library layout:

    profiles     time-varying reaction coefficients and the plant constants
    kernels      series evaluation of the gain and inverse Volterra kernels
    certify      residual, growth and amplitude checks for the kernels
    plant        Crank-Nicolson integrator for the controlled PDE
    transform    discrete Volterra transform to/from the target system
    trigger      gain synthesis chain and the event monitor dynamics
    closed_loop  sampled-feedback simulation driver and diagnostics
    config       TOML run configuration
    report       CSV/JSON/figure emission
    cli          command-line front end (synth/simulate/verify/compare)
"""

from .closed_loop import (
    InitialCondition,
    RunConfig,
    Trace,
    fitted_decay_rate,
    lyapunov_series,
    min_dwell,
    run,
    summarize,
)
from .config import AppConfig, ConfigError, load_config, make_run_config
from .kernels import (
    KernelField,
    SeriesConfig,
    SeriesConvergenceError,
    build_gain,
    kernel_K,
    kernel_K_t,
    kernel_K_x,
    kernel_L,
)
from .plant import PlantState, SpatialGrid, l2_norm, step
from .profiles import (
    ConstantReaction,
    PlantConfig,
    RationalDecayReaction,
    ReactionProfile,
    SinusoidReaction,
    TabulatedReaction,
    check_assumption2,
    check_gevrey,
)
from .transform import TargetState, TransformOperator, norm_equivalence_factor, target_residuals
from .trigger import (
    MonitorStepError,
    SynthesisReport,
    TriggerParams,
    control_value,
    holding_deviation,
    should_fire,
    synthesize,
    update_m,
)

__version__ = "0.1.0"

__all__ = [
    "AppConfig",
    "ConfigError",
    "ConstantReaction",
    "InitialCondition",
    "KernelField",
    "MonitorStepError",
    "PlantConfig",
    "PlantState",
    "RationalDecayReaction",
    "ReactionProfile",
    "RunConfig",
    "SeriesConfig",
    "SeriesConvergenceError",
    "SinusoidReaction",
    "SpatialGrid",
    "SynthesisReport",
    "TabulatedReaction",
    "TargetState",
    "Trace",
    "TransformOperator",
    "TriggerParams",
    "build_gain",
    "check_assumption2",
    "check_gevrey",
    "control_value",
    "fitted_decay_rate",
    "holding_deviation",
    "kernel_K",
    "kernel_K_t",
    "kernel_K_x",
    "kernel_L",
    "l2_norm",
    "load_config",
    "lyapunov_series",
    "make_run_config",
    "min_dwell",
    "norm_equivalence_factor",
    "run",
    "should_fire",
    "step",
    "summarize",
    "synthesize",
    "target_residuals",
    "update_m",
    "__version__",
]
