"""Time-varying reaction coefficients and their derivative ladders.

The backstepping kernel series consumes high-order time derivatives of the
reaction coefficient lambda(t) together with its running integral
``int_0^t lambda(s) ds``.  Built-in profile kinds supply both analytically,
so the kernel layer never needs finite differencing in time.  Tabulated
profiles interpolate user samples and refuse to fabricate derivatives beyond
the stored order.

A profile also carries the Gevrey-type constant ``gevrey_D`` that bounds its
derivative growth, ``sup_t |lambda^(n)(t)| <= D^(n+1) n!``.  That constant
feeds every certification bound and the trigger synthesis chain, so
:func:`check_gevrey` exists to audit a claimed constant against samples.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DerivativeOrderError",
    "ReactionProfile",
    "ConstantReaction",
    "RationalDecayReaction",
    "SinusoidReaction",
    "TabulatedReaction",
    "GevreyReport",
    "check_gevrey",
    "PlantConfig",
    "check_assumption2",
]


class DerivativeOrderError(ValueError):
    """Raised when a profile is asked for a derivative order it cannot supply."""


class ReactionProfile(abc.ABC):
    """Interface for reaction coefficients lambda(t) on t >= 0."""

    #: short machine name used in config files and reports
    kind: str = "abstract"

    #: derivative-growth constant; None only while uninitialised
    gevrey_D: float

    #: highest derivative order available, or None for unlimited
    max_order: int | None = None

    def value(self, t: float) -> float:
        return self.derivative(0, t)

    @abc.abstractmethod
    def derivative(self, n: int, t: float) -> float:
        """n-th time derivative of lambda at time t (n=0 gives lambda itself)."""

    @abc.abstractmethod
    def integral(self, t: float) -> float:
        """Running integral int_0^t lambda(s) ds."""

    @abc.abstractmethod
    def negated(self) -> "ReactionProfile":
        """Profile for -lambda(t), used by the inverse-kernel route."""

    def _check_order(self, n: int) -> None:
        if n < 0 or int(n) != n:
            raise DerivativeOrderError(f"derivative order must be a nonnegative integer, got {n!r}")
        if self.max_order is not None and n > self.max_order:
            raise DerivativeOrderError(
                f"{self.kind} profile stores derivatives up to order {self.max_order}, "
                f"order {n} requested"
            )


@dataclass(frozen=True)
class ConstantReaction(ReactionProfile):
    """lambda(t) = lambda0."""

    lambda0: float
    gevrey_D: float = None  # type: ignore[assignment]
    kind = "constant"

    def __post_init__(self):
        if self.gevrey_D is None:
            object.__setattr__(self, "gevrey_D", abs(self.lambda0))
        if self.gevrey_D < 0:
            raise ValueError("gevrey_D must be nonnegative")

    def derivative(self, n: int, t: float) -> float:
        self._check_order(n)
        return self.lambda0 if n == 0 else 0.0

    def integral(self, t: float) -> float:
        return self.lambda0 * t

    def negated(self) -> "ConstantReaction":
        return ConstantReaction(-self.lambda0, self.gevrey_D)


@dataclass(frozen=True)
class RationalDecayReaction(ReactionProfile):
    """lambda(t) = a / (1 + t), the decaying-destabilisation benchmark."""

    a: float
    gevrey_D: float = None  # type: ignore[assignment]
    kind = "rational_decay"

    def __post_init__(self):
        # |lambda^(n)| = |a| n! (1+t)^(-n-1) <= max(|a|,1)^(n+1) n! on t >= 0
        if self.gevrey_D is None:
            object.__setattr__(self, "gevrey_D", max(abs(self.a), 1.0))
        if self.gevrey_D < 0:
            raise ValueError("gevrey_D must be nonnegative")

    def derivative(self, n: int, t: float) -> float:
        self._check_order(n)
        sign = -1.0 if n % 2 else 1.0
        return sign * self.a * math.factorial(n) / (1.0 + t) ** (n + 1)

    def integral(self, t: float) -> float:
        return self.a * math.log1p(t)

    def negated(self) -> "RationalDecayReaction":
        return RationalDecayReaction(-self.a, self.gevrey_D)


@dataclass(frozen=True)
class SinusoidReaction(ReactionProfile):
    """lambda(t) = A sin(omega t)."""

    amplitude: float
    omega: float
    gevrey_D: float = None  # type: ignore[assignment]
    kind = "sinusoid"

    def __post_init__(self):
        if self.omega == 0.0:
            raise ValueError("omega must be nonzero; use ConstantReaction for a flat profile")
        # |lambda^(n)| = |A| omega^n <= D^(n+1) n! whenever D >= max(|A|, omega)
        if self.gevrey_D is None:
            object.__setattr__(self, "gevrey_D", max(abs(self.amplitude), abs(self.omega)))
        if self.gevrey_D < 0:
            raise ValueError("gevrey_D must be nonnegative")

    def derivative(self, n: int, t: float) -> float:
        self._check_order(n)
        return self.amplitude * self.omega**n * math.sin(self.omega * t + 0.5 * n * math.pi)

    def integral(self, t: float) -> float:
        return self.amplitude * (1.0 - math.cos(self.omega * t)) / self.omega

    def negated(self) -> "SinusoidReaction":
        return SinusoidReaction(-self.amplitude, self.omega, self.gevrey_D)


class TabulatedReaction(ReactionProfile):
    """Profile built from sampled derivative values on a time grid.

    ``samples`` has shape (max_order + 1, len(times)); row n holds the n-th
    derivative of lambda at the sample times.  Evaluation interpolates each
    row with a cubic spline; asking for orders beyond the stored ladder is an
    error rather than an extrapolation.
    """

    kind = "tabulated"

    def __init__(self, times, samples, gevrey_D: float):
        from scipy.interpolate import CubicSpline

        times = np.asarray(times, dtype=float)
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        if times.ndim != 1 or times.size < 4:
            raise ValueError("need a 1-D time grid with at least 4 samples")
        if samples.shape[1] != times.size:
            raise ValueError("each derivative row must match the time grid length")
        if gevrey_D < 0:
            raise ValueError("gevrey_D must be nonnegative")
        self.times = times
        self.samples = samples
        self.gevrey_D = float(gevrey_D)
        self.max_order = samples.shape[0] - 1
        self._splines = [CubicSpline(times, row) for row in samples]
        self._antideriv = self._splines[0].antiderivative()

    def derivative(self, n: int, t: float) -> float:
        self._check_order(n)
        if not (self.times[0] <= t <= self.times[-1]):
            raise ValueError(f"t={t} outside tabulated range [{self.times[0]}, {self.times[-1]}]")
        return float(self._splines[n](t))

    def integral(self, t: float) -> float:
        if not (self.times[0] <= t <= self.times[-1]):
            raise ValueError(f"t={t} outside tabulated range [{self.times[0]}, {self.times[-1]}]")
        return float(self._antideriv(t) - self._antideriv(0.0))

    def negated(self) -> "TabulatedReaction":
        return TabulatedReaction(self.times, -self.samples, self.gevrey_D)


@dataclass(frozen=True)
class GevreyReport:
    """Outcome of auditing a profile's claimed derivative-growth constant."""

    gevrey_D: float
    n_max: int
    max_ratio: float
    worst_order: int
    worst_time: float
    passed: bool


def check_gevrey(profile: ReactionProfile, n_max: int = 8, t_samples=None) -> GevreyReport:
    """Check |lambda^(n)(t)| <= D^(n+1) n! on sample times for n = 0..n_max.

    ``max_ratio`` is the largest observed |lambda^(n)(t)| / (D^(n+1) n!);
    the check passes iff it never exceeds 1.
    """
    if t_samples is None:
        t_samples = np.linspace(0.0, 10.0, 101)
    D = profile.gevrey_D
    max_ratio = 0.0
    worst = (0, 0.0)
    for n in range(n_max + 1):
        cap = D ** (n + 1) * math.factorial(n)
        for t in np.asarray(t_samples, dtype=float):
            mag = abs(profile.derivative(n, t))
            ratio = mag / cap if cap > 0.0 else (0.0 if mag == 0.0 else math.inf)
            if ratio > max_ratio:
                max_ratio = ratio
                worst = (n, float(t))
    return GevreyReport(
        gevrey_D=D,
        n_max=n_max,
        max_ratio=max_ratio,
        worst_order=worst[0],
        worst_time=worst[1],
        passed=max_ratio <= 1.0,
    )


@dataclass(frozen=True)
class PlantConfig:
    """Diffusion coefficient, Robin parameter, and reaction profile of the plant."""

    epsilon: float
    q: float
    profile: ReactionProfile = field(default_factory=lambda: ConstantReaction(0.0))

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not math.isfinite(self.q):
            raise ValueError(f"q must be finite, got {self.q}")

    @property
    def assumption2_margin(self) -> float:
        """q - (D + epsilon)/(2 epsilon); positive iff the synthesis premise holds."""
        return self.q - (self.profile.gevrey_D + self.epsilon) / (2.0 * self.epsilon)


def check_assumption2(config: PlantConfig) -> bool:
    """True iff q > (D + epsilon) / (2 epsilon), strictly."""
    return config.assumption2_margin > 0.0
