"""Backstepping kernel evaluation for the time-varying reaction coefficient.

The gain kernel K(x, y, t) and its inverse L(x, y, t) have power-series
representations in z = (x^2 - y^2)/(4 eps) whose coefficients are the time
derivatives of

    F(t) = (lambda(t)/eps) e^{+int_0^t lambda},
    G(t) = -(lambda(t)/eps) e^{-int_0^t lambda},

weighted by 1/(n! (n+1)!).  Forming F^(n) or G^(n) directly overflows for
large running integrals, so everything here works with the damped sequences

    c_n = e^{-int lambda} F^(n)(t),      g_n = e^{+int lambda} G^(n)(t),

which obey exponential-free recurrences driven only by the profile's
derivative ladder:

    c_0 = lambda/eps,   c_n = lambda^(n)/eps + sum_{m=1..n} C(n,m) lambda^(n-m) c_{m-1},
    g_0 = -lambda/eps,  g_n = -lambda^(n)/eps - sum_{m=1..n} C(n,m) lambda^(n-m) g_{m-1}.

The damping cancels exactly against the exponential prefactors of the kernel
series, so K, K_x, K_t and L are evaluated without ever forming
e^{+-int lambda}.  The inverse kernel keeps its own ladder and series rather
than going through L(lambda) = -K(-lambda); that symmetry is exercised as a
test instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import PlantConfig, ReactionProfile

__all__ = [
    "SeriesConfig",
    "SeriesConvergenceError",
    "KernelField",
    "damped_f_derivatives",
    "damped_g_derivatives",
    "f_derivatives",
    "g_derivatives",
    "kernel_K",
    "kernel_L",
    "kernel_K_x",
    "kernel_K_t",
    "forward_series",
    "forward_series_xderiv",
    "forward_series_tshift",
    "inverse_series",
    "build_gain",
]


class SeriesConvergenceError(RuntimeError):
    """The kernel series did not meet its tolerance within max_terms."""


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy for the kernel power series.

    A term is accepted and the sum closed once the latest term's magnitude
    drops to rel_tol times the partial sum's magnitude (sup-norm over the
    evaluation points).  Exceeding max_terms without meeting the tolerance
    raises SeriesConvergenceError.
    """

    rel_tol: float = 1e-14
    max_terms: int = 40

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-6:
            raise ValueError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 4:
            raise ValueError(f"max_terms must be at least 4, got {self.max_terms}")


class _ForwardLadder:
    """Damped derivatives c_n = e^{-int lambda} F^(n)(t), extended on demand."""

    def __init__(self, profile: ReactionProfile, t: float, epsilon: float):
        self._profile = profile
        self._t = t
        self._eps = epsilon
        self._lam: list[float] = []
        self._c: list[float] = []

    def coeff(self, n: int) -> float:
        while len(self._c) <= n:
            k = len(self._c)
            self._lam.append(self._profile.derivative(k, self._t))
            s = self._lam[k] / self._eps
            for m in range(1, k + 1):
                s += math.comb(k, m) * self._lam[k - m] * self._c[m - 1]
            self._c.append(s)
        return self._c[n]


class _InverseLadder:
    """Damped derivatives g_n = e^{+int lambda} G^(n)(t), extended on demand."""

    def __init__(self, profile: ReactionProfile, t: float, epsilon: float):
        self._profile = profile
        self._t = t
        self._eps = epsilon
        self._lam: list[float] = []
        self._g: list[float] = []

    def coeff(self, n: int) -> float:
        while len(self._g) <= n:
            k = len(self._g)
            self._lam.append(self._profile.derivative(k, self._t))
            s = -self._lam[k] / self._eps
            for m in range(1, k + 1):
                s -= math.comb(k, m) * self._lam[k - m] * self._g[m - 1]
            self._g.append(s)
        return self._g[n]


def _sum_series(ladder, z, cfg: SeriesConfig, coeff_offset: int = 0, fact_extra: int = 0):
    """sum_k ladder.coeff(k + coeff_offset) z^k / (k! (k + 1 + fact_extra)!).

    coeff_offset/fact_extra select the plain kernel series (0, 0), its
    x-derivative reindexing (1, 1) and its t-derivative shift (1, 0).
    """
    z = np.asarray(z, dtype=float)
    total = np.zeros(z.shape)
    zpow = np.ones(z.shape)
    quiet = 0
    for k in range(cfg.max_terms):
        if k > 0:
            zpow = zpow * z
        w = ladder.coeff(k + coeff_offset) / (math.factorial(k) * math.factorial(k + 1 + fact_extra))
        term = w * zpow
        total = total + term
        # two consecutive negligible terms close the sum; a single one is not
        # trusted because ladders can interleave exact zeros (e.g. sinusoids
        # sampled at their nodes) with large follow-on coefficients
        if np.max(np.abs(term)) <= cfg.rel_tol * np.max(np.abs(total)):
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
    raise SeriesConvergenceError(
        f"kernel series not converged after {cfg.max_terms} terms (rel_tol={cfg.rel_tol})"
    )


def damped_f_derivatives(profile: ReactionProfile, t: float, n_max: int, epsilon: float) -> np.ndarray:
    """Damped ladder [c_0, ..., c_n_max] with c_n = e^{-int lambda} F^(n)(t)."""
    ladder = _ForwardLadder(profile, t, epsilon)
    return np.array([ladder.coeff(n) for n in range(n_max + 1)])


def damped_g_derivatives(profile: ReactionProfile, t: float, n_max: int, epsilon: float) -> np.ndarray:
    """Damped ladder [g_0, ..., g_n_max] with g_n = e^{+int lambda} G^(n)(t)."""
    ladder = _InverseLadder(profile, t, epsilon)
    return np.array([ladder.coeff(n) for n in range(n_max + 1)])


def f_derivatives(profile: ReactionProfile, t: float, n_max: int, epsilon: float) -> np.ndarray:
    """[F(t), F'(t), ..., F^(n_max)(t)].

    Undamped values; these can overflow for large int_0^t lambda, in which
    case work with damped_f_derivatives instead.
    """
    return damped_f_derivatives(profile, t, n_max, epsilon) * math.exp(profile.integral(t))


def g_derivatives(profile: ReactionProfile, t: float, n_max: int, epsilon: float) -> np.ndarray:
    """[G(t), G'(t), ..., G^(n_max)(t)] (undamped; see f_derivatives)."""
    return damped_g_derivatives(profile, t, n_max, epsilon) * math.exp(-profile.integral(t))


def _check_domain(x: float, y: float, t: float) -> None:
    if not (0.0 <= y <= x <= 1.0):
        raise ValueError(f"kernel domain requires 0 <= y <= x <= 1, got x={x}, y={y}")
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")


def forward_series(profile, t, epsilon, z, cfg: SeriesConfig):
    """Plain forward series S(z) = sum c_n z^n / (n! (n+1)!); K = -(x/2) S."""
    return _sum_series(_ForwardLadder(profile, t, epsilon), z, cfg)


def forward_series_xderiv(profile, t, epsilon, z, cfg: SeriesConfig):
    """S'(z) = sum_{n>=1} c_n z^{n-1} / ((n-1)! (n+1)!)."""
    return _sum_series(_ForwardLadder(profile, t, epsilon), z, cfg, coeff_offset=1, fact_extra=1)


def forward_series_tshift(profile, t, epsilon, z, cfg: SeriesConfig):
    """sum c_{n+1} z^n / (n! (n+1)!), the damped time-shifted series."""
    return _sum_series(_ForwardLadder(profile, t, epsilon), z, cfg, coeff_offset=1)


def inverse_series(profile, t, epsilon, z, cfg: SeriesConfig):
    """Inverse-kernel series T(z) = sum g_n z^n / (n! (n+1)!); L = +(x/2) T."""
    return _sum_series(_InverseLadder(profile, t, epsilon), z, cfg)


def kernel_K(x, y, t, profile: ReactionProfile, epsilon: float, cfg: SeriesConfig = SeriesConfig()) -> float:
    """Gain kernel K(x, y, t) on the triangle 0 <= y <= x <= 1."""
    _check_domain(x, y, t)
    z = (x * x - y * y) / (4.0 * epsilon)
    return float(-(x / 2.0) * forward_series(profile, t, epsilon, z, cfg))


def kernel_L(x, y, t, profile: ReactionProfile, epsilon: float, cfg: SeriesConfig = SeriesConfig()) -> float:
    """Inverse kernel L(x, y, t) on the triangle 0 <= y <= x <= 1."""
    _check_domain(x, y, t)
    z = (x * x - y * y) / (4.0 * epsilon)
    return float((x / 2.0) * inverse_series(profile, t, epsilon, z, cfg))


def kernel_K_x(x, y, t, profile: ReactionProfile, epsilon: float, cfg: SeriesConfig = SeriesConfig()) -> float:
    """Analytic partial derivative of K in its first argument."""
    _check_domain(x, y, t)
    z = (x * x - y * y) / (4.0 * epsilon)
    s = forward_series(profile, t, epsilon, z, cfg)
    sp = forward_series_xderiv(profile, t, epsilon, z, cfg)
    return float(-0.5 * s - (x * x / (4.0 * epsilon)) * sp)


def kernel_K_t(x, y, t, profile: ReactionProfile, epsilon: float, cfg: SeriesConfig = SeriesConfig()) -> float:
    """Analytic partial derivative of K in time."""
    _check_domain(x, y, t)
    z = (x * x - y * y) / (4.0 * epsilon)
    s = forward_series(profile, t, epsilon, z, cfg)
    shift = forward_series_tshift(profile, t, epsilon, z, cfg)
    lam = profile.value(t)
    # K_t = -lambda K - (x/2) sum c_{n+1} z^n/(n!(n+1)!), with K = -(x/2) S
    return float(lam * (x / 2.0) * s - (x / 2.0) * shift)


@dataclass(frozen=True)
class KernelField:
    """Boundary traces of the gain kernel frozen at one instant.

    gain(y) = r(t) K(1, y, t) + K_x(1, y, t) is the integrand of the
    backstepping feedback; r(t) = q - lambda(t)/(2 eps) is the Robin
    coefficient of the target system at the same instant.
    """

    t: float
    y_grid: np.ndarray
    K1: np.ndarray
    K1x: np.ndarray
    gain: np.ndarray
    r: float


def build_gain(t: float, y_grid, config: PlantConfig, cfg: SeriesConfig = SeriesConfig()) -> KernelField:
    """Evaluate K(1, y, t), K_x(1, y, t) and the feedback integrand on y_grid."""
    y = np.asarray(y_grid, dtype=float)
    if y.ndim != 1 or y.size < 2 or y[0] < 0.0 or y[-1] > 1.0 or np.any(np.diff(y) <= 0):
        raise ValueError("y_grid must be increasing within [0, 1]")
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    eps = config.epsilon
    z = (1.0 - y * y) / (4.0 * eps)
    s = forward_series(config.profile, t, eps, z, cfg)
    sp = forward_series_xderiv(config.profile, t, eps, z, cfg)
    K1 = -0.5 * s
    K1x = -0.5 * s - sp / (4.0 * eps)
    r = config.q - config.profile.value(t) / (2.0 * eps)
    gain = r * K1 + K1x
    return KernelField(t=t, y_grid=y, K1=K1, K1x=K1x, gain=gain, r=r)
