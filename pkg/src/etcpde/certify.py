"""Certification checks for kernel fields.

Two families of evidence that the series evaluation is trustworthy:

* residual checks: finite-difference probes of the defining kernel PDEs

      K_t = eps (K_xx - K_yy) - lambda(t) K,
      L_t = eps (L_xx - L_yy) + lambda(t) L,

  on interior triangle samples, at probe step (h, dt) and refined (h/2, dt/2);
  a ratio near 4 certifies the expected second-order decay of the probe error
  (the kernels themselves are analytic, so the residual IS the probe error).

* growth caps: sup-norm audits of the analytic bounds on K and its first and
  mixed derivatives implied by the profile's derivative-growth constant D.
  These caps are exactly the quantities the trigger synthesis trusts, so a
  clean table here certifies the synthesized constants too.

Both kernels are even in y (they are power series in x^2 - y^2), which the
probes exploit: y-stencils at the axis reflect, and the axis slope check uses
a one-sided second-order stencil so that it is not trivially zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import SeriesConfig, kernel_K, kernel_K_t, kernel_K_x, kernel_L
from .profiles import ReactionProfile

__all__ = [
    "BoundCheck",
    "PdeResidualReport",
    "kernel_bound_caps",
    "verify_kernel_pde",
    "verify_ladder_growth",
    "verify_kernel_bounds",
]


@dataclass(frozen=True)
class BoundCheck:
    """One sup-norm audit row: observed max against its analytic cap."""

    name: str
    observed: float
    cap: float
    ok: bool

    @property
    def margin(self) -> float:
        return self.cap - self.observed


@dataclass(frozen=True)
class PdeResidualReport:
    """Finite-difference residuals of the kernel PDEs at two probe resolutions."""

    h: float
    dt: float
    forward_residual: float
    forward_residual_refined: float
    forward_ratio: float
    inverse_residual: float
    inverse_residual_refined: float
    inverse_ratio: float
    diagonal_mismatch: float
    axis_slope: float

    @property
    def second_order(self) -> bool:
        """Both refinement ratios in the [3, 5] window expected of O(h^2) probes."""
        return 3.0 <= self.forward_ratio <= 5.0 and 3.0 <= self.inverse_ratio <= 5.0


def _pde_residual(kernel, profile, epsilon, pts, h, dt, sign):
    """max |k_t - eps(k_xx - k_yy) - sign*lambda*k| over probe points."""
    worst = 0.0
    for x, y, t in pts:
        lam = profile.value(t)
        k0 = kernel(x, y, t)
        kt = (kernel(x, y, t + dt) - kernel(x, y, t - dt)) / (2.0 * dt)
        kxx = (kernel(x + h, y, t) - 2.0 * k0 + kernel(x - h, y, t)) / (h * h)
        # reflect across the axis: kernels are even in y
        kyy = (kernel(x, y + h, t) - 2.0 * k0 + kernel(x, abs(y - h), t)) / (h * h)
        res = kt - epsilon * (kxx - kyy) - sign * lam * k0
        worst = max(worst, abs(res))
    return worst


def _probe_points(h: float, t_samples) -> list[tuple[float, float, float]]:
    pts = []
    for t in t_samples:
        for x in (0.2, 0.45, 0.7, 0.9):
            for fy in (0.15, 0.5, 0.85):
                y = fy * x
                if 2.0 * h < x < 1.0 - 2.0 * h and y + 2.0 * h < x:
                    pts.append((x, y, t))
    return pts


def verify_kernel_pde(
    profile: ReactionProfile,
    epsilon: float,
    h: float = 1e-3,
    dt: float = 1e-3,
    cfg: SeriesConfig = SeriesConfig(),
    t_samples=(0.25, 1.0, 2.5),
) -> PdeResidualReport:
    """Residual-check both kernel PDEs at (h, dt) and (h/2, dt/2)."""
    t_samples = [max(float(t), dt) for t in t_samples]

    def K(x, y, t):
        return kernel_K(x, y, t, profile, epsilon, cfg)

    def L(x, y, t):
        return kernel_L(x, y, t, profile, epsilon, cfg)

    pts = _probe_points(h, t_samples)
    rK = _pde_residual(K, profile, epsilon, pts, h, dt, sign=-1.0)
    rK2 = _pde_residual(K, profile, epsilon, pts, h / 2.0, dt / 2.0, sign=-1.0)
    rL = _pde_residual(L, profile, epsilon, pts, h, dt, sign=+1.0)
    rL2 = _pde_residual(L, profile, epsilon, pts, h / 2.0, dt / 2.0, sign=+1.0)

    diag = max(
        abs(K(x, x, t) + profile.value(t) * x / (2.0 * epsilon))
        for t in t_samples
        for x in (0.0, 0.5, 1.0)
    )
    # one-sided O(h^2) stencil for K_y(x, 0, t), which must vanish
    axis = max(
        abs((-3.0 * K(x, 0.0, t) + 4.0 * K(x, h, t) - K(x, 2.0 * h, t)) / (2.0 * h))
        for t in t_samples
        for x in (0.4, 0.8)
    )

    def ratio(coarse, fine):
        return coarse / fine if fine > 0.0 else math.nan

    return PdeResidualReport(
        h=h,
        dt=dt,
        forward_residual=rK,
        forward_residual_refined=rK2,
        forward_ratio=ratio(rK, rK2),
        inverse_residual=rL,
        inverse_residual_refined=rL2,
        inverse_ratio=ratio(rL, rL2),
        diagonal_mismatch=diag,
        axis_slope=axis,
    )


def verify_ladder_growth(
    profile: ReactionProfile,
    epsilon: float,
    n_max: int = 12,
    t_samples=None,
) -> BoundCheck:
    """Audit |e^{-int lambda} F^(n)(t)| <= (n+1)! D^(n+1) / eps for n <= n_max.

    Reported as the worst observed/cap ratio against a cap of 1.
    """
    from .kernels import damped_f_derivatives

    if t_samples is None:
        t_samples = np.linspace(0.0, 3.0, 13)
    D = profile.gevrey_D
    worst = 0.0
    for t in t_samples:
        vals = damped_f_derivatives(profile, float(t), n_max, epsilon)
        for n, c in enumerate(vals):
            cap = math.factorial(n + 1) * D ** (n + 1) / epsilon
            ratio = abs(c) / cap if cap > 0.0 else (0.0 if c == 0.0 else math.inf)
            worst = max(worst, ratio)
    return BoundCheck(name="F_ladder_growth", observed=worst, cap=1.0, ok=worst <= 1.0 + 1e-9)


def kernel_bound_caps(D: float, epsilon: float) -> dict[str, float]:
    """Analytic sup-norm caps for the kernel and its derivatives on the triangle."""
    e = epsilon
    E = math.exp(D / (4.0 * e))
    half = D / (2.0 * e)
    quarter = D / (4.0 * e)
    return {
        "K": half * E,
        "K_t": (D * D / (2.0 * e)) * (3.0 + quarter) * E,
        "K_x": half * (1.0 + half) * E,
        "K_xt": (D * D / e) * (1.5 + 9.0 * D / (8.0 * e) + D * D / (16.0 * e * e)) * E,
        "K_y": (D * D / (4.0 * e * e)) * E,
        "K_xy": (D * D / (4.0 * e * e)) * (1.0 + half) * E,
        "K_yy": (D * D / (4.0 * e * e)) * (1.0 + half) * E,
        "K_xyy": (D * D / (4.0 * e * e)) * (1.0 + half + D * D / (4.0 * e * e)) * E,
        "L": half * E,
    }


def verify_kernel_bounds(
    profile: ReactionProfile,
    epsilon: float,
    cfg: SeriesConfig = SeriesConfig(),
    n_space: int = 16,
    t_samples=(0.0, 0.5, 1.5, 3.0),
    fd_h: float = 1e-3,
) -> list[BoundCheck]:
    """Sup-norm audit of every kernel growth cap over the sampled triangle.

    K, K_t, K_x and L come from their analytic series; the y- and mixed
    derivatives are probed by central differences of step fd_h (with even
    reflection at the axis), which is ample against caps that are O(1) slack.
    """
    caps = kernel_bound_caps(profile.gevrey_D, epsilon)
    h = fd_h

    def K(x, y, t):
        return kernel_K(x, min(abs(y), x), t, profile, epsilon, cfg)

    xs = np.linspace(0.0, 1.0, n_space + 1)
    observed = {name: 0.0 for name in caps}
    for t in t_samples:
        t = float(t)
        for x in xs:
            for y in xs[xs <= x]:
                observed["K"] = max(observed["K"], abs(kernel_K(x, y, t, profile, epsilon, cfg)))
                observed["K_t"] = max(observed["K_t"], abs(kernel_K_t(x, y, t, profile, epsilon, cfg)))
                observed["K_x"] = max(observed["K_x"], abs(kernel_K_x(x, y, t, profile, epsilon, cfg)))
                observed["L"] = max(observed["L"], abs(kernel_L(x, y, t, profile, epsilon, cfg)))
        # interior probes for FD rows: stencil must stay inside the triangle
        for x in xs:
            if not (2.0 * h < x < 1.0 - 2.0 * h):
                continue
            for y in xs[xs <= x]:
                if y + 2.0 * h >= x:
                    continue
                k_yp, k_ym = K(x, y + h, t), K(x, y - h, t)
                k_0 = K(x, y, t)
                observed["K_y"] = max(observed["K_y"], abs((k_yp - k_ym) / (2 * h)))
                kyy = (k_yp - 2.0 * k_0 + k_ym) / (h * h)
                observed["K_yy"] = max(observed["K_yy"], abs(kyy))
                kxy = (
                    K(x + h, y + h, t) - K(x + h, y - h, t) - K(x - h, y + h, t) + K(x - h, y - h, t)
                ) / (4.0 * h * h)
                observed["K_xy"] = max(observed["K_xy"], abs(kxy))
                kxyy = (
                    K(x + h, y + h, t)
                    - 2.0 * K(x + h, y, t)
                    + K(x + h, y - h, t)
                    - K(x - h, y + h, t)
                    + 2.0 * K(x - h, y, t)
                    - K(x - h, y - h, t)
                ) / (2.0 * h * h * h)
                observed["K_xyy"] = max(observed["K_xyy"], abs(kxyy))
                tt = max(t, h)
                kxt = (
                    kernel_K_x(x, y, tt + h, profile, epsilon, cfg)
                    - kernel_K_x(x, y, tt - h, profile, epsilon, cfg)
                ) / (2.0 * h)
                observed["K_xt"] = max(observed["K_xt"], abs(kxt))

    return [
        BoundCheck(name=name, observed=observed[name], cap=caps[name], ok=observed[name] <= caps[name])
        for name in caps
    ]
