"""Method-of-lines plant for the controlled reaction-diffusion equation.

    u_t = eps u_xx + lambda(t) u          on x in (0, 1), t > 0
    u_x(0, t) = 0                         (insulated end)
    u_x(1, t) + q u(1, t) = U             (Robin actuation, U held over a step)

Spatial discretization is second-order central differencing on the uniform
node grid x_i = i h, with both boundary conditions folded in through ghost
nodes:

    u_{-1} = u_1                          from u_x(0) = 0,
    u_{N+1} = u_{N-1} + 2h (U - q u_N)    from the actuated end,

giving the boundary rows of the operator A(lambda):

    (A u)_0 = 2 eps (u_1 - u_0)/h^2 + lambda u_0
    (A u)_N = 2 eps (u_{N-1} - (1 + h q) u_N)/h^2 + lambda u_N   (+ 2 eps U / h)

Time stepping is Crank-Nicolson with the reaction coefficient evaluated at
the step midpoint, so the scheme is second order in both h and dt; each step
is one tridiagonal solve (scipy.linalg.solve_banded).

The optional ``forcing`` hook adds a source f(x, t) evaluated at the step
midpoint; it exists so manufactured-solution tests can drive the solver with
a known exact solution, and stays None in production use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .profiles import PlantConfig

__all__ = ["SpatialGrid", "PlantState", "l2_norm", "step"]


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform node grid on [0, 1] with n_cells intervals (n_cells + 1 nodes)."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 8:
            raise ValueError(f"n_cells must be at least 8, got {self.n_cells}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_cells + 1)


@dataclass
class PlantState:
    """Nodal values of u and the simulation clock."""

    u: np.ndarray
    t: float

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 1 or self.u.size < 9:
            raise ValueError("state vector must be 1-D with at least 9 nodes")


def l2_norm(u: np.ndarray, h: float) -> float:
    """Trapezoid-rule L2(0,1) norm of nodal values."""
    u = np.asarray(u, dtype=float)
    s = h * (np.dot(u, u) - 0.5 * (u[0] * u[0] + u[-1] * u[-1]))
    return float(np.sqrt(max(s, 0.0)))


def step(
    state: PlantState,
    dt: float,
    config: PlantConfig,
    U_held: float,
    forcing=None,
) -> PlantState:
    """Advance the plant one Crank-Nicolson step under a held boundary input.

    ``forcing``, if given, is called as forcing(nodes, t_mid) and added as a
    distributed source over the step.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    u = state.u
    n = u.size - 1
    h = 1.0 / n
    eps = config.epsilon
    q = config.q
    lam = config.profile.value(state.t + 0.5 * dt)
    r = eps / (h * h)

    # A(lambda) applied to the current state, stencil form
    au = np.empty_like(u)
    au[0] = 2.0 * r * (u[1] - u[0]) + lam * u[0]
    au[1:-1] = r * (u[:-2] - 2.0 * u[1:-1] + u[2:]) + lam * u[1:-1]
    au[-1] = 2.0 * r * (u[-2] - (1.0 + h * q) * u[-1]) + lam * u[-1]

    rhs = u + 0.5 * dt * au
    rhs[-1] += dt * 2.0 * eps * U_held / h
    if forcing is not None:
        rhs += dt * np.asarray(forcing(np.linspace(0.0, 1.0, n + 1), state.t + 0.5 * dt), dtype=float)

    # banded form of I - (dt/2) A(lambda)
    ab = np.zeros((3, n + 1))
    ab[0, 1:] = -0.5 * dt * r
    ab[0, 1] = -dt * r
    ab[1, :] = 1.0 + dt * r - 0.5 * dt * lam
    ab[1, -1] = 1.0 + dt * r * (1.0 + h * q) - 0.5 * dt * lam
    ab[2, :-1] = -0.5 * dt * r
    ab[2, -2] = -dt * r

    u_next = solve_banded((1, 1), ab, rhs, check_finite=False)
    if not np.all(np.isfinite(u_next)):
        raise FloatingPointError(f"plant state became non-finite at t={state.t + dt:.6g}")
    return PlantState(u=u_next, t=state.t + dt)
