"""Crank-Nicolson plant: conservation, dissipation, eigen-decay, solver order."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from etcpde.plant import PlantState, SpatialGrid, l2_norm, step
from etcpde.profiles import ConstantReaction, PlantConfig, RationalDecayReaction

BENCH = PlantConfig(epsilon=1.0, q=3.0, profile=RationalDecayReaction(3.0))
HEAT = PlantConfig(epsilon=1.0, q=3.0, profile=ConstantReaction(0.0))


def run_plant(config, u0, dt, n_steps, U=0.0, forcing=None):
    state = PlantState(u=u0, t=0.0)
    for _ in range(n_steps):
        state = step(state, dt, config, U, forcing=forcing)
    return state


def slowest_robin_rate(q: float, epsilon: float) -> float:
    """Decay rate eps mu^2 of the slowest mode, mu solving mu tan(mu) = q."""
    mu = brentq(lambda m: m * math.tan(m) - q, 1e-9, math.pi / 2 - 1e-9)
    return epsilon * mu * mu


def test_l2_norm_frozen_values():
    g = SpatialGrid(200)
    assert l2_norm(np.ones(201), g.h) == pytest.approx(1.0, rel=1e-14)
    assert l2_norm(g.nodes, g.h) == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-4)
    bump = 10.0 * g.nodes**2 * (g.nodes - 1.0) ** 2
    assert l2_norm(bump, g.h) == pytest.approx(10.0 / math.sqrt(630.0), rel=1e-4)


def test_zero_state_stays_zero():
    g = SpatialGrid(50)
    final = run_plant(BENCH, np.zeros(51), 1e-3, 100)
    assert np.all(final.u == 0.0)
    assert final.t == pytest.approx(0.1, rel=1e-12)


def test_heat_equation_norm_nonincreasing():
    g = SpatialGrid(100)
    state = PlantState(u=10.0 * g.nodes**2 * (g.nodes - 1.0) ** 2, t=0.0)
    prev = l2_norm(state.u, g.h)
    for _ in range(200):
        state = step(state, 1e-3, HEAT, 0.0)
        cur = l2_norm(state.u, g.h)
        assert cur <= prev * (1.0 + 1e-14)
        prev = cur


def test_eigenmode_decay_rate():
    # IC on the slowest Robin eigenmode cos(mu x): ||u|| ~ e^{-eps mu^2 t}
    g = SpatialGrid(100)
    rate_ref = slowest_robin_rate(3.0, 1.0)
    mu = math.sqrt(rate_ref)
    state = PlantState(u=np.cos(mu * g.nodes), t=0.0)
    dt, n_steps = 1e-4, 5000
    norms, times = [], []
    for k in range(n_steps):
        state = step(state, dt, HEAT, 0.0)
        if k % 50 == 0 and state.t > 0.1:
            norms.append(math.log(l2_norm(state.u, g.h)))
            times.append(state.t)
    slope = np.polyfit(times, norms, 1)[0]
    assert -slope == pytest.approx(rate_ref, rel=2e-3)


def test_constant_input_steady_state():
    # lambda = 0, U = 1: the discrete steady state is u = U/q exactly, and the
    # slowest transient decays like e^{-eps mu^2 t}, ~1e-5 by t = 8
    final = run_plant(HEAT, np.zeros(51), 1e-3, 8000, U=1.0)
    assert final.u == pytest.approx(np.full(51, 1.0 / 3.0), abs=2e-5)


def manufactured_error(n_cells: int, T: float = 0.25, n_steps: int = 4000) -> float:
    """Error against u* = e^{-t} cos(pi x) driven by its exact source and input."""
    g = SpatialGrid(n_cells)
    lam = BENCH.profile.value
    dt = T / n_steps

    def forcing(x, t):
        return (-1.0 + math.pi**2 - lam(t)) * math.exp(-t) * np.cos(math.pi * x)

    state = PlantState(u=np.cos(math.pi * g.nodes), t=0.0)
    for _ in range(n_steps):
        U_mid = -BENCH.q * math.exp(-(state.t + 0.5 * dt))
        state = step(state, dt, BENCH, U_mid, forcing=forcing)
    exact = math.exp(-T) * np.cos(math.pi * g.nodes)
    return l2_norm(state.u - exact, g.h)


def test_manufactured_solution_spatial_order():
    e1 = manufactured_error(40)
    e2 = manufactured_error(80)
    assert 3.5 <= e1 / e2 <= 4.5


def test_boundary_residuals_shrink_at_second_order():
    # one-sided O(h^2) stencils of both boundary conditions along a driven run
    def residuals(n_cells):
        g = SpatialGrid(n_cells)
        h = g.h
        # the quartic bump is exactly compatible with U = 0 at both ends, so the
        # probe sees pure discretization error, not an incompatibility transient
        state = PlantState(u=10.0 * g.nodes**2 * (g.nodes - 1.0) ** 2, t=0.0)
        U = 0.0
        worst0 = worst1 = 0.0
        for k in range(200):
            state = step(state, 5e-4, BENCH, U)
            if k < 100:
                continue
            u = state.u
            left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2 * h)
            right = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2 * h) + BENCH.q * u[-1] - U
            worst0 = max(worst0, abs(left))
            worst1 = max(worst1, abs(right))
        return worst0, worst1

    a0, a1 = residuals(50)
    b0, b1 = residuals(100)
    assert 3.0 <= a1 / b1 <= 5.0  # actuated end: clean O(h^2)
    assert b0 < a0 and b0 < 1e-3  # insulated end superconverges (odd derivatives vanish)
    assert b1 < 1e-3


def test_grid_validation():
    with pytest.raises(ValueError):
        SpatialGrid(4)
    with pytest.raises(ValueError):
        step(PlantState(u=np.zeros(51), t=0.0), -1e-3, HEAT, 0.0)


def test_nonfinite_state_detected():
    state = PlantState(u=np.ones(51), t=0.0)
    with pytest.raises(FloatingPointError):
        step(state, 1e-3, HEAT, math.nan)
