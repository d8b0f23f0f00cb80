"""Trigger synthesis chain and monitor-ODE stepping."""

import math

import mpmath as mp
import numpy as np
import pytest

from etcpde.kernels import KernelField, build_gain
from etcpde.plant import PlantState, SpatialGrid
from etcpde.profiles import ConstantReaction, PlantConfig, RationalDecayReaction
from etcpde.trigger import (
    MonitorStepError,
    TriggerParams,
    advance_monitor,
    control_value,
    holding_deviation,
    should_fire,
    synthesize,
    update_m,
)


def bench_config():
    return PlantConfig(epsilon=1.0, q=3.0, profile=RationalDecayReaction(a=3.0))


def oracle_drift_coeffs(D, q, eps):
    """Independent 50-digit evaluation of the two drift-bound coefficients."""
    with mp.workdps(50):
        D, q, eps = mp.mpf(D), mp.mpf(q), mp.mpf(eps)
        E = mp.e ** (D / (4 * eps))
        shape = (1 + q + D / eps) ** 2
        a1 = (
            3 * D**4 / eps**2
            * (mp.mpf(9) / 4 + 9 * q / 4 + 4 * D / eps + 9 * D / (8 * eps)
               + D**2 / (4 * eps**2) + shape * E / 4) ** 2
            * E**2
        )
        a2 = mp.mpf(3) / 4 * D**2 * (q + D / (2 * eps)) ** 2 * shape * E**2
        return float(a1), float(a2)


class TestSynthesis:
    def test_bench_drift_coeffs_match_oracle(self):
        rep = synthesize(bench_config())
        a1, a2 = oracle_drift_coeffs(3.0, 3.0, 1.0)
        assert rep.drift_bulk_coeff == pytest.approx(a1, rel=1e-12)
        assert rep.drift_boundary_coeff == pytest.approx(a2, rel=1e-12)

    def test_bench_published_rounded_values(self):
        # five-significant-figure values from the worked example
        rep = synthesize(bench_config())
        assert rep.drift_bulk_coeff == pytest.approx(3.0084e6, rel=1e-3)
        assert rep.bulk_gain == pytest.approx(6.0167e6, rel=1e-3)

    def test_boundary_gain_is_twice_boundary_coeff(self):
        # threshold_ratio * (1 - slack_fraction) = 1/2 at the defaults, and
        # scaling by a power of two commutes with rounding
        rep = synthesize(bench_config())
        assert rep.boundary_gain / rep.drift_boundary_coeff == 2.0

    def test_deviation_gain_relation_exact(self):
        B = 8.4054e8
        rep = synthesize(bench_config(), young_split=2.0, lyapunov_weight=B)
        assert rep.deviation_gain == rep.lyapunov_weight * rep.young_split * 1.0 / 2.0
        assert rep.deviation_gain == B

    def test_published_weight_is_just_below_floor(self):
        # the rounded-down published weight misses the exact floor by ~0.1%;
        # report it as infeasible rather than fudging the inequality
        rep = synthesize(bench_config(), young_split=2.0, lyapunov_weight=8.4054e8)
        assert rep.weight_floor == pytest.approx(849368665.7575454, rel=1e-9)
        assert not rep.feasible
        assert -2.3e6 < rep.feasibility_margin < -2.1e6
        assert rep.boundary_margin == pytest.approx(630284932.19, rel=1e-6)
        assert rep.bulk_margin == pytest.approx(104023950.69, rel=1e-6)
        assert rep.decay_rate == pytest.approx(0.12375847751, rel=1e-9)

    def test_default_weight_is_feasible(self):
        rep = synthesize(bench_config())
        assert rep.feasible
        assert rep.feasibility_margin > 0.0
        assert rep.lyapunov_weight == pytest.approx(850218034.42, rel=1e-9)
        assert rep.boundary_margin > 0.0
        assert rep.bulk_margin > 0.0
        assert rep.decay_rate == pytest.approx(0.125195485, rel=1e-6)
        assert rep.decay_rate <= rep.monitor_decay / 2

    def test_bench_misc_constants(self):
        rep = synthesize(bench_config())
        assert rep.drift_self_coeff == pytest.approx(1482.31866, rel=1e-8)
        assert rep.young_split == 2.0
        assert rep.slack_fraction == 0.5

    def test_young_split_fallback_for_thin_margin(self):
        # s = q - D/(2 eps) - 1/2 = 0.2 < 1/4 forces the fallback 1/s = 5
        cfg = PlantConfig(epsilon=1.0, q=2.2, profile=RationalDecayReaction(a=3.0))
        rep = synthesize(cfg)
        assert rep.young_split == pytest.approx(5.0, rel=1e-12)
        assert rep.feasible

    def test_inadmissible_user_split_reported_infeasible(self):
        cfg = PlantConfig(epsilon=1.0, q=2.2, profile=RationalDecayReaction(a=3.0))
        rep = synthesize(cfg, young_split=2.0)  # needs 1/(2k) < 0.2, i.e. k > 2.5
        assert not rep.feasible
        assert rep.feasibility_margin < 0.0

    def test_infeasible_for_every_split_when_margin_zero(self):
        cfg = PlantConfig(epsilon=1.0, q=2.0, profile=RationalDecayReaction(a=3.0))
        rep = synthesize(cfg)
        assert not rep.feasible
        assert math.isinf(rep.weight_floor)

    def test_zero_profile_degenerates_cleanly(self):
        cfg = PlantConfig(epsilon=1.0, q=3.0, profile=ConstantReaction(lambda0=0.0))
        rep = synthesize(cfg)
        assert rep.drift_bulk_coeff == 0.0
        assert rep.boundary_gain == 0.0
        assert rep.weight_floor == 0.0
        assert rep.lyapunov_weight == 1.0
        assert rep.feasible
        assert rep.decay_rate == pytest.approx(0.25)

    def test_parameter_validation(self):
        cfg = bench_config()
        with pytest.raises(ValueError):
            synthesize(cfg, threshold_ratio=0.0)
        with pytest.raises(ValueError):
            synthesize(cfg, slack_fraction=1.0)
        with pytest.raises(ValueError):
            synthesize(cfg, young_split=-2.0)
        with pytest.raises(ValueError):
            synthesize(cfg, lyapunov_weight=0.0)

    def test_from_synthesis_copies_gains(self):
        rep = synthesize(bench_config())
        params = TriggerParams.from_synthesis(rep, monitor_init=1e-4)
        assert params.bulk_gain == rep.bulk_gain
        assert params.boundary_gain == rep.boundary_gain
        assert params.deviation_gain == rep.deviation_gain
        assert params.threshold_ratio == rep.threshold_ratio
        assert params.monitor_decay == rep.monitor_decay
        assert params.monitor_init == 1e-4


def flat_field(n, gain_value, t=0.0):
    y = np.linspace(0.0, 1.0, n)
    g = np.full(n, gain_value)
    return KernelField(t=t, y_grid=y, K1=g * 0.0, K1x=g * 0.0, gain=g, r=0.0)


class TestControlValue:
    def test_linear_state_unit_gain(self):
        n = 101
        state = PlantState(u=np.linspace(0.0, 1.0, n), t=0.0)
        assert control_value(state, flat_field(n, 1.0)) == pytest.approx(0.5, rel=1e-14)

    def test_zero_gain_gives_zero(self):
        cfg = PlantConfig(epsilon=1.0, q=3.0, profile=ConstantReaction(lambda0=0.0))
        grid = SpatialGrid(n_cells=50)
        field = build_gain(0.0, grid.nodes, cfg)
        state = PlantState(u=np.sin(grid.nodes), t=0.0)
        assert control_value(state, field) == 0.0

    def test_grid_mismatch_rejected(self):
        state = PlantState(u=np.zeros(64), t=0.0)
        with pytest.raises(ValueError, match="nodes"):
            control_value(state, flat_field(65, 1.0))

    def test_time_mismatch_rejected(self):
        state = PlantState(u=np.zeros(65), t=1.0)
        with pytest.raises(ValueError, match="frozen"):
            control_value(state, flat_field(65, 1.0, t=0.5))

    def test_holding_deviation_vanishes_when_held_is_fresh(self):
        n = 101
        state = PlantState(u=np.cos(np.linspace(0.0, 1.0, n)), t=0.0)
        field = flat_field(n, 2.0)
        held = control_value(state, field)
        assert holding_deviation(state, field, held) == 0.0


class TestMonitorStep:
    def test_pure_decay_matches_exponential(self):
        params = TriggerParams(
            threshold_ratio=1.0, monitor_decay=1.0, deviation_gain=1.0,
            bulk_gain=1.0, boundary_gain=1.0,
        )
        m = update_m(0.25, 0.0, 0.0, 0.0, 1e-3, params)
        assert m == pytest.approx(0.25 * math.exp(-1e-3), rel=1e-12)

    def test_equilibrium_is_fixed_point(self):
        params = TriggerParams(
            threshold_ratio=1.0, monitor_decay=2.0, deviation_gain=0.0,
            bulk_gain=1.5, boundary_gain=0.0,
        )
        # forcing c = 1.5 * 2^2 = 6, equilibrium c/eta = 3: every RK4 stage is 0
        assert update_m(3.0, 0.0, 2.0, 0.0, 1e-2, params) == 3.0

    def test_deviation_term_reduces_m(self):
        params = TriggerParams(
            threshold_ratio=1.0, monitor_decay=1.0, deviation_gain=10.0,
            bulk_gain=0.0, boundary_gain=0.0,
        )
        quiet = advance_monitor(1.0, 0.0, 0.0, 0.0, 1e-2, params)
        loud = advance_monitor(1.0, 0.5, 0.0, 0.0, 1e-2, params)
        assert loud < quiet

    def test_crossing_zero_raises(self):
        params = TriggerParams(
            threshold_ratio=1.0, monitor_decay=1.0, deviation_gain=1e9,
            bulk_gain=0.0, boundary_gain=0.0,
        )
        with pytest.raises(MonitorStepError):
            update_m(1e-4, 1.0, 0.0, 0.0, 1e-3, params)

    def test_firing_is_strict(self):
        params = TriggerParams(
            threshold_ratio=1.0, monitor_decay=1.0, deviation_gain=1.0,
            bulk_gain=1.0, boundary_gain=1.0,
        )
        assert not should_fire(1.0, 1.0, params)
        assert should_fire(1.0 + 1e-9, 1.0, params)
        assert not should_fire(0.0, 1e-300, params)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            TriggerParams(threshold_ratio=0.0, monitor_decay=1.0, deviation_gain=1.0,
                          bulk_gain=1.0, boundary_gain=1.0)
        with pytest.raises(ValueError):
            TriggerParams(threshold_ratio=1.0, monitor_decay=1.0, deviation_gain=-1.0,
                          bulk_gain=1.0, boundary_gain=1.0)
        with pytest.raises(ValueError):
            TriggerParams(threshold_ratio=1.0, monitor_decay=1.0, deviation_gain=1.0,
                          bulk_gain=1.0, boundary_gain=1.0, monitor_init=0.0)
