"""Kernel certification: PDE residual decay and growth-cap audits."""

import math

import pytest

from etcpde.certify import (
    kernel_bound_caps,
    verify_kernel_bounds,
    verify_kernel_pde,
    verify_ladder_growth,
)
from etcpde.profiles import ConstantReaction, RationalDecayReaction, SinusoidReaction

BENCH = RationalDecayReaction(3.0)


def test_pde_residual_benchmark_profile():
    rep = verify_kernel_pde(BENCH, 1.0)
    assert rep.forward_residual < 1e-5
    assert rep.inverse_residual < 1e-5
    assert rep.second_order
    assert 3.0 <= rep.forward_ratio <= 5.0
    assert 3.0 <= rep.inverse_ratio <= 5.0


def test_pde_residual_constant_lambda():
    rep = verify_kernel_pde(ConstantReaction(1.0), 1.0)
    assert rep.forward_residual < 1e-6
    # time-invariant kernel: the t-probe contributes nothing, x/y probes still O(h^2)
    assert 3.0 <= rep.forward_ratio <= 5.0
    assert 3.0 <= rep.inverse_ratio <= 5.0


def test_pde_residual_zero_profile():
    rep = verify_kernel_pde(ConstantReaction(0.0), 1.0)
    assert rep.forward_residual == 0.0
    assert rep.inverse_residual == 0.0
    assert math.isnan(rep.forward_ratio)


def test_pde_boundary_identities():
    rep = verify_kernel_pde(BENCH, 1.0)
    assert rep.diagonal_mismatch < 1e-14
    assert rep.axis_slope < 1e-4  # one-sided O(h^2) stencil of an exactly flat slope


def test_ladder_growth_benchmark():
    check = verify_ladder_growth(BENCH, 1.0)
    assert check.ok
    assert check.observed <= 1.0 + 1e-9


def test_ladder_growth_flags_understated_constant():
    # claiming D=1 for lambda = 3/(1+t) violates the growth premise at n=0
    bad = RationalDecayReaction(3.0, gevrey_D=1.0)
    check = verify_ladder_growth(bad, 1.0)
    assert not check.ok


@pytest.mark.parametrize(
    "profile,epsilon",
    [(BENCH, 1.0), (ConstantReaction(2.0), 0.5), (SinusoidReaction(2.0, 3.0), 1.0)],
    ids=["benchmark", "constant", "sinusoid"],
)
def test_kernel_bounds_hold(profile, epsilon):
    rows = verify_kernel_bounds(profile, epsilon)
    assert len(rows) == 9
    bad = [r for r in rows if not r.ok]
    assert bad == []


def test_kernel_bounds_flag_understated_constant():
    rows = verify_kernel_bounds(RationalDecayReaction(3.0, gevrey_D=1.0), 1.0)
    assert any(not r.ok for r in rows)


def test_caps_table_values():
    caps = kernel_bound_caps(3.0, 1.0)
    E = math.exp(0.75)
    assert caps["K"] == pytest.approx(1.5 * E, rel=1e-15)
    assert caps["L"] == caps["K"]
    assert caps["K_t"] == pytest.approx(4.5 * 3.75 * E, rel=1e-15)
    assert caps["K_x"] == pytest.approx(1.5 * 2.5 * E, rel=1e-15)
    assert caps["K_y"] == pytest.approx(2.25 * E, rel=1e-15)
    assert caps["K_xyy"] == pytest.approx(2.25 * (1.0 + 1.5 + 2.25) * E, rel=1e-15)


def test_zero_profile_bounds_trivial():
    rows = verify_kernel_bounds(ConstantReaction(0.0), 1.0)
    for r in rows:
        assert r.observed == 0.0
        assert r.cap == 0.0
        assert r.ok
