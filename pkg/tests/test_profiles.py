"""Reaction-profile derivative ladders, integrals, and growth-constant checks."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from etcpde.profiles import (
    ConstantReaction,
    DerivativeOrderError,
    PlantConfig,
    RationalDecayReaction,
    SinusoidReaction,
    TabulatedReaction,
    check_assumption2,
    check_gevrey,
)

BUILTINS = [
    ConstantReaction(2.5),
    RationalDecayReaction(3.0),
    SinusoidReaction(2.0, 3.0),
]


def test_rational_decay_frozen_values():
    # lambda = 3/(1+t): lambda^(n)(0) = 3 (-1)^n n!
    p = RationalDecayReaction(3.0)
    assert p.value(0.0) == 3.0
    assert p.derivative(1, 0.0) == -3.0
    assert p.derivative(2, 0.0) == 6.0
    assert p.derivative(3, 0.0) == -18.0
    assert p.derivative(2, 1.0) == pytest.approx(6.0 / 8.0, rel=1e-15)


def test_sinusoid_frozen_values():
    p = SinusoidReaction(2.0, 3.0)
    # derivatives at 0 cycle through [0, A w, 0, -A w^3]
    assert p.derivative(0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert p.derivative(1, 0.0) == pytest.approx(6.0, rel=1e-14)
    assert p.derivative(2, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert p.derivative(3, 0.0) == pytest.approx(-54.0, rel=1e-14)


def test_constant_profile():
    p = ConstantReaction(4.0)
    assert p.value(7.3) == 4.0
    assert p.derivative(5, 1.0) == 0.0
    assert p.integral(2.0) == 8.0
    assert p.gevrey_D == 4.0


@pytest.mark.parametrize("profile", BUILTINS, ids=lambda p: p.kind)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("t", [0.0, 0.7, 2.3])
def test_derivative_matches_finite_difference(profile, n, t):
    h = 1e-5
    fd = (profile.derivative(n - 1, t + h) - profile.derivative(n - 1, t - h)) / (2 * h)
    exact = profile.derivative(n, t)
    assert fd == pytest.approx(exact, rel=1e-6, abs=1e-6)


@pytest.mark.parametrize("profile", BUILTINS, ids=lambda p: p.kind)
@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_integral_matches_quadrature(profile, t):
    ref, err = quad(profile.value, 0.0, t, epsabs=1e-13, epsrel=1e-13)
    assert profile.integral(t) == pytest.approx(ref, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("profile", BUILTINS, ids=lambda p: p.kind)
def test_negated_flips_everything(profile):
    neg = profile.negated()
    for t in (0.0, 1.1, 4.2):
        assert neg.value(t) == pytest.approx(-profile.value(t), abs=1e-15)
        assert neg.derivative(2, t) == pytest.approx(-profile.derivative(2, t), abs=1e-15)
        assert neg.integral(t) == pytest.approx(-profile.integral(t), abs=1e-15)
    assert neg.gevrey_D == profile.gevrey_D


def test_rational_decay_default_growth_constant():
    assert RationalDecayReaction(3.0).gevrey_D == 3.0
    assert RationalDecayReaction(0.5).gevrey_D == 1.0  # floor at 1 for the (1+t)^-(n+1) ladder


def test_gevrey_check_passes_for_valid_constant():
    rep = check_gevrey(RationalDecayReaction(3.0), n_max=8)
    assert rep.passed
    # worst case is n=0 at t=0: |lambda| = 3 = D exactly
    assert rep.max_ratio == pytest.approx(1.0, rel=1e-12)
    assert rep.worst_order == 0


def test_gevrey_check_fails_for_understated_constant():
    rep = check_gevrey(RationalDecayReaction(3.0, gevrey_D=2.0), n_max=4)
    assert not rep.passed
    assert rep.max_ratio > 1.0


def test_gevrey_check_zero_profile():
    rep = check_gevrey(ConstantReaction(0.0), n_max=4)
    assert rep.passed
    assert rep.max_ratio == 0.0


def test_tabulated_roundtrip_against_analytic():
    ref = RationalDecayReaction(3.0)
    ts = np.linspace(0.0, 5.0, 801)
    samples = np.array([[ref.derivative(n, t) for t in ts] for n in range(3)])
    tab = TabulatedReaction(ts, samples, gevrey_D=3.0)
    assert tab.max_order == 2
    assert tab.derivative(1, 1.7) == pytest.approx(ref.derivative(1, 1.7), rel=1e-8)
    assert tab.integral(4.0) == pytest.approx(ref.integral(4.0), rel=1e-8)
    neg = tab.negated()
    assert neg.value(2.0) == pytest.approx(-ref.value(2.0), rel=1e-8)


def test_tabulated_refuses_missing_orders():
    ts = np.linspace(0.0, 1.0, 11)
    tab = TabulatedReaction(ts, np.ones((2, 11)), gevrey_D=1.0)
    with pytest.raises(DerivativeOrderError):
        tab.derivative(2, 0.5)
    with pytest.raises(ValueError):
        tab.derivative(0, 3.0)  # outside the tabulated range


def test_negative_order_rejected():
    with pytest.raises(DerivativeOrderError):
        ConstantReaction(1.0).derivative(-1, 0.0)


def test_assumption2_margin():
    prof = RationalDecayReaction(3.0)  # D = 3
    assert check_assumption2(PlantConfig(epsilon=1.0, q=3.0, profile=prof))  # 3 > 2
    assert not check_assumption2(PlantConfig(epsilon=1.0, q=2.0, profile=prof))  # 2 > 2 fails
    assert check_assumption2(PlantConfig(epsilon=0.5, q=4.5, profile=prof))  # 4.5 > 3.5


def test_plant_config_validation():
    with pytest.raises(ValueError):
        PlantConfig(epsilon=0.0, q=3.0)
    with pytest.raises(ValueError):
        PlantConfig(epsilon=1.0, q=math.nan)
