"""Closed-form half-integer Bessel functions against the power-series oracle."""

import math

import numpy as np
import pytest

from bessel_trace.errors import DomainError, NumericError, UnsupportedOrderError
from bessel_trace.special import KernelPoint, bessel_half, bessel_series, heat_kernel

# Frozen oracle values, computed from bessel_series at tol=1e-12 (I kinds)
# and from the Wronskian identity K_{1/2} = 1/(x (I_{1/2} K32/K12 ... )) --
# in practice sqrt(pi/2x) e^{-x} cross-checked against the series-backed
# Wronskian below.
I_HALF_1 = 0.9376748882454876
K_HALF_1 = 0.4610685044478946
I_32_1 = 0.2935253263474798
HK_111 = 0.1724756569441223


def test_closed_form_spot_values():
    assert bessel_half("I", 0.5, 1.0) == pytest.approx(I_HALF_1, abs=1e-6)
    assert bessel_half("K", 0.5, 1.0) == pytest.approx(K_HALF_1, abs=1e-6)
    assert bessel_half("I", 1.5, 1.0) == pytest.approx(I_32_1, abs=1e-6)


def test_series_tracks_closed_form_both_orders():
    for x in np.logspace(-3, math.log10(30.0), 60):
        for order in (0.5, 1.5):
            series = bessel_series(order, float(x), 1e-12)
            closed = bessel_half("I", order, float(x))
            assert abs(closed - series) <= 1e-10 * series


def test_series_small_argument_leading_term():
    # I_{1/2}(x) ~ (x/2)^{1/2} / Gamma(3/2) as x -> 0+
    for x in (1e-6, 1e-8):
        lead = math.sqrt(x / 2.0) / math.gamma(1.5)
        assert bessel_series(0.5, x, 1e-12) == pytest.approx(lead, rel=1e-6)


def test_series_agrees_with_itself_at_3half_2():
    assert bessel_series(1.5, 2.0, 1e-12) == pytest.approx(
        bessel_half("I", 1.5, 2.0), rel=1e-10
    )


def test_wronskian_identity():
    # I_{1/2} K_{3/2} + I_{3/2} K_{1/2} = 1/x
    x = np.linspace(0.1, 50.0, 2000)
    w = bessel_half("I", 0.5, x) * bessel_half("K", 1.5, x) + bessel_half(
        "I", 1.5, x
    ) * bessel_half("K", 0.5, x)
    assert np.max(np.abs(w * x - 1.0)) <= 1e-12


def test_k_half_fixed_by_wronskian_and_series():
    # Solve the Wronskian for K_{1/2} using series-computed I values only.
    x = 1.0
    i12 = bessel_series(0.5, x, 1e-14)
    i32 = bessel_series(1.5, x, 1e-14)
    k32_over_k12 = 1.0 + 1.0 / x  # elementary ratio, no exponential factor
    k12 = (1.0 / x) / (i12 * k32_over_k12 + i32)
    assert bessel_half("K", 0.5, x) == pytest.approx(k12, abs=1e-6)


def test_scaled_consistency():
    x = np.logspace(-3, math.log10(700.0), 400)
    for order in (0.5, 1.5):
        i_plain = bessel_half("I", order, x)
        i_scaled = bessel_half("I", order, x, scaled=True) * np.exp(x)
        assert np.max(np.abs(i_plain / i_scaled - 1.0)) <= 1e-12
        k_plain = bessel_half("K", order, x)
        k_scaled = bessel_half("K", order, x, scaled=True) * np.exp(-x)
        assert np.max(np.abs(k_plain / k_scaled - 1.0)) <= 1e-12


def test_scaled_variant_finite_beyond_overflow():
    with np.errstate(over="ignore"):
        assert math.isinf(np.sinh(800.0))  # the unscaled route would overflow here
    for order in (0.5, 1.5):
        v = bessel_half("I", order, 800.0, scaled=True)
        assert math.isfinite(v) and v > 0


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_half("I", 0.5, -1.0)
    with pytest.raises(DomainError):
        bessel_half("I", 0.5, 0.0)
    with pytest.raises(UnsupportedOrderError):
        bessel_half("I", 2.5, 1.0)
    with pytest.raises(DomainError):
        bessel_half("J", 0.5, 1.0)
    with pytest.raises(DomainError):
        bessel_series(0.5, -2.0, 1e-12)
    with pytest.raises(DomainError):
        bessel_series(-1.0, 2.0, 1e-12)
    with pytest.raises(DomainError):
        bessel_series(0.5, 2.0, 0.0)


def test_series_iteration_cap():
    with pytest.raises(NumericError):
        bessel_series(0.5, 400.0, 1e-300)


def test_heat_kernel_value_and_symmetry():
    assert heat_kernel(1.0, 1.0, 1.0) == pytest.approx(HK_111, abs=1e-9)
    # symmetry is exact: same arithmetic ordering on both calls
    rng = np.random.default_rng(7)
    for _ in range(50):
        t, x, y = rng.uniform(0.05, 5.0, size=3)
        assert heat_kernel(t, x, y) == heat_kernel(t, y, x)


def test_heat_kernel_origin_limit():
    # sup of p_1 near the origin tends to 1/sqrt(2 pi)
    g = np.logspace(-9, -1, 40)
    xx, yy = np.meshgrid(g, g)
    vals = heat_kernel(1.0, xx, yy)
    assert np.max(vals) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-4)


def test_heat_kernel_no_overflow_large_argument():
    # xy/t ~ 1e8: raw I_{1/2} would overflow, the scaled path must not
    v = heat_kernel(1e-4, 100.0, 100.0)
    assert math.isfinite(v) and v > 0


def test_heat_kernel_against_series_route():
    # independent route: (1/2t)(xy)^{-1/2} exp(-(x^2+y^2)/2t) I_series(xy/t)
    rng = np.random.default_rng(3)
    for _ in range(40):
        t = rng.uniform(0.1, 4.0)
        x = rng.uniform(0.05, 4.0)
        y = rng.uniform(0.05, 4.0)
        z = x * y / t
        direct = (
            0.5 / t / math.sqrt(x * y)
            * math.exp(-(x * x + y * y) / (2.0 * t))
            * bessel_series(0.5, z, 1e-14)
        )
        assert heat_kernel(t, x, y) == pytest.approx(direct, rel=1e-10)


def test_kernel_point_validation():
    p = KernelPoint(1.0, 1.0, 1.0)
    assert p.value() == pytest.approx(HK_111, abs=1e-9)
    with pytest.raises(DomainError):
        KernelPoint(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        KernelPoint(1.0, -1.0, 1.0)
