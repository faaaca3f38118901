"""Continuum form: energies, heat-kernel mass, inequality ratios."""

import math

import numpy as np
import pytest

from bessel_trace.continuum import (
    QuadratureConfig,
    TestFunctionSpec,
    energy,
    heat_mass,
    inequality_ratio,
    ultracontractivity_scan,
)
from bessel_trace.errors import DomainError
from bessel_trace.special import heat_kernel

Q = QuadratureConfig()


def test_energy_gamma_integrals():
    # int x^2 e^{-2x} dx = 2/2^3 = 0.25 ; norm^2 = 2 * 0.25
    r = energy(TestFunctionSpec("exponential", (1.0,)), Q)
    assert r.energy == pytest.approx(0.25, abs=1e-10)
    assert r.norm_sq == pytest.approx(0.5, abs=1e-10)
    # u = e^{-2x}: int 4 e^{-4x} x^2 dx = 4 * 2/64
    r2 = energy(TestFunctionSpec("exponential", (2.0,)), Q)
    assert r2.energy == pytest.approx(0.125, abs=1e-10)


def test_plateau_energy_is_ramps_only():
    u = TestFunctionSpec("hat", (1.0, 2.0, 3.0, 4.0))
    ramps = (2.0**3 - 1.0) / 3.0 + (4.0**3 - 3.0**3) / 3.0
    assert energy(u, Q).energy == pytest.approx(ramps, rel=1e-12)


def test_energy_additivity_disjoint_derivative_supports():
    u = TestFunctionSpec("hat", (1.0, 2.0, 3.0))
    v = TestFunctionSpec("hat", (3.0, 4.0, 5.0))
    xs = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    vals = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
    w = TestFunctionSpec("piecewise_linear", (xs, vals))
    assert energy(w, Q).energy == pytest.approx(
        energy(u, Q).energy + energy(v, Q).energy, rel=1e-10
    )


def test_heat_mass_is_one():
    for t in (0.1, 1.0, 10.0):
        for x in (0.1, 1.0, 10.0):
            assert abs(heat_mass(t, x, Q) - 1.0) <= 1e-8


def test_heat_mass_extreme_parameters():
    assert abs(heat_mass(10.0, 0.01, Q) - 1.0) <= 1e-7
    assert abs(heat_mass(0.5, 2.0, Q) - 1.0) <= 1e-8


def test_chapman_kolmogorov():
    from scipy.integrate import quad

    for s in (0.3, 1.0, 2.0):
        for t in (0.5, 1.0, 3.0):
            x, y = 0.7, 1.9
            conv, _ = quad(
                lambda z: heat_kernel(s, x, z) * heat_kernel(t, z, y) * 2.0 * z * z,
                0.0,
                x + y + 8.0 * math.sqrt(s + t) + 20.0,
                epsabs=1e-12,
                epsrel=1e-11,
                limit=200,
            )
            direct = heat_kernel(s + t, x, y)
            assert conv == pytest.approx(direct, rel=1e-6)


def test_strauss_ratio_exponential():
    # sup x^{1/2} e^{-x} = (1/2)^{1/2} e^{-1/2}; energy 1/4
    u = TestFunctionSpec("exponential", (1.0,))
    expect = math.sqrt(0.5) * math.exp(-0.5) / 0.5
    assert inequality_ratio(u, "strauss", 1.0, Q) == pytest.approx(expect, abs=1e-5)


def test_ratio_scale_invariance_exact():
    u = TestFunctionSpec("exponential", (1.0,))
    for mode, ex in (("sobolev", 4.0), ("strauss", 0.75)):
        base = inequality_ratio(u, mode, ex, Q)
        for c in (3.0, -2.0, 1e6, 1e-7):
            scaled = inequality_ratio(u.with_scale(c), mode, ex, Q)
            assert abs(scaled - base) <= 1e-12 * abs(base)


def test_sobolev_ratio_stable_under_refinement():
    u = TestFunctionSpec("exponential", (1.0,))
    loose = inequality_ratio(u, "sobolev", 6.0, QuadratureConfig(rel_tol=1e-6, abs_tol=1e-8))
    tight = inequality_ratio(u, "sobolev", 6.0, QuadratureConfig(rel_tol=1e-12, abs_tol=1e-13))
    assert loose == pytest.approx(tight, abs=1e-4)
    assert math.isfinite(tight) and tight > 0


def test_ratios_finite_across_family():
    family = [
        TestFunctionSpec("exponential", (0.5,)),
        TestFunctionSpec("exponential", (2.0,)),
        TestFunctionSpec("gaussian", (1.0,)),
        TestFunctionSpec("hat", (0.5, 1.0, 2.0)),
        TestFunctionSpec("hat", (1.0, 2.0, 4.0, 6.0)),
    ]
    for u in family:
        for p in (3.0, 4.0, 6.0):
            assert math.isfinite(inequality_ratio(u, "sobolev", p, Q))
        for sg in (0.5, 0.75, 1.0):
            assert math.isfinite(inequality_ratio(u, "strauss", sg, Q))


def test_ratio_domain_errors():
    u = TestFunctionSpec("exponential", (1.0,))
    for bad in (2.0, 6.5, 0.0):
        with pytest.raises(DomainError):
            inequality_ratio(u, "sobolev", bad, Q)
    for bad in (0.25, 1.2):
        with pytest.raises(DomainError):
            inequality_ratio(u, "strauss", bad, Q)
    with pytest.raises(DomainError):
        inequality_ratio(u, "nash", 1.0, Q)


def test_ultracontractivity_scan():
    g = np.logspace(-6, -1, 25)
    grid = [(a, b) for a in g for b in g]
    top = ultracontractivity_scan(1.0, grid)
    assert top == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-4)
    # same spatial grid scaled by sqrt(t): the bound is t-independent
    grid4 = [(2.0 * a, 2.0 * b) for (a, b) in grid]
    assert ultracontractivity_scan(4.0, grid4) == pytest.approx(top, abs=1e-4)
    assert ultracontractivity_scan(1.0, [(1.0, 1.0)]) == pytest.approx(
        heat_kernel(1.0, 1.0, 1.0), rel=1e-12
    )
    with pytest.raises(DomainError):
        ultracontractivity_scan(1.0, [])


def test_sampled_matches_parametric():
    xs = np.linspace(0.0, 25.0, 4001)
    samp = TestFunctionSpec("sampled", (xs, np.exp(-xs)))
    r = energy(samp, Q)
    assert r.energy == pytest.approx(0.25, abs=1e-5)
    assert r.norm_sq == pytest.approx(0.5, abs=1e-5)


def test_bad_test_function_specs():
    with pytest.raises(DomainError):
        TestFunctionSpec("exponential", (-1.0,))
    with pytest.raises(DomainError):
        TestFunctionSpec("hat", (3.0, 2.0, 1.0))
    with pytest.raises(DomainError):
        TestFunctionSpec("hat", (1.0, 2.0))
    with pytest.raises(DomainError):
        TestFunctionSpec("madeup", ())
    with pytest.raises(DomainError):
        TestFunctionSpec("sampled", (np.array([1.0, 0.5]), np.array([0.0, 1.0])))
