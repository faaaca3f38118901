r"""Trace energies of the Bessel-3 form on lattice, finite, and mixed supports.

The limit trace energy on the lattice is the Jacobi form

.. math::
    Q[u] = \sum_{k \ge 1} k(k+1) (u_{k+1} - u_k)^2,

equivalently the graph form with edge weights ``b(k, k+1) = k(k+1)/2``
counted in both orientations.  For ``lambda > 0`` the approximating energy
``E_lambda[u]`` is the Dirichlet energy (plus lambda times the squared norm)
of the piecewise-Bessel extension; on the full lattice it collapses to an
explicit expression in ``s = sqrt(2 lambda)``:

per k:  ``-2 u_k u_{k+1} k(k+1) s/sinh(s)
        + u_{k+1}^2 ((k+1)^2 s cosh(s)/sinh(s) - (k+1))
        + u_k^2     (k^2     s cosh(s)/sinh(s) + k)``
plus the boundary term ``s u(1)^2 I_{3/2}(s) / I_{1/2}(s)``.

The finite support adds the killing ``N u_N^2`` in the limit; the mixed
support adds the continuum energy of the data on (0,1).  Both are assembled
from one-sided derivatives of the extension at the nodes, and every route is
cross-checkable against direct quadrature over the extension
(:func:`quadrature_crosscheck`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .continuum import QuadratureConfig, TestFunctionSpec, _quad
from .errors import DomainError
from .extension import (
    FINITE,
    INFINITE,
    MIXED,
    LatticeFunction,
    PiecewiseBesselSolution,
    SupportSpec,
    extend,
    side_derivative,
)
from .measures import MeasureSpec
from .special import bessel_half

__all__ = [
    "MixedFunction",
    "approx_trace_energy",
    "edge_weight",
    "finite_trace_energy",
    "generator_apply",
    "mixed_trace_energy",
    "quadrature_crosscheck",
    "trace_energy",
    "trace_energy_double_sum",
]


def edge_weight(k: int, j: int) -> float:
    """Graph weight b(k, j) = k j / 2 on nearest neighbours, else 0."""
    if k < 1 or j < 1:
        raise DomainError("edge weights are defined for nodes >= 1")
    return 0.5 * k * j if abs(k - j) == 1 else 0.0


def _active_edges(u: LatticeFunction):
    """Edge indices k with (u_k, u_{k+1}) not both zero."""
    ks = set()
    for k in u.support:
        if k >= 2:
            ks.add(k - 1)
        ks.add(k)
    return sorted(ks)


def trace_energy(u: LatticeFunction) -> float:
    """Q[u] = sum k(k+1)(u_{k+1} - u_k)^2 over the (finite) active range."""
    return sum(k * (k + 1.0) * (u(k + 1) - u(k)) ** 2 for k in _active_edges(u))


def trace_energy_double_sum(u: LatticeFunction) -> float:
    """Q[u] through the two-orientation sum over b(k, j); equals trace_energy."""
    total = 0.0
    nodes = set()
    for k in u.support:
        nodes.update((k - 1, k, k + 1))
    for k in sorted(n for n in nodes if n >= 1):
        for j in (k - 1, k + 1):
            if j >= 1:
                total += edge_weight(k, j) * (u(k) - u(j)) ** 2
    return total


def finite_trace_energy(u: LatticeFunction, n: int) -> float:
    """Limit trace energy on {1..N}: the Jacobi sum plus the killing N u_N^2."""
    if n < 1:
        raise DomainError("finite support needs N >= 1")
    if u.max_node > n:
        raise DomainError(f"data supported up to {u.max_node} exceeds N = {n}")
    body = sum(
        k * (k + 1.0) * (u(k + 1) - u(k)) ** 2 for k in _active_edges(u) if k <= n - 1
    )
    return body + n * u(n) ** 2


@dataclass(frozen=True)
class MixedFunction:
    """Data on the mixed support: psi on [0,1] glued to a lattice part at 1."""

    psi: TestFunctionSpec
    lattice: LatticeFunction

    def __post_init__(self):
        psi1 = float(self.psi.value(1.0))
        u1 = self.lattice(1)
        if abs(psi1 - u1) > 1e-9 * max(1.0, abs(u1)):
            raise DomainError(f"junction mismatch: psi(1) = {psi1} but u(1) = {u1}")


def _continuum_part(f: MixedFunction, lam: float, q: QuadratureConfig):
    pts = [p for p in f.psi.breakpoints() if 0.0 < p < 1.0]
    e = _quad(lambda x: f.psi.derivative(x) ** 2 * x * x, 0.0, 1.0, q, pts)
    if lam == 0.0:
        return e
    n2 = _quad(lambda x: f.psi.value(x) ** 2 * 2.0 * x * x, 0.0, 1.0, q, pts)
    return e + lam * n2


def mixed_trace_energy(f: MixedFunction, q: QuadratureConfig = QuadratureConfig()) -> float:
    """Limit trace energy on [0,1] u lattice: continuum energy plus the Jacobi sum."""
    return _continuum_part(f, 0.0, q) + trace_energy(f.lattice)


def _boundary_sum(sol: PiecewiseBesselSolution, u: LatticeFunction, upto: int | None) -> float:
    """sum_k [P'((k+1)^-) u(k+1) (k+1)^2 - P'(k^+) u(k) k^2] over active edges."""
    total = 0.0
    for k in _active_edges(u):
        if upto is not None and k > upto:
            continue
        uk1 = u(k + 1)
        if uk1 != 0.0:
            total += side_derivative(sol, k + 1, "left") * uk1 * (k + 1.0) ** 2
        uk = u(k)
        if uk != 0.0:
            total -= side_derivative(sol, k, "right") * uk * k * k
    return total


def approx_trace_energy(u, lam: float, support: SupportSpec | None = None,
                        q: QuadratureConfig = QuadratureConfig()) -> float:
    """The approximating energy E_lambda for the given support.

    Full lattice: the explicit formula above (no quadrature).  Finite
    support {1..N}: assembled from one-sided derivatives of the extension,
    including the decaying-tail boundary term at N.  Mixed support: `u` must
    be a :class:`MixedFunction`; the continuum data contributes
    ``int (psi')^2 x^2 + lambda int psi^2 2 x^2`` over (0,1).
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    support = support or SupportSpec.infinite()

    if support.kind == MIXED:
        if not isinstance(u, MixedFunction):
            raise DomainError("mixed support needs a MixedFunction (psi + lattice part)")
        sol = extend(u.lattice, lam, support)
        return _continuum_part(u, lam, q) + _boundary_sum(sol, u.lattice, None)

    if not isinstance(u, LatticeFunction):
        raise DomainError("discrete supports take a LatticeFunction")

    if support.kind == FINITE:
        n = support.N
        if u.max_node > n:
            raise DomainError(f"data supported up to {u.max_node} exceeds N = {n}")
        sol = extend(u, lam, support)
        total = _boundary_sum(sol, u, upto=n - 1)
        if u(1) != 0.0:
            total += side_derivative(sol, 1, "left") * u(1)
        if u(n) != 0.0:
            total -= side_derivative(sol, n, "right") * u(n) * n * n
        return total

    # full lattice: explicit formula
    s = math.sqrt(2.0 * lam)
    with np.errstate(over="ignore"):
        sh = np.sinh(s)
    r = float(s / sh)  # -> 0 when sinh overflows
    c = s / math.tanh(s)
    total = 0.0
    for k in _active_edges(u):
        uk, uk1 = u(k), u(k + 1)
        total += (
            -2.0 * uk * uk1 * k * (k + 1.0) * r
            + uk1 * uk1 * ((k + 1.0) ** 2 * c - (k + 1.0))
            + uk * uk * (k * k * c + k)
        )
    u1 = u(1)
    if u1 != 0.0:
        ratio = bessel_half("I", 1.5, s, scaled=True) / bessel_half("I", 0.5, s, scaled=True)
        total += s * u1 * u1 * ratio
    return total


def approx_trace_energy_boundary_route(
    u: LatticeFunction, lam: float
) -> float:
    """Full-lattice E_lambda assembled from side derivatives (internal cross-route)."""
    sol = extend(u, lam, SupportSpec.infinite())
    total = _boundary_sum(sol, u, None)
    if u(1) != 0.0:
        total += side_derivative(sol, 1, "left") * u(1)
    return total


def _segment_quadrature(sol: PiecewiseBesselSolution, lam: float,
                        q: QuadratureConfig) -> float:
    """int (P')^2 x^2 + lambda int P^2 2 x^2 over the stored segments."""
    total = 0.0
    s = sol.s
    for seg in sorted(sol.segments):
        if seg == 0:
            a, b = 0.0, 1.0
        elif sol.support.kind == FINITE and seg == sol.support.N:
            # decaying tail: e^{-2 s (x - N)} envelope fixes the cutoff
            a = float(seg)
            b = a + max(1.0, math.log(1.0 / q.abs_tol) / (2.0 * s) + 2.0)
        else:
            a, b = float(seg), float(seg + 1)
        total += _quad(lambda x: sol._derivative_segment(seg, x) ** 2 * x * x, a, b, q)
        total += lam * _quad(
            lambda x: sol._eval_segment(seg, x) ** 2 * 2.0 * x * x, a, b, q
        )
    return total


def quadrature_crosscheck(u, lam: float, support: SupportSpec | None = None,
                          q: QuadratureConfig = QuadratureConfig()):
    """(closed/assembled value, direct quadrature over the extension).

    The two routes are independent: one is the nodewise boundary-term
    algebra, the other integrates the squared derivative and the squared
    extension segment by segment.
    """
    support = support or SupportSpec.infinite()
    closed = approx_trace_energy(u, lam, support, q)
    if support.kind == MIXED:
        sol = extend(u.lattice, lam, support)
        quad_val = _continuum_part(u, lam, q) + _segment_quadrature(sol, lam, q)
    else:
        sol = extend(u, lam, support)
        quad_val = _segment_quadrature(sol, lam, q)
    return closed, quad_val


def generator_apply(m: MeasureSpec, u: LatticeFunction, k: int) -> float:
    """(1/a_k) sum_j b(k,j) (u_k - u_j); no left neighbour at k = 1."""
    if k < 1:
        raise DomainError("generator nodes start at 1")
    acc = edge_weight(k, k + 1) * (u(k) - u(k + 1))
    if k >= 2:
        acc += edge_weight(k, k - 1) * (u(k) - u(k - 1))
    return acc / m.a(k)
