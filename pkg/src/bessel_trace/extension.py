r"""Piecewise modified-Bessel extensions of lattice boundary data.

For boundary data ``u`` on the integer lattice and ``lambda > 0``, the
energy-minimizing extension solves

.. math::
    -\tfrac12 v'' - \tfrac1x v' + \lambda v = 0
    \quad\text{off the nodes}, \qquad v = u \text{ on the nodes},

whose general solution on a segment ``[k, k+1]`` is

.. math::
    v(x) = x^{-1/2} A_k I_{1/2}(x\sqrt{2\lambda})
         + x^{-1/2} B_k K_{1/2}(x\sqrt{2\lambda}).

Raw ``I_{1/2}(k\sqrt{2\lambda})`` overflows once ``k\sqrt{2\lambda}``
passes ~710, so every solve and evaluation here works in the scaled basis
``(e^{-z} I, e^{z} K)`` with the residual exponent anchored at a reference
node of the segment.  The scaled 2x2 determinant coincides with the true
determinant ``-sinh(\sqrt{2\lambda}) / (\sqrt{2\lambda}\, k(k+1))`` because
the anchoring exponents cancel.

Supports: the full lattice, a finite set {1..N} (with a decaying tail
segment on [N, inf)), and the mixed support (0,1] U lattice where the
extension below 1 is the boundary data itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, NumericError
from .special import bessel_half

__all__ = [
    "LatticeFunction",
    "PiecewiseBesselSolution",
    "SupportSpec",
    "det_mk",
    "det_mk_direct",
    "extend",
    "evaluate",
    "ode_residual",
    "side_derivative",
]

INFINITE = "infinite_discrete"
FINITE = "finite_discrete"
MIXED = "mixed"

# |det| below this multiple of the entry products means the 2x2 solve has
# lost digits; cannot actually vanish for lambda > 0
_CONDITION_GUARD = 1e-13


class PrecisionLossWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SupportSpec:
    kind: str
    N: int | None = None

    def __post_init__(self):
        if self.kind not in (INFINITE, FINITE, MIXED):
            raise DomainError(f"unknown support kind {self.kind!r}")
        if self.kind == FINITE:
            if self.N is None or self.N < 1:
                raise DomainError("finite support needs N >= 1")
        elif self.N is not None:
            raise DomainError(f"{self.kind} support takes no N")

    @classmethod
    def infinite(cls) -> "SupportSpec":
        return cls(INFINITE)

    @classmethod
    def finite(cls, n: int) -> "SupportSpec":
        return cls(FINITE, n)

    @classmethod
    def mixed(cls) -> "SupportSpec":
        return cls(MIXED)


class LatticeFunction:
    """Finitely supported real sequence on the positive integers."""

    def __init__(self, values: Mapping[int, float] | None = None, horizon: int | None = None):
        vals = {}
        for k, v in (values or {}).items():
            k = int(k)
            v = float(v)
            if k < 1:
                raise DomainError(f"lattice nodes start at 1, got {k}")
            if not math.isfinite(v):
                raise DomainError(f"non-finite value at node {k}")
            if v != 0.0:
                vals[k] = v
        self._values = vals
        top = max(vals) if vals else 0
        if horizon is not None and horizon < top:
            raise DomainError(f"horizon {horizon} below last support node {top}")
        self.horizon = top if horizon is None else int(horizon)

    @classmethod
    def basis(cls, k: int) -> "LatticeFunction":
        return cls({k: 1.0})

    @classmethod
    def zero(cls) -> "LatticeFunction":
        return cls({})

    def __call__(self, k: int) -> float:
        return self._values.get(k, 0.0)

    @property
    def support(self) -> tuple:
        return tuple(sorted(self._values))

    @property
    def max_node(self) -> int:
        return max(self._values) if self._values else 0

    def is_zero(self) -> bool:
        return not self._values

    def as_vector(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for k, v in self._values.items():
            if k <= n:
                out[k - 1] = v
        return out

    def items(self):
        return sorted(self._values.items())

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        keys = set(self._values) | set(other._values)
        return LatticeFunction(
            {k: self(k) + other(k) for k in keys},
            horizon=max(self.horizon, other.horizon),
        )

    def __sub__(self, other: "LatticeFunction") -> "LatticeFunction":
        return self + (other * -1.0)

    def __mul__(self, c: float) -> "LatticeFunction":
        return LatticeFunction(
            {k: c * v for k, v in self._values.items()}, horizon=self.horizon
        )

    __rmul__ = __mul__

    def __repr__(self):
        return f"LatticeFunction({dict(self.items())}, horizon={self.horizon})"


def det_mk(k, lam):
    """Closed-form determinant of the segment matrix: -sinh(s)/(s k(k+1)), s = sqrt(2 lam)."""
    kk = np.asarray(k, dtype=float)
    ll = np.asarray(lam, dtype=float)
    if np.any(kk < 1) or np.any(ll <= 0):
        raise DomainError("det_mk needs k >= 1 and lambda > 0")
    s = np.sqrt(2.0 * ll)
    val = -np.sinh(s) / (s * kk * (kk + 1.0))
    return float(val) if np.ndim(k) == 0 and np.ndim(lam) == 0 else val


def _entries(k, s):
    """Scaled segment-matrix entries anchored at the left node k."""
    sk = s * k
    sk1 = s * (k + 1.0)
    m11 = bessel_half("I", 0.5, sk, scaled=True) / np.sqrt(k)
    m12 = bessel_half("K", 0.5, sk, scaled=True) / np.sqrt(k)
    m21 = bessel_half("I", 0.5, sk1, scaled=True) * np.exp(s) / np.sqrt(k + 1.0)
    m22 = bessel_half("K", 0.5, sk1, scaled=True) * np.exp(-s) / np.sqrt(k + 1.0)
    return m11, m12, m21, m22


def det_mk_direct(k, lam):
    """Direct 2x2 determinant from the (scaled) Bessel entries.

    The anchoring exponents cancel between the two products, so this equals
    the determinant of the unscaled matrix without ever forming I_{1/2} of
    a large argument.
    """
    kk = np.asarray(k, dtype=float)
    ll = np.asarray(lam, dtype=float)
    if np.any(kk < 1) or np.any(ll <= 0):
        raise DomainError("det_mk_direct needs k >= 1 and lambda > 0")
    s = np.sqrt(2.0 * ll)
    m11, m12, m21, m22 = _entries(kk, s)
    val = m11 * m22 - m12 * m21
    return float(val) if np.ndim(k) == 0 and np.ndim(lam) == 0 else val


@dataclass(frozen=True)
class PiecewiseBesselSolution:
    """The extension, stored as scaled per-segment coefficient pairs.

    ``segments[k] = (a_k, b_k)`` encodes, anchored at reference node r(k),

        P(x) = x^{-1/2} [ a_k Ihat(s x) e^{s(x - r)} + b_k Khat(s x) e^{-s(x - r)} ]

    with r = 1 for segment 0, r = k for interior segments, r = N for the
    finite-support tail.  Segments absent from the map are identically zero
    (zero boundary data on both ends).  ``coefficients(k)`` converts back to
    the unscaled pair (A_k, B_k), which may overflow by design for large
    s * k; the scaled data never does.
    """

    lam: float
    support: SupportSpec
    boundary: LatticeFunction
    segments: dict = field(repr=False)
    psi: Callable[[float], float] | None = field(default=None, repr=False)

    @property
    def s(self) -> float:
        return math.sqrt(2.0 * self.lam)

    def _ref(self, seg: int) -> float:
        return 1.0 if seg == 0 else float(seg)

    def segment_of(self, x: float) -> int:
        if x <= 0:
            raise DomainError(f"extension domain is x > 0, got {x}")
        if self.support.kind == MIXED and x < 1.0:
            raise DomainError("mixed support: (0,1) carries the boundary data itself")
        seg = int(math.floor(x))
        if self.support.kind == FINITE:
            seg = min(seg, self.support.N)
        return seg

    def coefficients(self, seg: int):
        """Unscaled (A_k, B_k); overflow possible for large s*k, by design."""
        a, b = self.segments.get(seg, (0.0, 0.0))
        r = self._ref(seg)
        with np.errstate(over="ignore", under="ignore"):
            return a * math.exp(-self.s * r), b * math.exp(self.s * r)

    def _eval_segment(self, seg: int, x: float) -> float:
        pair = self.segments.get(seg)
        if pair is None:
            return 0.0
        a, b = pair
        s = self.s
        e = math.exp(s * (x - self._ref(seg)))
        val = 0.0
        if a != 0.0:
            val += a * bessel_half("I", 0.5, s * x, scaled=True) * e
        if b != 0.0:
            val += b * bessel_half("K", 0.5, s * x, scaled=True) / e
        return val / math.sqrt(x)

    def _derivative_segment(self, seg: int, x: float) -> float:
        pair = self.segments.get(seg)
        if pair is None:
            return 0.0
        a, b = pair
        s = self.s
        e = math.exp(s * (x - self._ref(seg)))
        val = 0.0
        if a != 0.0:
            val += a * bessel_half("I", 1.5, s * x, scaled=True) * e
        if b != 0.0:
            val -= b * bessel_half("K", 1.5, s * x, scaled=True) / e
        return s * val / math.sqrt(x)

    def _second_derivative_segment(self, seg: int, x: float) -> float:
        # P'' = P'/x + s^2 x^{-1/2} (A I_{5/2} + B K_{5/2}); the 5/2 orders
        # come from the three-term recurrences on the 1/2 and 3/2 values
        pair = self.segments.get(seg)
        if pair is None:
            return 0.0
        a, b = pair
        s = self.s
        z = s * x
        e = math.exp(s * (x - self._ref(seg)))
        i52 = bessel_half("I", 0.5, z, scaled=True) - 3.0 / z * bessel_half(
            "I", 1.5, z, scaled=True
        )
        k52 = bessel_half("K", 0.5, z, scaled=True) + 3.0 / z * bessel_half(
            "K", 1.5, z, scaled=True
        )
        tail = s * s / math.sqrt(x) * (a * i52 * e + b * k52 / e)
        return self._derivative_segment(seg, x) / x + tail


def _solve_segment(k: int, s: float, uk: float, uk1: float):
    m11, m12, m21, m22 = _entries(float(k), s)
    det = m11 * m22 - m12 * m21
    if abs(det) < _CONDITION_GUARD * max(abs(m11 * m22), abs(m12 * m21)):
        warnings.warn(
            f"segment {k}: determinant {det:.3e} is tiny relative to the entries; "
            "coefficients lose precision",
            PrecisionLossWarning,
            stacklevel=3,
        )
    a = (uk * m22 - uk1 * m12) / det
    b = (uk1 * m11 - uk * m21) / det
    return a, b


def extend(
    u: LatticeFunction,
    lam: float,
    support: SupportSpec,
    psi: Callable[[float], float] | None = None,
) -> PiecewiseBesselSolution:
    """Construct the lambda-harmonic extension of lattice data u.

    Segments whose boundary data vanish on both ends are not solved or
    stored.  For the finite support the decaying tail on [N, inf) is
    ``x^{-1/2} B_N K_{1/2}(x s)`` with ``B_N = N^{1/2} u(N) / K_{1/2}(N s)``.
    For the mixed support, `psi` (the data on (0,1], with psi(1) = u(1))
    may be attached for point evaluation below 1.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    s = math.sqrt(2.0 * lam)
    segments: dict[int, tuple] = {}

    if support.kind == FINITE:
        n = support.N
        if u.max_node > n:
            raise DomainError(f"data supported up to {u.max_node} exceeds finite support N={n}")
        interior_range = range(1, n)
    else:
        interior_range = range(1, max(u.max_node + 1, 1))

    if support.kind == MIXED:
        if psi is not None and abs(psi(1.0) - u(1)) > 1e-9 * max(1.0, abs(u(1))):
            raise DomainError(f"junction mismatch: psi(1)={psi(1.0)} but u(1)={u(1)}")
    elif u(1) != 0.0:
        # segment 0 on (0,1], anchored at its right node: a0 = u(1)/Ihat(s)
        segments[0] = (u(1) / bessel_half("I", 0.5, s, scaled=True), 0.0)

    for k in interior_range:
        uk, uk1 = u(k), u(k + 1)
        if uk == 0.0 and uk1 == 0.0:
            continue
        segments[k] = _solve_segment(k, s, uk, uk1)

    if support.kind == FINITE and u(support.N) != 0.0:
        n = support.N
        bn = math.sqrt(n) * u(n) / bessel_half("K", 0.5, n * s, scaled=True)
        segments[n] = (0.0, bn)

    return PiecewiseBesselSolution(
        lam=lam, support=support, boundary=u, segments=segments, psi=psi
    )


def evaluate(sol: PiecewiseBesselSolution, x: float) -> float:
    """Point value of the extension (piecewise, scaled-basis arithmetic)."""
    if x <= 0:
        raise DomainError(f"extension domain is x > 0, got {x}")
    if sol.support.kind == MIXED and x < 1.0:
        if sol.psi is not None:
            return float(sol.psi(x))
        raise DomainError("mixed support: data on (0,1) lives in the boundary function")
    return sol._eval_segment(sol.segment_of(x), x)


def side_derivative(sol: PiecewiseBesselSolution, k: int, side: str) -> float:
    """One-sided derivative at a node, from the closed-form derivative of
    the segment touching that side."""
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    kind = sol.support.kind
    n_max = sol.support.N if kind == FINITE else None
    if k < 1 or (n_max is not None and k > n_max):
        raise DomainError(f"node {k} outside the support")
    if side == "right":
        return sol._derivative_segment(k, float(k))
    if k == 1 and kind == MIXED:
        raise DomainError("mixed support: the left side of node 1 is data, not extension")
    return sol._derivative_segment(k - 1, float(k))


def ode_residual(sol: PiecewiseBesselSolution, x: float) -> float:
    """Residual of -1/2 v'' - (1/x) v' + lambda v at a non-node point."""
    if x <= 0:
        raise DomainError(f"extension domain is x > 0, got {x}")
    if float(x).is_integer():
        raise DomainError("residual is undefined at the nodes (derivative jumps)")
    if sol.support.kind == MIXED and x < 1.0:
        raise DomainError("mixed support: (0,1) carries data, the ODE holds only above 1")
    seg = sol.segment_of(x)
    v = sol._eval_segment(seg, x)
    dv = sol._derivative_segment(seg, x)
    ddv = sol._second_derivative_segment(seg, x)
    return -0.5 * ddv - dv / x + sol.lam * v


def interpolation_error(sol: PiecewiseBesselSolution) -> float:
    """max over support nodes of |evaluate(node) - boundary data| (diagnostic)."""
    err = 0.0
    for k, v in sol.boundary.items():
        err = max(err, abs(evaluate(sol, float(k)) - v))
    return err
