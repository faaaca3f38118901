r"""Half-integer modified Bessel functions and the Bessel-3 heat kernel.

Closed forms used throughout (all elementary):

.. math::
    I_{1/2}(x) = \sqrt{2/(\pi x)}\,\sinh x, \qquad
    K_{1/2}(x) = \sqrt{\pi/(2x)}\,e^{-x},

    I_{3/2}(x) = \sqrt{2/(\pi x)}\,(\cosh x - \sinh x / x), \qquad
    K_{3/2}(x) = \sqrt{\pi/(2x)}\,(1 + 1/x)\,e^{-x}.

Every function also has an exponentially scaled variant (``e^{-x} I`` and
``e^{x} K``) so that downstream code can assemble products in log space;
``sinh`` and ``e^x`` overflow near ``x = 710`` in double precision.

The power series

.. math::
    I_\nu(x) = \sum_{k\ge 0} \frac{(x/2)^{2k+\nu}}{\Gamma(k+\nu+1)\,k!}

is kept as an independent evaluation route (:func:`bessel_series`) and is
the oracle the closed forms are tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError, UnsupportedOrderError

__all__ = [
    "HALF_ORDERS",
    "KernelPoint",
    "bessel_half",
    "bessel_series",
    "heat_kernel",
]

HALF_ORDERS = (0.5, 1.5)

# cosh x - sinh x / x suffers cancellation below this; use its Taylor series
_SMALL_G = 0.5


@dataclass(frozen=True)
class KernelPoint:
    """A space-time point (t, x, y) for heat-kernel evaluation, all > 0."""

    t: float
    x: float
    y: float

    def __post_init__(self):
        if not (self.t > 0 and self.x > 0 and self.y > 0):
            raise DomainError(f"kernel point requires t, x, y > 0, got {self}")

    def value(self) -> float:
        return float(heat_kernel(self.t, self.x, self.y))


def _as_positive_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.size == 0 or not np.all(arr > 0):
        raise DomainError(f"{name} must be strictly positive")
    return arr


def _g32(x: np.ndarray) -> np.ndarray:
    """cosh x - sinh x / x, cancellation-safe for small x."""
    out = np.empty_like(x)
    small = x < _SMALL_G
    xs = x[small]
    # sum_{m>=1} x^{2m} * 2m / (2m+1)!  (first omitted term < 1e-18 at x=0.5)
    x2 = xs * xs
    term = x2 / 3.0
    acc = term.copy()
    fact = 6.0  # (2m+1)! at m=1
    for m in range(2, 9):
        fact *= (2 * m) * (2 * m + 1)
        term = x2 ** m * (2 * m) / fact
        acc += term
    out[small] = acc
    xl = x[~small]
    out[~small] = np.cosh(xl) - np.sinh(xl) / xl
    return out


def _g32_scaled(x: np.ndarray) -> np.ndarray:
    """e^{-x} (cosh x - sinh x / x), overflow- and cancellation-safe."""
    out = np.empty_like(x)
    small = x < _SMALL_G
    out[small] = _g32(x[small]) * np.exp(-x[small])
    xl = x[~small]
    em = np.exp(-2.0 * xl)
    out[~small] = 0.5 * (1.0 + em) - 0.5 * (1.0 - em) / xl
    return out


def bessel_half(kind: str, order: float, x, scaled: bool = False):
    """Closed-form modified Bessel function of half-integer order.

    Parameters
    ----------
    kind : {'I', 'K'}
        First or second kind.
    order : {0.5, 1.5}
        Only these orders have a closed-form path; anything else raises
        :class:`UnsupportedOrderError` (use :func:`bessel_series` for
        general nonnegative orders of the first kind).
    x : float or ndarray
        Strictly positive argument(s).
    scaled : bool
        If true, return ``e^{-x} I`` respectively ``e^{x} K``.

    Returns
    -------
    float or ndarray
    """
    if kind not in ("I", "K"):
        raise DomainError(f"kind must be 'I' or 'K', got {kind!r}")
    if order not in HALF_ORDERS:
        raise UnsupportedOrderError(
            f"no closed form for order {order}; supported orders are {HALF_ORDERS}"
        )
    arr = np.atleast_1d(_as_positive_array(x, "x"))
    if kind == "I":
        pref = np.sqrt(2.0 / (np.pi * arr))
        if order == 0.5:
            # e^{-x} sinh x = (1 - e^{-2x})/2, stable for all x
            val = pref * (-np.expm1(-2.0 * arr)) / 2.0 if scaled else pref * np.sinh(arr)
        else:
            val = pref * (_g32_scaled(arr) if scaled else _g32(arr))
    else:
        pref = np.sqrt(np.pi / (2.0 * arr))
        body = 1.0 if order == 0.5 else 1.0 + 1.0 / arr
        val = pref * body if scaled else pref * body * np.exp(-arr)
    if np.ndim(x) == 0:
        return float(val[0])
    return val.reshape(np.shape(x))


def bessel_series(order: float, x: float, tol: float = 1e-12) -> float:
    """Power-series evaluation of I_order(x); the independent oracle.

    Terms are accumulated by the ratio recurrence
    ``t_{k+1} = t_k (x/2)^2 / ((k+1)(k+1+order))`` and summation stops once
    the next term falls below ``tol`` times the partial sum.

    Raises
    ------
    NumericError
        If 500 terms do not reach the truncation criterion.
    """
    if order < 0:
        raise DomainError(f"series order must be >= 0, got {order}")
    if x <= 0:
        raise DomainError(f"x must be strictly positive, got {x}")
    if tol <= 0:
        raise DomainError(f"tol must be strictly positive, got {tol}")
    half = x / 2.0
    q = half * half
    term = half**order / math.gamma(order + 1.0)
    total = term
    for k in range(500):
        term *= q / ((k + 1.0) * (k + 1.0 + order))
        total += term
        if term < tol * total:
            return total
    raise NumericError(
        f"I_{order}({x}) series did not satisfy the {tol} truncation rule in 500 terms"
    )


def heat_kernel(t, x, y):
    r"""Heat kernel of the Bessel-3 generator w.r.t. ``dm = 2 y^2 dy``.

    Evaluates ``(1/2t)(xy)^{-1/2} e^{-(x^2+y^2)/2t} I_{1/2}(xy/t)``.
    The scaled-Bessel route combines all exponents first, so the value is
    finite for every positive input: with ``z = xy/t``,

    .. math::
        p_t(x,y) = \frac{1}{2t}\sqrt{\frac{2}{\pi t}}\;
                   \frac{1 - e^{-2z}}{2z}\; e^{-(x-y)^2/(2t)},

    and ``(1-e^{-2z})/(2z) \to 1`` as ``z \to 0`` (the small-argument limit
    of the series, taken directly instead of forming 0/infinity).
    Symmetric in (x, y) by construction.
    """
    tt = _as_positive_array(t, "t")
    xx = _as_positive_array(x, "x")
    yy = _as_positive_array(y, "y")
    z = xx * yy / tt
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(z > 1e-300, -np.expm1(-2.0 * z) / (2.0 * z), 1.0)
    pref = 0.5 / tt * np.sqrt(2.0 / (np.pi * tt))
    val = pref * h * np.exp(-((xx - yy) ** 2) / (2.0 * tt))
    if all(np.ndim(a) == 0 for a in (t, x, y)):
        return float(val)
    return val
