"""Weight families for atomic measures on the positive integers.

A measure is a positive weight sequence (a_k), optionally combined with the
absolutely continuous part x^2 dx on (0,1) for the mixed support.  Built-in
families carry analytic answers to the questions the global-property checks
ask (is the total mass finite? does sum a_k/k diverge? what bounds the tail
of sum a_k/k^q?); explicit weight lists answer None (= unknown) and leave
callers to partial-sum heuristics.

Families:
  constant(c)       a_k = c
  power(p)          a_k = k^p
  exponential(b)    a_k = e^{-b k},  b > 0
  sparse_dyadic     a_k = 2^j / j^2 at k = 2^j (j >= 1), else 2^{-k}
  explicit          a_k given as a list, k = 1 .. len(list)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["MeasureSpec"]

_FAMILIES = ("constant", "power", "exponential", "sparse_dyadic", "explicit")


def _is_dyadic(k: int) -> bool:
    return k >= 2 and (k & (k - 1)) == 0


@dataclass(frozen=True)
class MeasureSpec:
    family: str
    param: float = 0.0
    weights_list: tuple = ()
    ac_part: bool = False

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise DomainError(f"unknown measure family {self.family!r}")
        if self.family == "constant" and self.param <= 0:
            raise DomainError("constant family needs c > 0")
        if self.family == "exponential" and self.param <= 0:
            raise DomainError("exponential family needs beta > 0")
        if self.family == "explicit":
            if not self.weights_list:
                raise DomainError("explicit family needs a nonempty weight list")
            if any((not math.isfinite(a)) or a <= 0 for a in self.weights_list):
                raise DomainError("explicit weights must be finite and strictly positive")

    # -- constructors --------------------------------------------------------
    @classmethod
    def constant(cls, c: float = 1.0, ac_part: bool = False) -> "MeasureSpec":
        return cls("constant", c, ac_part=ac_part)

    @classmethod
    def power(cls, p: float, ac_part: bool = False) -> "MeasureSpec":
        return cls("power", p, ac_part=ac_part)

    @classmethod
    def exponential(cls, beta: float = 1.0, ac_part: bool = False) -> "MeasureSpec":
        return cls("exponential", beta, ac_part=ac_part)

    @classmethod
    def sparse_dyadic(cls, ac_part: bool = False) -> "MeasureSpec":
        return cls("sparse_dyadic", ac_part=ac_part)

    @classmethod
    def explicit(cls, weights, ac_part: bool = False) -> "MeasureSpec":
        return cls("explicit", weights_list=tuple(float(w) for w in weights), ac_part=ac_part)

    # -- weights -------------------------------------------------------------
    def a(self, k: int) -> float:
        if k < 1:
            raise DomainError(f"weights are indexed from k = 1, got {k}")
        if self.family == "constant":
            return self.param
        if self.family == "power":
            return float(k) ** self.param
        if self.family == "exponential":
            return math.exp(-self.param * k)
        if self.family == "sparse_dyadic":
            if _is_dyadic(k):
                j = k.bit_length() - 1
                return float(k) / (j * j)
            return 2.0 ** (-k)
        if k > len(self.weights_list):
            raise DomainError(
                f"explicit measure defines k <= {len(self.weights_list)}, got {k}"
            )
        return self.weights_list[k - 1]

    def weights(self, n: int) -> np.ndarray:
        """a_1 .. a_n as an array."""
        k = np.arange(1, n + 1, dtype=float)
        if self.family == "constant":
            w = np.full(n, self.param)
        elif self.family == "power":
            w = k**self.param
        elif self.family == "exponential":
            w = np.exp(-self.param * k)
        elif self.family == "sparse_dyadic":
            with np.errstate(under="ignore"):
                w = 2.0 ** (-k)
            j = 1
            while 2**j <= n:
                w[2**j - 1] = float(2**j) / (j * j)
                j += 1
        else:
            if n > len(self.weights_list):
                raise DomainError(
                    f"explicit measure defines k <= {len(self.weights_list)}, need {n}"
                )
            w = np.array(self.weights_list[:n])
        return w

    @property
    def horizon_limit(self) -> int | None:
        return len(self.weights_list) if self.family == "explicit" else None

    # -- analytic series facts (None = unknown) -------------------------------
    def mass_is_finite(self):
        """Is sum a_k finite?"""
        if self.family == "constant":
            return False
        if self.family == "power":
            return self.param < -1.0
        if self.family == "exponential":
            return True
        if self.family == "sparse_dyadic":
            return False
        return None

    def sum_ak_over_k_diverges(self):
        """Does sum a_k / k diverge?"""
        if self.family == "constant":
            return True
        if self.family == "power":
            return self.param >= 0.0
        if self.family == "exponential":
            return False
        if self.family == "sparse_dyadic":
            return False
        return None

    def tail_ak_over_kq(self, start: int, q: float):
        """Upper bound for sum_{k >= start} a_k / k^q; inf if divergent, None if unknown."""
        if start < 2:
            start = 2
        if self.family == "constant":
            if q <= 1.0:
                return math.inf
            # integral bound for sum k^{-q}
            return self.param * (start ** (-q) + start ** (1.0 - q) / (q - 1.0))
        if self.family == "power":
            r = self.param - q
            if r >= -1.0:
                return math.inf
            return start**r + start ** (r + 1.0) / (-(r + 1.0))
        if self.family == "exponential":
            b = self.param
            return math.exp(-b * start) / (start**q) / (1.0 - math.exp(-b))
        if self.family == "sparse_dyadic":
            if q < 1.0:
                return math.inf
            j0 = max(1, math.ceil(math.log2(start)))
            if q == 1.0:
                dyadic = 1.0 / (j0 - 1.0) if j0 >= 2 else math.pi**2 / 6.0
            else:
                ratio = 2.0 ** (1.0 - q)
                dyadic = 2.0 ** (j0 * (1.0 - q)) / (j0 * j0) / (1.0 - ratio)
            plain = 2.0 ** (1 - start) / start**q
            return dyadic + plain
        return None

    def tail_ak_over_k(self, start: int):
        if self.sum_ak_over_k_diverges() is True:
            return math.inf
        return self.tail_ak_over_kq(start, 1.0)

    def describe(self) -> dict:
        d = {"family": self.family, "ac_part": self.ac_part}
        if self.family in ("constant", "power", "exponential"):
            d["param"] = self.param
        if self.family == "explicit":
            d["length"] = len(self.weights_list)
        return d
