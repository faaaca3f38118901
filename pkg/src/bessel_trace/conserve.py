r"""Conservativeness classification for the trace forms.

Three routes, mirroring how the theory decides the question:

* series rule (lattice trace): a finite measure is never conservative; an
  infinite one is conservative iff ``sum a_k / k`` diverges
  (:func:`classify_discrete`);
* bounded-solution probe: the recursion for lattice functions with
  ``L u + alpha u = 0`` either stays bounded (non-conservative) or grows
  without bound (conservative); certificates come from the product majorant
  ``u_{k+1} <= u_2 prod (1 + alpha a_1/(k(k+1)) + 2 alpha S_k/(k(k+1)))``
  whose tail is controlled by the analytic tail of ``sum a_k / k``
  (:func:`harmonic_growth`);
* mixed-type volume tests: with the Euclidean metric the jump condition is
  ``sup k^2 / a_k < infinity``; with the standard adapted metric
  (edge lengths ``sigma(k,j) = sqrt(a_k)/k ^ sqrt(a_j)/j ^ 1``) the per-edge
  bound is <= 1 identically, so only the volume-growth surrogate
  ``min ln V(k) / (k ln k)`` matters (:func:`mixed_euclidean_check`,
  :func:`mixed_adapted_check`).

Both mixed tests are sufficient conditions only; a failed hypothesis yields
``inconclusive``, never ``not_conservative`` (except the finite-mass
short-circuit, which decides regardless of the metric).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .measures import MeasureSpec

__all__ = [
    "AdaptedMetric",
    "ConservativenessVerdict",
    "GrowthResult",
    "adapted_metric",
    "classify_discrete",
    "harmonic_growth",
    "mixed_adapted_check",
    "mixed_euclidean_check",
]

CONSERVATIVE = "conservative"
NOT_CONSERVATIVE = "not_conservative"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConservativenessVerdict:
    status: str
    rule: str | None
    evidence: dict = field(default_factory=dict)


def _decade_partials(values: np.ndarray) -> list[float]:
    """Partial sums at horizon/100, horizon/10, horizon."""
    n = len(values)
    cs = np.cumsum(values)
    return [float(cs[max(n // 100, 1) - 1]), float(cs[max(n // 10, 1) - 1]), float(cs[-1])]


def _trend(partials, margin: float) -> str:
    """'convergent' / 'divergent' / 'unknown' from decade increments.

    Models the tail as a power law: increment ratio r = d1/d0 is 10^{1-p}.
    Convergence needs clear margin (r * margin <= 1); near-constant
    increments (r >= 0.95) read as divergence; anything else is unknown.
    """
    d0 = partials[1] - partials[0]
    d1 = partials[2] - partials[1]
    if d1 <= 0 or d1 < 1e-15 * partials[2]:
        return "convergent"
    if d0 <= 0:
        return "divergent"
    r = d1 / d0
    if r * margin <= 1.0:
        return "convergent"
    if r >= 0.95:
        return "divergent"
    return "unknown"


def classify_discrete(
    m: MeasureSpec, horizon: int = 100_000, trend_margin: float = 2.0
) -> ConservativenessVerdict:
    """Series criterion for the lattice trace form.

    Closed-form families are decided analytically.  Explicit weight lists
    fall back to decade-increment trend heuristics on the partial sums of
    ``sum a_k`` and ``sum a_k / k`` and come back ``inconclusive`` unless
    the trend is clear at the given margin.
    """
    if horizon < 1000:
        raise DomainError("classification horizon must be at least 1000")
    cap = m.horizon_limit
    n = min(horizon, cap) if cap else horizon
    w = m.weights(n)
    k = np.arange(1, n + 1, dtype=float)
    mass_partials = _decade_partials(w)
    ratio_partials = _decade_partials(w / k)
    evidence = {
        "horizon": n,
        "partial_mass": mass_partials[-1],
        "partial_ak_over_k": ratio_partials[-1],
    }

    finite = m.mass_is_finite()
    if finite is True:
        return ConservativenessVerdict(NOT_CONSERVATIVE, "finite-measure", evidence)
    if finite is False:
        if m.sum_ak_over_k_diverges():
            return ConservativenessVerdict(CONSERVATIVE, "series-divergence", evidence)
        evidence["tail_ak_over_k_bound"] = m.tail_ak_over_k(n)
        return ConservativenessVerdict(NOT_CONSERVATIVE, "series-convergence", evidence)

    # explicit list: heuristics only
    mass_trend = _trend(mass_partials, trend_margin)
    ratio_trend = _trend(ratio_partials, trend_margin)
    evidence["mass_trend"] = mass_trend
    evidence["ak_over_k_trend"] = ratio_trend
    if mass_trend == "convergent":
        return ConservativenessVerdict(NOT_CONSERVATIVE, "finite-measure-trend", evidence)
    if mass_trend == "divergent" and ratio_trend == "divergent":
        return ConservativenessVerdict(CONSERVATIVE, "series-divergence-trend", evidence)
    if mass_trend == "divergent" and ratio_trend == "convergent":
        return ConservativenessVerdict(NOT_CONSERVATIVE, "series-convergence-trend", evidence)
    return ConservativenessVerdict(INCONCLUSIVE, None, evidence)


@dataclass(frozen=True)
class GrowthResult:
    sequence: np.ndarray
    verdict: str  # "bounded" | "unbounded" | "inconclusive"
    evidence: dict = field(default_factory=dict)


def harmonic_growth(
    m: MeasureSpec,
    alpha: float = 1.0,
    horizon: int = 1_000_000,
    bound_cap: float = 1e12,
) -> GrowthResult:
    """Iterate the bounded-solution recursion with u_1 = 1.

    u_2 = (1 + alpha a_1) u_1 and, for k >= 2,

        u_{k+1} - u_k = alpha a_1 u_1 / (k(k+1)) + (2 alpha / (k(k+1))) sum_{j<=k} a_j u_j.

    Verdicts: "unbounded" when the analytic tail of sum a_k/k diverges (the
    recursion's lower bound then grows without limit) or when the iterates
    cross `bound_cap` / overflow; "bounded" when the analytic tail is finite,
    with the certified limit bound u_H exp(alpha T(H)) recorded, where

        T(H) = (a_1 + 2 sum_{j<=H} a_j)/(H+1) + 2 sum_{j>H} a_j / j.

    Explicit lists without a cap crossing are "inconclusive".
    The sequence is increasing and positive throughout (checked).
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if horizon < 10:
        raise DomainError("horizon too small")
    cap = m.horizon_limit
    n = min(horizon, cap) if cap else horizon
    w = m.weights(n)
    a1 = w[0]
    u = np.empty(n)
    u[0] = 1.0
    u[1] = 1.0 + alpha * a1
    s_au = a1 * u[0] + w[1] * u[1]  # sum a_j u_j up to k = 2
    crossed_at = None
    top = 2
    ca = alpha * a1
    for k in range(2, n):
        kk = 1.0 / (k * (k + 1.0))
        val = u[k - 1] + ca * kk + 2.0 * alpha * kk * s_au
        u[k] = val
        top = k + 1
        if not math.isfinite(val) or val > bound_cap:
            crossed_at = k + 1
            u = u[: k + 1]
            break
        s_au += w[k] * val
    seq = u[:top]

    evidence: dict = {
        "alpha": alpha,
        "horizon": n,
        "final_value": float(seq[-1]),
        "crossed_at": crossed_at,
    }
    tail = m.tail_ak_over_k(n)
    if tail is not None and math.isinf(tail):
        evidence["rule"] = "divergent-tail"
        return GrowthResult(seq, "unbounded", evidence)
    if tail is not None and crossed_at is None:
        s_a = float(np.sum(w))
        t_h = (a1 + 2.0 * s_a) / (n + 1.0) + 2.0 * tail
        evidence["rule"] = "product-majorant"
        evidence["tail_exponent"] = alpha * t_h
        evidence["certified_limit_bound"] = float(seq[-1]) * math.exp(alpha * t_h)
        return GrowthResult(seq, "bounded", evidence)
    if crossed_at is not None:
        evidence["rule"] = "cap-crossing"
        return GrowthResult(seq, "unbounded", evidence)
    evidence["rule"] = None
    return GrowthResult(seq, "inconclusive", evidence)


@dataclass(frozen=True)
class AdaptedMetric:
    """Edge lengths sigma(k, k+1) for k = 1..H-1 and distances d(1, k) for k = 1..H."""

    sigma: np.ndarray
    distance: np.ndarray


def adapted_metric(m: MeasureSpec, horizon: int) -> AdaptedMetric:
    """Standard adapted metric of the trace graph: sigma = sqrt(a_k)/k ^ ... ^ 1."""
    if horizon < 2:
        raise DomainError("adapted metric needs horizon >= 2")
    w = m.weights(horizon)
    k = np.arange(1, horizon + 1, dtype=float)
    local = np.sqrt(w) / k  # 1/sqrt(deg(k)), deg(k) = k^2 / a_k
    sigma = np.minimum(np.minimum(local[:-1], local[1:]), 1.0)
    distance = np.concatenate([[0.0], np.cumsum(sigma)])
    return AdaptedMetric(sigma=sigma, distance=distance)


def _volume_surrogate(w: np.ndarray) -> dict:
    """min of ln V(k) / (k ln k) over the last decade (V(k) = 1/3 + sum a_j)."""
    n = len(w)
    v = 1.0 / 3.0 + np.cumsum(w)
    k = np.arange(1, n + 1, dtype=float)
    ln_k = np.log(np.maximum(k, 2.0))
    ratio = np.log(v) / (k * ln_k)
    lo = max(n // 10, 2)
    mid = max(n // 100, 1)
    last = float(np.min(ratio[lo - 1 :]))
    prev = float(np.min(ratio[mid - 1 : lo]))
    return {
        "volume_liminf_surrogate": last,
        "volume_surrogate_prev_decade": prev,
        "volume_nonincreasing": last <= prev + 1e-12,
    }


def _finite_mass_shortcircuit(m: MeasureSpec, horizon: int, evidence: dict):
    fin = m.mass_is_finite()
    if fin is None:
        verdict = classify_discrete(m, max(horizon, 1000))
        fin = verdict.rule == "finite-measure-trend"
        evidence["mass_trend_rule"] = verdict.rule
    if fin:
        evidence["rule"] = "finite-measure"
        return ConservativenessVerdict(NOT_CONSERVATIVE, "finite-measure", evidence)
    return None


def mixed_euclidean_check(m: MeasureSpec, horizon: int = 10_000) -> ConservativenessVerdict:
    """Euclidean-metric test for the mixed trace: jump bound sup k^2/a_k plus
    volume surrogate.  Sufficient only: failure of a hypothesis gives
    ``inconclusive`` (unless the measure is finite, which decides)."""
    if horizon < 1000:
        raise DomainError("horizon must be at least 1000")
    cap = m.horizon_limit
    n = min(horizon, cap) if cap else horizon
    w = m.weights(n)
    k = np.arange(1, n + 1, dtype=float)
    evidence: dict = {"horizon": n}
    short = _finite_mass_shortcircuit(m, n, evidence)
    if short is not None:
        return short

    jump_horizon = float(np.max(k * k / w))
    if m.family == "power" and m.param >= 2.0:
        jump = 1.0  # k^{2-p} is maximal at k = 1
        exact = True
    elif m.family in ("constant", "exponential", "sparse_dyadic") or (
        m.family == "power" and m.param < 2.0
    ):
        jump = math.inf
        exact = True
    else:
        jump = jump_horizon
        exact = False
    evidence["jump_bound"] = jump
    evidence["jump_bound_horizon"] = jump_horizon
    evidence["jump_bound_exact"] = exact
    evidence.update(_volume_surrogate(w))

    if math.isinf(jump):
        evidence["rule"] = "jump-condition-fails"
        return ConservativenessVerdict(INCONCLUSIVE, None, evidence)
    if not exact:
        evidence["rule"] = "jump-horizon-only"
        return ConservativenessVerdict(INCONCLUSIVE, None, evidence)
    if evidence["volume_nonincreasing"] or evidence["volume_liminf_surrogate"] < 0.5:
        evidence["rule"] = "jump+volume"
        return ConservativenessVerdict(CONSERVATIVE, "jump+volume", evidence)
    evidence["rule"] = "volume-surrogate-unclear"
    return ConservativenessVerdict(INCONCLUSIVE, None, evidence)


def mixed_adapted_check(m: MeasureSpec, horizon: int = 10_000) -> ConservativenessVerdict:
    """Adapted-metric test: per-edge bound (<= 1 by construction, verified
    numerically) plus the volume surrogate."""
    if horizon < 1000:
        raise DomainError("horizon must be at least 1000")
    cap = m.horizon_limit
    n = min(horizon, cap) if cap else horizon
    w = m.weights(n)
    evidence: dict = {"horizon": n}
    short = _finite_mass_shortcircuit(m, n, evidence)
    if short is not None:
        return short

    met = adapted_metric(m, n)
    k = np.arange(1, n, dtype=float)  # edges (k, k+1), k = 1..n-1
    sig = met.sigma
    # per-vertex bound (1/a_k) [ sigma(k,k-1)^2 b(k,k-1) + sigma(k,k+1)^2 b(k,k+1) ]
    right = sig**2 * (k * (k + 1.0) / 2.0)
    left = np.concatenate([[0.0], sig[:-1] ** 2 * (k[1:] * (k[1:] - 1.0) / 2.0)])
    per_vertex = (right + left) / w[: n - 1]
    evidence["edge_bound_max"] = float(np.max(per_vertex))
    evidence["edge_bound_holds"] = bool(np.max(per_vertex) <= 1.0 + 1e-12)
    evidence.update(_volume_surrogate(w))

    if evidence["edge_bound_holds"] and (
        evidence["volume_nonincreasing"] or evidence["volume_liminf_surrogate"] < 0.5
    ):
        evidence["rule"] = "adapted-jump+volume"
        return ConservativenessVerdict(CONSERVATIVE, "adapted-jump+volume", evidence)
    evidence["rule"] = "volume-surrogate-unclear"
    return ConservativenessVerdict(INCONCLUSIVE, None, evidence)
