r"""Truncated operators, heat semigroup, eigenpairs, and global-property probes.

The energy matrix is the (symmetric, tridiagonal) quadratic-form matrix of
the trace energy: edge weights ``k(k+1)`` between lattice neighbours, the
killing ``N u_N^2`` on a finite support, and for the mixed support a
piecewise-linear finite-element block on (0,1] (stiffness weight x^2,
lumped mass weight 2x^2) glued to the chain at the shared node.  The
semigroup is ``exp(-t M^{-1} A)`` with M the diagonal mass.

Stiffness policy.  Families like the sparse-dyadic one produce holding
rates ``q_k = A_kk / a_k`` spanning hundreds of orders of magnitude; dense
scaling-and-squaring overflows and raw tridiagonal eigensolvers lose the
slow eigenvalues entirely (absolute error scales with the matrix norm).
Sites with ``q_k`` above a threshold relax essentially instantly, so they
are eliminated by a Schur complement of the *energy* matrix (whose entries
stay polynomial in k) and reinstated afterwards through their quasi-static
harmonic values.  The bias is of the order of the time spent in the
eliminated sites, below ``1/q``; the reduced operator is exponentiated by
a full symmetric-tridiagonal eigendecomposition (cached) or, for large
tame truncations, by uniformization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .errors import DomainError, NumericError
from .extension import FINITE, INFINITE, MIXED, SupportSpec
from .measures import MeasureSpec

__all__ = [
    "DiscreteOperator",
    "EmbeddingTailResult",
    "MixedMesh",
    "assemble",
    "decay_ratio",
    "eig_low",
    "embedding_tail",
    "evolve",
    "heat_content",
    "transience_witness",
]

STIFF_THRESHOLD = 1e8  # holding rates above this are Schur-eliminated
_SPECTRAL_LIMIT = 2000  # largest reduced dimension for the cached eigendecomposition
_UNIFORMIZATION_BUDGET = 2.0e5  # largest Lambda*t the Poisson series will walk


@dataclass(frozen=True)
class MixedMesh:
    """Nodes 0 < x_1 < ... < x_m = 1 for the finite-element block."""

    nodes: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.nodes, float)
        object.__setattr__(self, "nodes", x)
        if x.ndim != 1 or len(x) < 2:
            raise DomainError("mesh needs at least two nodes")
        if x[0] <= 0 or np.any(np.diff(x) <= 0) or x[-1] != 1.0:
            raise DomainError("mesh nodes must increase strictly from > 0 to exactly 1")

    @classmethod
    def geometric(cls, n_elements: int = 64, x_min: float = 1e-3) -> "MixedMesh":
        """Geometric grading toward 0, resolving the x^2 weight degeneracy."""
        if n_elements < 1 or not 0 < x_min < 1:
            raise DomainError("need n_elements >= 1 and 0 < x_min < 1")
        i = np.arange(n_elements + 1)
        return cls(x_min ** (1.0 - i / n_elements))


class DiscreteOperator:
    """Immutable truncated operator: tridiagonal energy matrix + diagonal mass.

    ``sites[i]`` is the lattice label of dof i (0 for mesh dofs).  Spectral
    caches are built lazily; the object is not mutated otherwise.
    """

    def __init__(self, diag, off, mass, killing, sites, bc, support, measure,
                 mesh=None, stiff_threshold=STIFF_THRESHOLD):
        self.diag = np.asarray(diag, float)
        self.off = np.asarray(off, float)
        self.mass = np.asarray(mass, float)
        self.killing = np.asarray(killing, float)
        self.sites = np.asarray(sites, int)
        self.bc = bc
        self.support = support
        self.measure = measure
        self.mesh = mesh
        self.stiff_threshold = stiff_threshold
        self.n = len(self.diag)
        if not (len(self.off) == self.n - 1 and len(self.mass) == self.n
                and len(self.killing) == self.n and len(self.sites) == self.n):
            raise DomainError("inconsistent operator array lengths")
        if np.any(self.mass <= 0) or not np.all(np.isfinite(self.mass)):
            raise NumericError("mass entries must be positive and finite")
        if not (np.all(np.isfinite(self.diag)) and np.all(np.isfinite(self.off))):
            raise NumericError("energy-matrix entries overflowed")
        self._reduced_cache = None
        self._eig_cache = None

    # -- basic linear algebra ------------------------------------------------
    def energy_matrix(self) -> np.ndarray:
        a = np.diag(self.diag)
        a += np.diag(self.off, 1) + np.diag(self.off, -1)
        return a

    def apply_energy(self, u: np.ndarray) -> np.ndarray:
        v = self.diag * u
        v[:-1] += self.off * u[1:]
        v[1:] += self.off * u[:-1]
        return v

    def quadratic_form(self, u) -> float:
        u = np.asarray(u, float)
        if len(u) != self.n:
            raise DomainError(f"vector length {len(u)} != dimension {self.n}")
        return float(np.sum(self.diag * u * u) + 2.0 * np.sum(self.off * u[:-1] * u[1:]))

    def site_index(self, site: int) -> int:
        hits = np.flatnonzero(self.sites == site)
        if len(hits) != 1:
            raise DomainError(f"site {site} not represented in the operator")
        return int(hits[0])

    def holding_rates(self) -> np.ndarray:
        return self.diag / self.mass

    # -- stiff-site Schur reduction -------------------------------------------
    def _reduced(self):
        if self._reduced_cache is not None:
            return self._reduced_cache
        n = self.n
        slow = self.holding_rates() <= self.stiff_threshold
        if not slow.any():
            raise NumericError("every site is stiff at this threshold; nothing to evolve")
        conserves = self.bc == "reflecting" and np.all(self.killing == 0.0)
        if slow.all():
            self._reduced_cache = (
                self.diag.copy(), self.off.copy(), self.mass.copy(),
                np.arange(n), [],
            )
            return self._reduced_cache
        idx = np.flatnonzero(slow)
        pos = {g: r for r, g in enumerate(idx)}
        d2 = self.diag[idx].copy()
        off2 = np.zeros(max(len(idx) - 1, 0))
        runs = []
        fast = ~slow
        i = 0
        while i < n:
            if not fast[i]:
                i += 1
                continue
            j = i
            while j + 1 < n and fast[j + 1]:
                j += 1
            mlen = j - i + 1
            ab = np.zeros((3, mlen))
            ab[1] = self.diag[i : j + 1]
            if mlen > 1:
                ab[0, 1:] = self.off[i:j]
                ab[2, :-1] = self.off[i:j]
            cp = self.off[i - 1] if i > 0 else 0.0
            cn = self.off[j] if j < n - 1 else 0.0
            rhs = np.zeros((mlen, 2))
            if cp != 0.0:
                rhs[0, 0] = -cp
            if cn != 0.0:
                rhs[-1, 1] = -cn
            sol = solve_banded((1, 1), ab, rhs)
            if i > 0:
                d2[pos[i - 1]] += cp * sol[0, 0]
            if j < n - 1:
                d2[pos[j + 1]] += cn * sol[-1, 1]
            if i > 0 and j < n - 1:
                off2[pos[i - 1]] += cn * sol[-1, 0]  # A'_pn = -cp cn (B^{-1})_{1m}
            runs.append((i, j, sol))
            i = j + 1
        for r in range(len(idx) - 1):
            if idx[r + 1] == idx[r] + 1:
                off2[r] += self.off[idx[r]]
        if conserves:
            # Schur preserves zero row sums exactly; restore against rounding
            d2 = -(np.concatenate([[0.0], off2]) + np.concatenate([off2, [0.0]]))
        self._reduced_cache = (d2, off2, self.mass[idx], idx, runs)
        return self._reduced_cache

    def _harmonic_fill(self, full: np.ndarray) -> np.ndarray:
        """Set eliminated entries of `full` to their quasi-static harmonic values."""
        _, _, _, idx, runs = self._reduced()
        for (i, j, sol) in runs:
            left = full[i - 1] if i > 0 else 0.0
            right = full[j + 1] if j + 1 < self.n else 0.0
            full[i : j + 1] = sol[:, 0] * left + sol[:, 1] * right
        return full

    def _eig_reduced(self):
        if self._eig_cache is None:
            d2, off2, m2, _, _ = self._reduced()
            sd = d2 / m2
            so = off2 / np.sqrt(m2[:-1] * m2[1:]) if len(off2) else off2
            theta, u = eigh_tridiagonal(sd, so)
            self._eig_cache = (theta, u, np.sqrt(m2))
        return self._eig_cache


def _fem_block(mesh: MixedMesh):
    """Exact P1 stiffness (weight x^2) and lumped mass (weight 2x^2) on (0,1]."""
    x = mesh.nodes
    a, b = x[:-1], x[1:]
    h = b - a
    stiff = (b**3 - a**3) / (3.0 * h * h)
    lump_left = 2.0 / h * (b**4 / 12.0 - a**3 * b / 3.0 + a**4 / 4.0)
    lump_right = 2.0 / h * (b**4 / 4.0 - a * b**3 / 3.0 + a**4 / 12.0)
    nn = len(x)
    diag = np.zeros(nn)
    mass = np.zeros(nn)
    diag[:-1] += stiff
    diag[1:] += stiff
    mass[:-1] += lump_left
    mass[1:] += lump_right
    return diag, -stiff, mass


def assemble(
    m: MeasureSpec,
    support: SupportSpec,
    N: int | None = None,
    bc: str = "absorbing",
    mesh: MixedMesh | None = None,
    stiff_threshold: float = STIFF_THRESHOLD,
) -> DiscreteOperator:
    """Build the truncated operator for a measure and support.

    bc applies at the lattice truncation: "absorbing" keeps the edge weight
    N(N+1) pointing at the dropped neighbour (default, honest for
    conservativeness probes), "reflecting" drops it.  The finite support is
    exact (no truncation), with killing N at the last site.  The mixed
    support requires a mesh and couples it to the chain at x = 1 = site 1.
    """
    if bc not in ("absorbing", "reflecting"):
        raise DomainError(f"bc must be 'absorbing' or 'reflecting', got {bc!r}")
    if support.kind == FINITE:
        if N is None:
            N = support.N
        if N != support.N:
            raise DomainError("finite support is exact: N must equal support.N")
    else:
        if N is None:
            raise DomainError("lattice truncation N is required")
    if N < 3:
        raise DomainError("need N >= 3")
    if (mesh is None) != (support.kind != MIXED):
        raise DomainError("mesh must be given exactly for the mixed support")

    k = np.arange(1, N + 1, dtype=float)
    w = k * (k + 1.0)  # edge weight between k and k+1
    a = m.weights(N)

    if support.kind == MIXED:
        fem_diag, fem_off, fem_mass = _fem_block(mesh)
        nn = len(mesh.nodes)
        n = nn + N - 1
        diag = np.zeros(n)
        off = np.zeros(n - 1)
        mass = np.zeros(n)
        diag[:nn] = fem_diag
        off[: nn - 1] = fem_off
        mass[:nn] = fem_mass
        mass[nn - 1] += a[0]  # coupling node carries the FEM lump plus a_1
        mass[nn:] = a[1:]
        off[nn - 1 :] = -w[: N - 1]
        diag[nn - 1] += w[0]
        diag[nn:] = w[: N - 1] + np.concatenate(
            [w[1 : N - 1], [w[N - 1] if bc == "absorbing" else 0.0]]
        )
        killing = np.zeros(n)
        sites = np.concatenate([np.zeros(nn - 1, int), np.arange(1, N + 1)])
        return DiscreteOperator(diag, off, mass, killing, sites, bc, support, m,
                                mesh, stiff_threshold)

    diag = np.zeros(N)
    off = -w[: N - 1]
    diag[0] = w[0]
    killing = np.zeros(N)
    if support.kind == FINITE:
        diag[1:] = w[: N - 1] + np.concatenate([w[1 : N - 1], [0.0]])
        killing[N - 1] = float(N)
        diag += killing
        bc = "exact"
    else:
        diag[1:] = w[: N - 1] + np.concatenate(
            [w[1 : N - 1], [w[N - 1] if bc == "absorbing" else 0.0]]
        )
    sites = np.arange(1, N + 1)
    return DiscreteOperator(diag, off, mass=a, killing=killing, sites=sites, bc=bc,
                            support=support, measure=m, mesh=None,
                            stiff_threshold=stiff_threshold)


def _poisson_weights(lam_t: float):
    """Poisson(lam_t) pmf up to the index where all but ~1e-15 of the mass sits."""
    from scipy.special import gammaln

    hi = int(lam_t + 14.0 * math.sqrt(lam_t + 1.0) + 40.0)
    mvals = np.arange(hi + 1)
    logw = mvals * math.log(max(lam_t, 1e-300)) - lam_t - gammaln(mvals + 1.0)
    return np.exp(logw)


def _evolve_uniformization(d2, off2, m2, t, v):
    ld = d2 / m2
    lam = float(np.max(ld)) * (1.0 + 1e-12) + 1e-300
    weights = _poisson_weights(lam * t)
    pd = 1.0 - ld / lam
    pr = -off2 / (m2[:-1] * lam)  # P[i, i+1]
    pl = -off2 / (m2[1:] * lam)  # P[i+1, i]
    acc = weights[0] * v
    cur = v
    for mth in range(1, len(weights)):
        nxt = pd * cur
        nxt[:-1] += pr * cur[1:]
        nxt[1:] += pl * cur[:-1]
        cur = nxt
        wm = weights[mth]
        if wm != 0.0:
            acc = acc + wm * cur
    return acc


def evolve(op: DiscreteOperator, t: float, u0, method: str = "auto") -> np.ndarray:
    """Apply exp(-t M^{-1} A) to u0.

    method "auto" uses the cached spectral route for reduced dimension up to
    2000, and uniformization above that when the Poisson budget Lambda*t
    allows; "spectral" and "uniformization" force a route.
    """
    u0 = np.asarray(u0, float)
    if len(u0) != op.n:
        raise DomainError(f"vector length {len(u0)} != dimension {op.n}")
    if t < 0:
        raise DomainError("time must be nonnegative")
    if t == 0:
        return u0.copy()
    d2, off2, m2, idx, _ = op._reduced()
    v = u0[idx]
    if method == "auto":
        if len(d2) <= _SPECTRAL_LIMIT:
            method = "spectral"
        else:
            lam_t = float(np.max(d2 / m2)) * t
            method = "uniformization" if lam_t <= _UNIFORMIZATION_BUDGET else "spectral"
    if method == "spectral":
        theta, u, sqm = op._eig_reduced()
        y = u @ (np.exp(-t * theta) * (u.T @ (sqm * v))) / sqm
    elif method == "uniformization":
        y = _evolve_uniformization(d2, off2, m2, t, v)
    else:
        raise DomainError(f"unknown evolve method {method!r}")
    out = np.zeros(op.n)
    out[idx] = y
    return op._harmonic_fill(out)


def heat_content(op: DiscreteOperator, t: float, site: int = 1) -> float:
    """Component at `site` of exp(-t M^{-1} A) applied to the constant 1."""
    if t <= 0:
        raise DomainError("heat content needs t > 0")
    res = evolve(op, t, np.ones(op.n))
    return float(res[op.site_index(site)])


def _refine_pair(op: DiscreteOperator, th: float, v: np.ndarray, steps: int = 3):
    """Rayleigh-quotient inverse iteration against the full (graded) matrix."""
    for _ in range(steps):
        resid = op.apply_energy(v) - th * op.mass * v
        if float(np.linalg.norm(resid)) <= 1e-10 * float(np.linalg.norm(v)):
            break
        ab = np.zeros((3, op.n))
        ab[1] = op.diag - th * op.mass
        ab[0, 1:] = op.off
        ab[2, :-1] = op.off
        try:
            x = solve_banded((1, 1), ab, op.mass * v)
        except np.linalg.LinAlgError:
            break
        nrm = math.sqrt(float(np.sum(op.mass * x * x)))
        if nrm == 0 or not math.isfinite(nrm):
            break
        x /= nrm
        if float(np.sum(x * op.mass * v)) < 0:
            x = -x
        v = x
        th = float(np.sum(v * op.apply_energy(v)) / np.sum(op.mass * v * v))
    return th, v


def eig_low(op: DiscreteOperator, count: int):
    """Smallest `count` generalized eigenpairs A v = theta M v.

    A reduced tridiagonal solve seeds each pair; eliminated stiff sites are
    filled with their harmonic values and the pair is polished by inverse
    iteration on the full matrix.  Eigenvectors come back mass-orthonormal,
    eigenvalues nondecreasing and >= 0, and every pair satisfies
    ``|A v - theta M v| / |v| <= 1e-8`` or a NumericError reports the
    achieved residual.
    """
    d2, off2, m2, idx, _ = op._reduced()
    nred = len(d2)
    if not 1 <= count <= nred:
        raise DomainError(
            f"count must lie in 1..{nred} (reduced dimension; {op.n - nred} stiff"
            " sites are eliminated)"
        )
    sd = d2 / m2
    so = off2 / np.sqrt(m2[:-1] * m2[1:]) if len(off2) else off2
    theta, w = eigh_tridiagonal(sd, so, select="i", select_range=(0, count - 1))
    mat_scale = float(np.max(np.abs(sd))) + 2.0 * float(np.max(np.abs(so), initial=0.0))
    pairs = []
    for i in range(count):
        full = np.zeros(op.n)
        full[idx] = w[:, i] / np.sqrt(m2)
        op._harmonic_fill(full)
        full /= math.sqrt(float(np.sum(op.mass * full * full)))
        th = float(theta[i])
        th, full = _refine_pair(op, th, full)
        if th < 0:
            if th < -1e-9 * mat_scale:
                raise NumericError(f"eigenvalue {th} violates positive semidefiniteness")
            th = 0.0  # rounding noise on the energy-null direction
        resid = op.apply_energy(full) - th * op.mass * full
        rel = float(np.linalg.norm(resid)) / float(np.linalg.norm(full))
        if rel > 1e-8:
            raise NumericError(f"eigenpair {i} residual {rel:.2e} exceeds 1e-8")
        pairs.append((th, full))
    pairs.sort(key=lambda p: p[0])
    return pairs


def decay_ratio(u, op: DiscreteOperator) -> float:
    """max over lattice sites of sqrt(k) |u_k| / sqrt(u^T A u)."""
    u = np.asarray(u, float)
    energy = op.quadratic_form(u)
    if energy <= 0:
        raise DomainError("decay ratio needs a vector with positive energy")
    lattice = op.sites >= 1
    return float(
        np.max(np.sqrt(op.sites[lattice].astype(float)) * np.abs(u[lattice]))
        / math.sqrt(energy)
    )


@dataclass(frozen=True)
class EmbeddingTailResult:
    tail_sum: float
    tail_bound_beyond_horizon: float | None
    empirical_sup: float
    trials: int


def embedding_tail(
    m: MeasureSpec,
    p: float,
    tail_start: int,
    op: DiscreteOperator,
    trials: int = 200,
    seed: int = 0,
) -> EmbeddingTailResult:
    """Tail sum ``sum_{k >= K} a_k / k^{p/2}`` plus the empirical sup of the
    lp(mu)-norm^p over unit-energy vectors supported in [K, N]."""
    if p < 1:
        raise DomainError("p must be at least 1")
    q = p / 2.0
    analytic = m.tail_ak_over_kq(max(tail_start, 2), q)
    if analytic is not None and math.isinf(analytic):
        raise DomainError(f"sum a_k / k^{q} diverges for this measure; embedding hypothesis fails")
    lattice_sites = op.sites[op.sites >= 1]
    n_top = int(lattice_sites.max())
    if not 1 <= tail_start < n_top:
        raise DomainError("tail_start must lie inside the represented lattice range")
    ks = np.arange(tail_start, n_top + 1, dtype=float)
    w = m.weights(n_top)[tail_start - 1 :]
    tail_sum = float(np.sum(w / ks**q))
    beyond = m.tail_ak_over_kq(n_top + 1, q)

    rng = np.random.default_rng(seed)
    dofs = np.flatnonzero(op.sites >= tail_start)
    sup = 0.0
    for trial in range(trials):
        u = np.zeros(op.n)
        if trial < len(dofs):
            u[dofs[trial]] = 1.0  # basis candidates first
        else:
            pick = rng.choice(dofs, size=min(10, len(dofs)), replace=False)
            u[pick] = rng.standard_normal(len(pick))
        en = op.quadratic_form(u)
        if en <= 0:
            continue
        u /= math.sqrt(en)
        lat = op.sites >= 1
        lp = float(np.sum(np.abs(u[lat]) ** p * m.weights(n_top)[op.sites[lat] - 1]))
        sup = max(sup, lp)
    return EmbeddingTailResult(tail_sum, beyond, sup, trials)


def transience_witness(
    m: MeasureSpec, op: DiscreteOperator, trials: int = 1000, seed: int = 0
) -> float:
    """max over random finitely supported u of sum_k |u_k| e^{-k} / sqrt(u^T A u)."""
    if trials < 1:
        raise DomainError("need at least one trial")
    rng = np.random.default_rng(seed)
    lat = np.flatnonzero(op.sites >= 1)
    gk = np.exp(-op.sites[lat].astype(float))
    best = 0.0
    for trial in range(trials):
        u = np.zeros(op.n)
        if trial == 0:
            u[lat[0]] = 1.0  # e_1: e^{-1}/sqrt(2)
        else:
            size = int(rng.integers(1, 11))
            pick = rng.choice(lat, size=min(size, len(lat)), replace=False)
            u[pick] = rng.standard_normal(len(pick))
        en = op.quadratic_form(u)
        if en <= 0:
            continue
        best = max(best, float(np.sum(np.abs(u[lat]) * gk)) / math.sqrt(en))
    return best
