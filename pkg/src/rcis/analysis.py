"""Convergence diagnostics for backward-reachable-set iterations.

Covers Hausdorff distances between polytopes, the LP test for the seed
lying strictly inside a later iterate, contraction certificates and the
exponential rate constants they imply.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import geom
from .errors import (
    DimensionTooHigh,
    DomainError,
    EmptySet,
    NoCertificateFound,
    NonPositiveDistance,
    PreconditionError,
)
from .geom import MAX_VERTEX_DIM, TOL_STRICT, Polytope
from .optim import TOL_FEAS, nearest_point
from .reach import IterationTrace, TraceStatus, pre
from .system import Problem

logger = logging.getLogger(__name__)

RADIUS_TOL = 1e-9
N_CAP = 8
BETA0_GRID = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))  # 0.50, 0.55, ..., 0.95


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------

def hausdorff(P: Polytope, Q: Polytope) -> float:
    """Hausdorff distance between two bounded, nonempty polytopes.

    The distance to a convex set is convex, so each one-sided supremum is
    attained at a vertex and only vertices need to be projected.
    """
    if P.dim > MAX_VERTEX_DIM or Q.dim > MAX_VERTEX_DIM:
        raise DimensionTooHigh(f"hausdorff limited to dim <= {MAX_VERTEX_DIM}")
    if geom.is_empty(P) or geom.is_empty(Q):
        raise EmptySet("hausdorff distance needs nonempty sets")
    return max(_one_sided(P, Q), _one_sided(Q, P))


def _one_sided(P: Polytope, Q: Polytope) -> float:
    """``sup_{x in P} d(x, Q)``."""
    return max(nearest_point(Q.H, Q.h, v)[1] for v in geom.vertices(P))


def distances_to(trace: IterationTrace, reference: Polytope) -> list:
    """``[(k, d(C_k, reference)), ...]`` over the nonempty iterates."""
    return [(k, hausdorff(C, reference)) for k, C in enumerate(trace.sets)
            if not geom.is_empty(C)]


# ---------------------------------------------------------------------------
# seed condition
# ---------------------------------------------------------------------------

@dataclass
class SeedConditionReport:
    """``k0`` is the first step whose iterate holds ``C_0`` in its interior;
    ``gammas[k-1]`` is the LP value for ``C_k`` (``inf`` when ``C_k`` has no
    interior)."""

    k0: Optional[int]
    gammas: list
    degenerate: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.k0 is not None


def check_seed_condition(trace: IterationTrace) -> SeedConditionReport:
    """Run the interiority LP for ``C_0`` against every later iterate.

    One interior point is reused for the whole sweep: the Chebyshev centre of
    the first iterate with nonempty interior.  For a growing trace it stays
    interior to every later iterate, and with a fixed centre the LP values
    cannot increase along the trace.  Iterates without interior are listed in
    ``degenerate`` and get ``gamma = inf``.
    """
    C0 = trace.sets[0]
    x0 = None
    gammas, degenerate = [], []
    k0 = None
    for k, C in enumerate(trace.sets[1:], start=1):
        if geom.is_empty(C):
            gammas.append(math.inf)
            degenerate.append(k)
            continue
        center, radius = geom.chebyshev_center(C)
        if radius <= RADIUS_TOL:
            gammas.append(math.inf)
            degenerate.append(k)
            continue
        if x0 is None or not np.all(C.h - C.H @ x0 > TOL_FEAS):
            x0 = center
        inside, gamma = geom.contains_in_interior(C, C0, x0)
        gammas.append(gamma)
        if inside and k0 is None:
            k0 = k
    return SeedConditionReport(k0, gammas, degenerate)


# ---------------------------------------------------------------------------
# contraction certificates
# ---------------------------------------------------------------------------

def _check_gamma_lambda(gamma: float, lam: float) -> None:
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")


def certify_contractive(C: Polytope, gamma: float, lam: float, N: int, p: Problem) -> bool:
    """True iff ``pre^N(lam*gamma*C)`` contains ``gamma*C``, i.e. ``gamma*C``
    is ``N``-step ``lam``-contractive.  ``p`` must have the origin as a
    stationary point."""
    _check_gamma_lambda(gamma, lam)
    if N < 1:
        raise DomainError("N must be at least 1")
    X = geom.scale(C, lam * gamma)
    for _ in range(N):
        X = pre(X, p)
        if geom.is_empty(X):
            return False
    return geom.contains(X, geom.scale(C, gamma))


def containment_scale(X: Polytope, C: Polytope) -> float:
    """Largest ``beta >= 0`` with ``beta * C`` inside ``X`` (``C`` contains
    the origin)."""
    beta = math.inf
    for Hi, hi in zip(X.H, X.h):
        s = geom.support(C, Hi)
        if s > TOL_FEAS:
            beta = min(beta, hi / s)
        elif hi < -TOL_FEAS:
            return 0.0
    return max(beta, 0.0)


@dataclass
class RateCertificate:
    """Constants of ``d(C_{N0+kN}, C_ref) <= c * a**k``.

    ``a = (1-gamma)/(1-lam*gamma)`` and ``c = (1-lam*gamma) * max ||v||``
    over the vertices of ``reference``.
    """

    N0: int
    N: int
    gamma: float
    lam: float
    a: float
    c: float
    reference: Optional[Polytope] = field(default=None, repr=False, compare=False)
    reference_is_fixed_point: bool = True

    def to_dict(self) -> dict:
        return {"N0": self.N0, "N": self.N, "gamma": self.gamma, "lambda": self.lam,
                "a": self.a, "c": self.c}

    @classmethod
    def from_dict(cls, d: dict) -> "RateCertificate":
        return cls(int(d["N0"]), int(d["N"]), float(d["gamma"]), float(d["lambda"]),
                   float(d["a"]), float(d["c"]))


def rate_constants(gamma: float, lam: float, radius: float) -> tuple[float, float]:
    """``(a, c)`` for given ``gamma``, ``lam`` and ``radius = max ||x||``."""
    _check_gamma_lambda(gamma, lam)
    lg = lam * gamma
    return (1.0 - gamma) / (1.0 - lg), (1.0 - lg) * radius


def search_certificate(trace: IterationTrace, p: Problem, reference: Optional[Polytope] = None,
                       beta0_grid: Sequence[float] = BETA0_GRID, n_cap: int = N_CAP) -> RateCertificate:
    """Search for ``(N0, N, gamma, lam)`` with ``gamma*C_ref`` ``N``-step
    ``lam``-contractive and ``C_{N0}`` containing ``lam*gamma*C_ref``.

    For each inner scale ``beta0 = lam*gamma`` on ``beta0_grid`` and each
    ``N = 1..n_cap`` the largest admissible outer scale
    ``beta1 = gamma`` is computed exactly from ``pre^N(beta0*C_ref)``.  The
    first ``N`` admitting some ``beta1 > beta0`` wins; within it the
    smallest rate ``a`` is taken, ties going to the smaller ``beta0``.

    ``reference`` defaults to the final iterate.  The problem must be
    recentred (origin stationary, inside ``C_ref``) and the trace must
    satisfy the seed condition.

    Raises:
        PreconditionError: seed condition fails or the problem is not
            centred.
        NoCertificateFound: nothing on the grid works.
    """
    report = check_seed_condition(trace)
    if not report.holds:
        raise PreconditionError("seed condition fails; no rate certificate is implied")
    ref = trace.final if reference is None else reference
    at_fixed_point = reference is not None or trace.status is TraceStatus.FIXED_POINT
    if not at_fixed_point:
        logger.warning("trace ended %s; certificate is relative to C_K, not C_max",
                       trace.status.value)
    n, m, l = p.system.n, p.system.m, p.system.l
    if not (p.safe.contains_point(np.zeros(n + m)) and p.disturbance.contains_point(np.zeros(l))):
        raise PreconditionError("origin is not a stationary point; recenter the problem first")
    if not np.all(ref.h > TOL_FEAS):
        raise PreconditionError("reference set must contain the origin in its interior")

    N0s = {}
    frontier = {}
    for b0 in beta0_grid:
        inner = geom.scale(ref, b0)
        for k, C in enumerate(trace.sets):
            if geom.contains(C, inner):
                N0s[b0] = k
                frontier[b0] = inner
                break
    if not N0s:
        raise NoCertificateFound("no iterate contains any scaled reference set on the grid")

    radius = geom.max_norm(ref)
    for N in range(1, n_cap + 1):
        best = None
        for b0 in list(frontier):
            X = pre(frontier[b0], p)
            frontier[b0] = X
            if geom.is_empty(X):
                del frontier[b0]
                continue
            b1 = min(containment_scale(X, ref), 1.0)
            if b1 <= b0 + 1e-12:
                continue
            a = (1.0 - b1) / (1.0 - b0)
            if best is None or a < best[0] - 1e-12:
                best = (a, b0, b1)
        if best is not None:
            a, b0, b1 = best
            c = (1.0 - b0) * radius
            return RateCertificate(N0s[b0], N, b1, b0 / b1, a, c, ref, at_fixed_point)
    raise NoCertificateFound(f"no certificate with N <= {n_cap} on the beta0 grid")


def rate_bound(cert: RateCertificate, k: int) -> float:
    """``c * a**k``: bound on ``d(C_{N0+kN}, C_ref)``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return cert.c * cert.a ** k


def rate_bound_any_step(cert: RateCertificate, k: int) -> float:
    """Bound on ``d(C_{N0+k}, C_ref)`` for every ``k >= 0``, using that the
    distance does not increase along the trace:
    ``c * (a**(1/N))**(k-N+1)``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if cert.a == 0.0:
        return cert.c if k < cert.N else 0.0
    return cert.c * cert.a ** ((k - cert.N + 1) / cert.N)


def g_map(xi: float, gamma: float, lam: float) -> float:
    """Affine map ``xi -> (1-gamma)/(1-lam*gamma) xi + (1-lam) gamma/(1-lam*gamma)``.

    Defined for ``lam*gamma <= xi <= 1``; it satisfies ``g(xi) >= xi`` and
    ``g(1) == 1``.
    """
    _check_gamma_lambda(gamma, lam)
    lg = lam * gamma
    if not lg - 1e-12 <= xi <= 1.0 + 1e-12:
        raise DomainError(f"xi must lie in [lam*gamma, 1], got {xi}")
    return (1.0 - gamma) / (1.0 - lg) * xi + (1.0 - lam) * gamma / (1.0 - lg)


def g_iterate(k: int, gamma: float, lam: float) -> float:
    """``g`` composed ``k`` times, evaluated at ``lam*gamma``."""
    xi = lam * gamma
    for _ in range(k):
        xi = g_map(xi, gamma, lam)
    return xi


def one_minus_g_power(k: int, gamma: float, lam: float) -> float:
    """Closed form of ``1 - g^k(lam*gamma) = a**k (1 - lam*gamma)``."""
    _check_gamma_lambda(gamma, lam)
    lg = lam * gamma
    return ((1.0 - gamma) / (1.0 - lg)) ** k * (1.0 - lg)


# ---------------------------------------------------------------------------
# exponential envelope
# ---------------------------------------------------------------------------

class ExponentialFit(NamedTuple):
    c: float
    a: float
    underdetermined: bool = False


def fit_exponential(distances) -> ExponentialFit:
    """Least-squares fit of ``log d_k`` against ``k``, then ``c`` is raised
    just enough that ``c * a**k >= d_k`` at every given ``k``.

    A single sample yields ``(d, 1.0)`` flagged as underdetermined.
    """
    data = [(int(k), float(d)) for k, d in distances]
    if not data:
        raise ValueError("no distances to fit")
    if any(d <= 0 for _, d in data):
        raise NonPositiveDistance("all distances must be positive")
    ks = np.array([k for k, _ in data], dtype=float)
    ds = np.array([d for _, d in data])
    if len(set(ks)) < 2:
        return ExponentialFit(float(ds.max()), 1.0, True)
    slope, intercept = np.polyfit(ks, np.log(ds), 1)
    a = float(np.exp(slope))
    c = float(np.exp(intercept))
    lift = float(np.max(ds / (c * a ** ks)))
    return ExponentialFit(c * max(lift, 1.0), a, False)
