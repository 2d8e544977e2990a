"""H-representation polytopes and the set operations built on them.

A :class:`Polytope` is the set ``{x | H x <= h}``.  Rows are normalised to
unit length on construction and zero rows are stripped, so every
tolerance below is a Euclidean distance.  Values are immutable; every
operation returns a new polytope.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from typing import Optional

import numpy as np

from .errors import (
    BadCenter,
    BlowupBudget,
    DimensionMismatch,
    DimensionTooHigh,
    EmptySet,
    Unbounded,
)
from .optim import TOL_FEAS, LinearProgram, LpStatus, solve_lp

TOL_STRICT = 1e-7
ROW_CAP = 20000
MAX_VERTEX_DIM = 4

_ZERO_ROW = 1e-12


class Polytope:
    """Convex polyhedron ``{x | H x <= h}`` in R^dim.

    Args:
        H: ``(r, dim)`` array of row normals.
        h: length-``r`` offsets.
        dim: required only when ``H`` has no rows.
        irredundant: set by :func:`remove_redundancy`; callers should not
            pass it unless they know no row can be dropped.
    """

    __slots__ = ("_H", "_h", "_dim", "irredundant")

    def __init__(self, H, h, dim: Optional[int] = None, irredundant: bool = False):
        H = np.asarray(H, dtype=float)
        h = np.asarray(h, dtype=float).ravel()
        if H.size == 0:
            if dim is None:
                dim = H.shape[1] if H.ndim == 2 else 0
            H = np.zeros((0, dim))
        H = np.atleast_2d(H)
        if dim is not None and H.shape[1] != dim:
            raise DimensionMismatch(f"H has {H.shape[1]} columns, expected {dim}")
        if H.shape[0] != h.size:
            raise DimensionMismatch(f"H has {H.shape[0]} rows but h has {h.size}")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(h))):
            raise ValueError("polytope data must be finite")
        norms = np.linalg.norm(H, axis=1)
        zero = norms <= _ZERO_ROW
        if np.any(zero & (h < -TOL_FEAS)):
            # 0 <= negative: the set is empty
            H, h = _empty_rows(H.shape[1])
        else:
            keep = ~zero
            # rows already of unit length are left untouched so that
            # serialization round-trips bit for bit
            norms = np.where(np.abs(norms - 1.0) <= 4e-16, 1.0, norms)
            H = H[keep] / norms[keep, None]
            h = h[keep] / norms[keep]
        H.setflags(write=False)
        h.setflags(write=False)
        self._H = H
        self._h = h
        self._dim = H.shape[1]
        self.irredundant = irredundant

    # construction helpers
    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        d = lo.size
        H = np.vstack([np.eye(d), -np.eye(d)])
        return cls(H, np.concatenate([hi, -lo]))

    @classmethod
    def empty(cls, dim: int) -> "Polytope":
        H, h = _empty_rows(dim)
        return cls(H, h)

    @classmethod
    def point(cls, x) -> "Polytope":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls.box(x, x)

    @classmethod
    def from_dict(cls, data: dict) -> "Polytope":
        H = np.asarray(data["H"], dtype=float)
        dim = data.get("dim")
        if H.size == 0 and dim is None:
            raise ValueError("polytope without rows needs an explicit 'dim'")
        return cls(H.reshape(-1, dim) if dim is not None else H, data["h"], dim=dim)

    @classmethod
    def from_json(cls, text: str) -> "Polytope":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"H": self._H.tolist(), "h": self._h.tolist(), "dim": self._dim}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    # accessors
    @property
    def H(self) -> np.ndarray:
        return self._H

    @property
    def h(self) -> np.ndarray:
        return self._h

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def n_rows(self) -> int:
        return self._H.shape[0]

    def contains_point(self, x, tol: float = TOL_FEAS) -> bool:
        x = np.asarray(x, dtype=float).ravel()
        return bool(np.all(self._H @ x <= self._h + tol))

    def __repr__(self):
        return f"Polytope(dim={self._dim}, rows={self.n_rows})"


def _empty_rows(dim: int):
    H = np.zeros((2, dim))
    if dim:
        H[0, 0], H[1, 0] = 1.0, -1.0
        return H, np.array([-1.0, -1.0])
    return np.zeros((1, 0)), np.array([-1.0])


def _check_same_dim(P: Polytope, Q: Polytope) -> None:
    if P.dim != Q.dim:
        raise DimensionMismatch(f"dimensions differ: {P.dim} vs {Q.dim}")


# ---------------------------------------------------------------------------
# LP-backed predicates
# ---------------------------------------------------------------------------

def _bounds_1d(P: Polytope) -> tuple[float, float]:
    """Endpoints of a 1-D polytope without an LP (normalised rows are +-1)."""
    H, h = P.H[:, 0], P.h
    up, down = h[H > 0], h[H < 0]
    hi = float(up.min()) if up.size else np.inf
    lo = float(-down.min()) if down.size else -np.inf
    return lo, hi


# agrees with the solver's primal feasibility tolerance
_EMPTY_GAP_1D = 1e-10


def is_empty(P: Polytope) -> bool:
    if P.n_rows == 0:
        return False
    if P.dim == 1:
        lo, hi = _bounds_1d(P)
        return lo > hi + _EMPTY_GAP_1D
    out = solve_lp(LinearProgram(np.zeros(P.dim), P.H, P.h))
    return out.status is LpStatus.INFEASIBLE


def support(P: Polytope, theta) -> float:
    """``max theta @ x`` over ``P``.

    Raises:
        EmptySet: ``P`` is empty.
        Unbounded: ``P`` is unbounded in direction ``theta``.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != P.dim:
        raise DimensionMismatch("direction and polytope dimensions differ")
    if not np.any(theta):
        if is_empty(P):
            raise EmptySet("support of an empty set")
        return 0.0
    if P.dim == 1:
        if is_empty(P):
            raise EmptySet("support of an empty set")
        end = _bounds_1d(P)[1 if theta[0] > 0 else 0]
        if not np.isfinite(end):
            raise Unbounded("polytope is unbounded in the requested direction")
        return float(theta[0] * end)
    out = solve_lp(LinearProgram(-theta, P.H, P.h))
    if out.status is LpStatus.INFEASIBLE:
        raise EmptySet("support of an empty set")
    if out.status is LpStatus.UNBOUNDED:
        raise Unbounded("polytope is unbounded in the requested direction")
    return -out.value


def _support_or_inf(P: Polytope, theta) -> float:
    try:
        return support(P, theta)
    except Unbounded:
        return np.inf


def is_bounded(P: Polytope) -> bool:
    """Probe ``P`` along +-unit directions (a nonempty set bounded along all
    of them is bounded)."""
    for i in range(P.dim):
        e = np.zeros(P.dim)
        e[i] = 1.0
        for s in (e, -e):
            if not np.isfinite(_support_or_inf(P, s)):
                return False
    return True


def contains(P: Polytope, Q: Polytope, tol: float = TOL_FEAS) -> bool:
    """True iff ``Q`` is a subset of ``P`` (with ``tol`` slack per row)."""
    _check_same_dim(P, Q)
    if is_empty(Q):
        return True
    for Hi, hi in zip(P.H, P.h):
        if _support_or_inf(Q, Hi) > hi + tol:
            return False
    return True


def contains_in_interior(P: Polytope, Q: Polytope, x0) -> tuple[bool, float]:
    """Decide whether ``Q`` lies in the interior of ``P`` by a single LP.

    With ``Q = {H1 x <= h1}``, ``P = {H2 x <= h2}`` and ``x0`` strictly inside
    ``P`` this solves::

        min gamma  s.t.  Lam @ H1 == H2,  Lam >= 0,  gamma >= 0,
                         Lam @ (h1 - H1 x0) <= gamma * (h2 - H2 x0)

    and reports ``(gamma* < 1 - TOL_STRICT, gamma*)``.  ``gamma*`` is the
    smallest factor with ``Q - x0`` inside ``gamma*(P - x0)``.

    Raises:
        BadCenter: ``x0`` is not strictly inside ``P``.
    """
    _check_same_dim(P, Q)
    x0 = np.asarray(x0, dtype=float).ravel()
    H1, h1 = Q.H, Q.h
    H2, h2 = P.H, P.h
    b2 = h2 - H2 @ x0
    if P.n_rows and np.any(b2 <= TOL_FEAS):
        raise BadCenter("x0 is not an interior point of the outer polytope")
    b1 = h1 - H1 @ x0
    r1, r2, d = H1.shape[0], H2.shape[0], P.dim
    if r2 == 0:
        return True, 0.0
    nlam = r2 * r1
    # variable layout: Lam row-major, then gamma
    A_eq = np.zeros((r2 * d, nlam + 1))
    b_eq = H2.ravel()
    for j in range(r2):
        A_eq[j * d:(j + 1) * d, j * r1:(j + 1) * r1] = H1.T
    A_ub = np.zeros((r2, nlam + 1))
    for j in range(r2):
        A_ub[j, j * r1:(j + 1) * r1] = b1
        A_ub[j, -1] = -b2[j]
    c = np.zeros(nlam + 1)
    c[-1] = 1.0
    out = solve_lp(LinearProgram(c, A_ub, np.zeros(r2), A_eq, b_eq, lb=np.zeros(nlam + 1)))
    if not out.optimal:
        return False, np.inf
    gamma = max(out.value, 0.0)
    return bool(gamma < 1.0 - TOL_STRICT), gamma


def chebyshev_center(P: Polytope) -> tuple[np.ndarray, float]:
    """Centre and radius of a largest ball inside ``P`` (radius 0 when ``P``
    is lower dimensional).

    Raises:
        EmptySet: ``P`` is empty.
        Unbounded: ``P`` contains arbitrarily large balls.
    """
    d = P.dim
    if d == 1 and P.n_rows:
        if is_empty(P):
            raise EmptySet("Chebyshev centre of an empty polytope")
        lo, hi = _bounds_1d(P)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise Unbounded("Chebyshev ball is unbounded")
        return np.array([0.5 * (lo + hi)]) + 0.0, max(0.5 * (hi - lo), 0.0) + 0.0
    A = np.hstack([P.H, np.ones((P.n_rows, 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    lb = np.full(d + 1, -np.inf)
    lb[-1] = 0.0
    out = solve_lp(LinearProgram(c, A, P.h, lb=lb))
    if out.status is LpStatus.INFEASIBLE:
        raise EmptySet("Chebyshev centre of an empty polytope")
    if out.status is LpStatus.UNBOUNDED:
        raise Unbounded("Chebyshev ball is unbounded")
    return out.x[:d] + 0.0, max(float(out.x[-1]), 0.0) + 0.0


def remove_redundancy(P: Polytope, tol: float = TOL_FEAS) -> Polytope:
    """Drop every row whose removal leaves the set unchanged.

    Row ``i`` is kept iff maximising ``H_i x`` over the current rows, with
    row ``i`` relaxed by one unit, exceeds ``h_i + tol``.  Exact duplicate
    normals are collapsed first; the remaining rows are scanned in order.
    """
    if P.irredundant:
        return P
    if P.dim == 1:
        if is_empty(P):
            raise EmptySet("remove_redundancy on an empty polytope")
        lo, hi = _bounds_1d(P)
        rows = [(r, b) for r, b in (([1.0], hi), ([-1.0], -lo)) if np.isfinite(b)]
        return Polytope([r for r, _ in rows], [b for _, b in rows], dim=1, irredundant=True)
    H, h = _dedupe_rows(P.H, P.h)
    keep = np.ones(H.shape[0], dtype=bool)
    for i in range(H.shape[0]):
        hh = h[keep].copy()
        idx = np.nonzero(keep)[0]
        hh[np.searchsorted(idx, i)] += 1.0
        out = solve_lp(LinearProgram(-H[i], H[keep], hh))
        if out.status is LpStatus.INFEASIBLE:
            raise EmptySet("remove_redundancy on an empty polytope")
        if -out.value <= h[i] + tol:
            keep[i] = False
    return Polytope(H[keep], h[keep], dim=P.dim, irredundant=True)


def _dedupe_rows(H: np.ndarray, h: np.ndarray, tol: float = 1e-12):
    """Collapse rows with (numerically) identical normals, keeping the
    tightest offset at the position of the last copy."""
    if H.shape[0] < 2:
        return H.copy(), h.copy()
    keys = np.round(H / tol).astype(np.int64)
    order: dict[tuple, int] = {}
    best: dict[tuple, float] = {}
    for i, key in enumerate(map(tuple, keys)):
        if key in best:
            best[key] = min(best[key], h[i])
        else:
            best[key] = h[i]
        order[key] = i
    rows = sorted(order.items(), key=lambda kv: kv[1])
    idx = [i for _, i in rows]
    return H[idx].copy(), np.array([best[k] for k, _ in rows])


# ---------------------------------------------------------------------------
# elementary set algebra
# ---------------------------------------------------------------------------

def intersect(P: Polytope, Q: Polytope) -> Polytope:
    _check_same_dim(P, Q)
    return Polytope(np.vstack([P.H, Q.H]), np.concatenate([P.h, Q.h]), dim=P.dim)


def scale(P: Polytope, alpha: float) -> Polytope:
    """``alpha * P`` for ``alpha >= 0``; ``alpha == 0`` yields the origin
    (or the empty set when ``P`` is empty)."""
    if alpha < 0:
        raise ValueError("scale factor must be nonnegative")
    if alpha == 0:
        if is_empty(P):
            return Polytope.empty(P.dim)
        return Polytope.point(np.zeros(P.dim))
    return Polytope(P.H, alpha * P.h, dim=P.dim, irredundant=P.irredundant)


def translate(P: Polytope, t) -> Polytope:
    """``P + t``."""
    t = np.asarray(t, dtype=float).ravel()
    if t.size != P.dim:
        raise DimensionMismatch("translation vector has wrong length")
    return Polytope(P.H, P.h + P.H @ t, dim=P.dim, irredundant=P.irredundant)


def product(P: Polytope, Q: Polytope) -> Polytope:
    """Cartesian product ``P x Q``."""
    H = np.block([
        [P.H, np.zeros((P.n_rows, Q.dim))],
        [np.zeros((Q.n_rows, P.dim)), Q.H],
    ])
    return Polytope(H, np.concatenate([P.h, Q.h]), dim=P.dim + Q.dim)


def pontryagin_diff(P: Polytope, Q: Polytope) -> Polytope:
    """``P - Q = {x | x + Q subset of P}``; may be empty."""
    _check_same_dim(P, Q)
    if is_empty(Q):
        raise EmptySet("cannot erode by an empty set")
    s = np.array([support(Q, Hi) for Hi in P.H])
    return Polytope(P.H, P.h - s, dim=P.dim)


def minkowski_sum(P: Polytope, Q: Polytope, row_cap: int = ROW_CAP) -> Polytope:
    """``P + Q`` as the shadow of ``{(z, y) | z - y in P, y in Q}`` on ``z``."""
    _check_same_dim(P, Q)
    d = P.dim
    if is_empty(P) or is_empty(Q):
        return Polytope.empty(d)
    H = np.block([
        [P.H, -P.H],
        [np.zeros((Q.n_rows, d)), Q.H],
    ])
    lifted = Polytope(H, np.concatenate([P.h, Q.h]), dim=2 * d)
    return project(lifted, d, row_cap=row_cap)


def project(P: Polytope, keep: int, row_cap: int = ROW_CAP) -> Polytope:
    """Shadow of ``P`` on its first ``keep`` coordinates.

    Trailing variables are removed one at a time by Fourier-Motzkin
    elimination, pruning redundant rows after every step.

    Raises:
        BlowupBudget: an intermediate system exceeds ``row_cap`` rows.
    """
    if not 0 < keep <= P.dim:
        raise ValueError(f"cannot keep {keep} of {P.dim} coordinates")
    if is_empty(P):
        return Polytope.empty(keep)
    Q = remove_redundancy(P)
    for j in range(P.dim - 1, keep - 1, -1):
        H, h = _fm_eliminate(Q.H, Q.h, j, row_cap)
        Q = remove_redundancy(Polytope(H, h, dim=j))
    return Q


def _fm_eliminate(H: np.ndarray, h: np.ndarray, j: int, row_cap: int):
    """Eliminate column ``j`` (the last one) from ``H x <= h``."""
    col = H[:, j]
    rest = np.delete(H, j, axis=1)
    pos = np.nonzero(col > _ZERO_ROW)[0]
    neg = np.nonzero(col < -_ZERO_ROW)[0]
    zer = np.nonzero(np.abs(col) <= _ZERO_ROW)[0]
    n_out = zer.size + pos.size * neg.size
    if n_out > row_cap:
        raise BlowupBudget(f"Fourier-Motzkin step would create {n_out} rows (cap {row_cap})")
    Hp = rest[pos] / col[pos, None]
    hp = h[pos] / col[pos]
    Hn = rest[neg] / -col[neg, None]
    hn = h[neg] / -col[neg]
    Hpair = (Hp[:, None, :] + Hn[None, :, :]).reshape(-1, rest.shape[1])
    hpair = (hp[:, None] + hn[None, :]).ravel()
    return np.vstack([rest[zer], Hpair]), np.concatenate([h[zer], hpair])


def affine_preimage(P: Polytope, M, b=None) -> Polytope:
    """``{z | M z + b in P}``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != P.dim:
        raise DimensionMismatch("map output dimension does not match polytope")
    off = P.h if b is None else P.h - P.H @ np.asarray(b, dtype=float).ravel()
    return Polytope(P.H @ M, off, dim=M.shape[1])


# ---------------------------------------------------------------------------
# vertices and comparison
# ---------------------------------------------------------------------------

def vertices(P: Polytope, merge_tol: float = 1e-8) -> np.ndarray:
    """Vertex set of a bounded, nonempty polytope of dimension <= 4.

    Every ``dim``-subset of rows is intersected; feasible intersection points
    are kept and near-duplicates merged.  Returns an ``(nv, dim)`` array.
    """
    d = P.dim
    if d > MAX_VERTEX_DIM:
        raise DimensionTooHigh(f"vertex enumeration limited to dim <= {MAX_VERTEX_DIM}")
    if is_empty(P):
        raise EmptySet("vertices of an empty polytope")
    if not is_bounded(P):
        raise Unbounded("vertices of an unbounded polytope")
    R = remove_redundancy(P)
    H, h = R.H, R.h
    combos = np.array(list(itertools.combinations(range(H.shape[0]), d)))
    if combos.size == 0:
        raise EmptySet("polytope has too few rows to have vertices")
    Ms = H[combos]
    rhs = h[combos]
    dets = np.linalg.det(Ms)
    ok = np.abs(dets) > 1e-12
    pts = np.linalg.solve(Ms[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(pts @ H.T <= h + 1e-9, axis=1)
    pts = pts[feas]
    out: list[np.ndarray] = []
    for p in pts:
        if not any(np.linalg.norm(p - q) <= merge_tol for q in out):
            out.append(p)
    if not out:
        # bounded, nonempty but no nonsingular subsystem: only possible when d == 0
        raise EmptySet("no vertices found")
    V = np.array(out)
    if d == 2:
        V = sort_ccw(V)
    return V


def sort_ccw(V: np.ndarray) -> np.ndarray:
    """Order 2-D points counterclockwise about their centroid."""
    c = V.mean(axis=0)
    ang = np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0])
    return V[np.argsort(ang, kind="stable")]


def vertices_to_csv(V: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for v in V:
        writer.writerow([repr(float(x)) for x in v])
    return buf.getvalue()


def vertices_from_csv(text: str) -> np.ndarray:
    rows = [list(map(float, r)) for r in csv.reader(io.StringIO(text)) if r]
    return np.array(rows)


def from_vertices(V) -> Polytope:
    """H-representation of the convex hull of a full-dimensional point set.

    Used for round-trip checks of exported vertex files; 1-D hulls are
    handled directly, higher dimensions go through Qhull.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[1] == 1:
        return Polytope.box(V.min(axis=0), V.max(axis=0))
    from scipy.spatial import ConvexHull

    hull = ConvexHull(V)
    return Polytope(hull.equations[:, :-1], -hull.equations[:, -1])


def equal_within(P: Polytope, Q: Polytope, eps: float) -> bool:
    """Symmetric ``eps``-equality tested on the normalised rows of both sets.

    ``P`` must satisfy every row of ``Q`` inflated by ``eps`` and vice versa.
    """
    _check_same_dim(P, Q)
    ep, eq = is_empty(P), is_empty(Q)
    if ep or eq:
        return ep and eq
    for A, B in ((P, Q), (Q, P)):
        for Hi, hi in zip(B.H, B.h):
            if _support_or_inf(A, Hi) > hi + eps:
                return False
    return True


def max_norm(P: Polytope) -> float:
    """``max ||x||_2`` over ``P`` (attained at a vertex)."""
    return float(np.max(np.linalg.norm(vertices(P), axis=1)))


def interval(P: Polytope) -> tuple[float, float]:
    """Endpoints of a 1-D polytope."""
    if P.dim != 1:
        raise DimensionMismatch("interval() needs a 1-D polytope")
    return -support(P, [-1.0]), support(P, [1.0])

