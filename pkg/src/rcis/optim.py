"""Linear-program and nearest-point solvers used by every geometric predicate.

Two LP back ends share one contract:

* ``"highs"`` (default) wraps :func:`scipy.optimize.linprog` with tightened
  feasibility tolerances.
* ``"dense"`` is a self-contained two-phase tableau simplex. It uses
  Dantzig pricing and falls back to Bland's rule once it detects a run of
  degenerate pivots.

Problems here are small (tens to a few hundred rows), so dense storage is
fine for both.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import EmptySet, NumericFailure

logger = logging.getLogger(__name__)

# global tolerances
TOL_FEAS = 1e-9
TOL_OBJ = 1e-8
TOL_QP = 1e-7

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``minimize c @ x  s.t.  A @ x <= b,  A_eq @ x == b_eq,  x >= lb``.

    Variables are free unless ``lb`` gives a finite lower bound.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lb: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        nvar = c.size
        A = np.asarray(self.A, dtype=float).reshape(-1, nvar)
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise ValueError(f"constraint matrix has {A.shape[0]} rows but rhs has {b.size} entries")
        if self.A_eq is not None:
            A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, nvar)
            b_eq = np.asarray(self.b_eq, dtype=float).ravel()
            if A_eq.shape[0] != b_eq.size:
                raise ValueError("equality matrix and rhs disagree in length")
        else:
            A_eq = np.zeros((0, nvar))
            b_eq = np.zeros(0)
        lb = np.full(nvar, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float).ravel()
        if lb.size != nvar:
            raise ValueError("lower-bound vector has wrong length")
        for arr in (c, A, b, A_eq, b_eq):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "lb", lb)

    @property
    def nvar(self) -> int:
        return self.c.size

    def max_violation(self, x: np.ndarray) -> float:
        viol = 0.0
        if self.A.shape[0]:
            viol = max(viol, float(np.max(self.A @ x - self.b)))
        if self.A_eq.shape[0]:
            viol = max(viol, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        finite = np.isfinite(self.lb)
        if np.any(finite):
            viol = max(viol, float(np.max(self.lb[finite] - x[finite])))
        return viol


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    value: Optional[float] = None
    x: Optional[np.ndarray] = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def solve_lp(lp: LinearProgram, method: str = "highs") -> LpOutcome:
    """Solve ``lp`` and classify it as optimal, infeasible or unbounded.

    Raises:
        NumericFailure: the back end hit its iteration budget or returned an
            optimizer that violates the constraints by more than ``TOL_FEAS``
            (relative to the size of the data).
    """
    if method == "highs":
        out = _solve_highs(lp)
    elif method == "dense":
        out = _solve_dense(lp)
    else:
        raise ValueError(f"unknown LP method {method!r}")
    if out.optimal:
        scale = 1.0 + max(np.max(np.abs(lp.b), initial=0.0), np.max(np.abs(lp.b_eq), initial=0.0))
        if lp.max_violation(out.x) > TOL_FEAS * scale:
            raise NumericFailure(
                f"{method} optimizer violates constraints by {lp.max_violation(out.x):.3e}")
    return out


def _solve_highs(lp: LinearProgram) -> LpOutcome:
    bounds = [(None if not np.isfinite(l) else l, None) for l in lp.lb]
    kwargs = dict(bounds=bounds, method="highs", options=_HIGHS_OPTIONS)
    if lp.A.shape[0]:
        kwargs.update(A_ub=lp.A, b_ub=lp.b)
    if lp.A_eq.shape[0]:
        kwargs.update(A_eq=lp.A_eq, b_eq=lp.b_eq)
    res = linprog(lp.c, **kwargs)
    if res.status == 0:
        return LpOutcome(LpStatus.OPTIMAL, float(res.fun), np.asarray(res.x, dtype=float))
    if res.status == 2:
        return LpOutcome(LpStatus.INFEASIBLE)
    if res.status == 3:
        # presolve may flag "unbounded" for problems that are really infeasible
        kwargs_feas = dict(kwargs)
        feas = linprog(np.zeros(lp.nvar), **kwargs_feas)
        if feas.status == 2:
            return LpOutcome(LpStatus.INFEASIBLE)
        return LpOutcome(LpStatus.UNBOUNDED)
    raise NumericFailure(f"HiGHS failed: {res.message}")


# ---------------------------------------------------------------------------
# dense two-phase simplex
# ---------------------------------------------------------------------------

_PIVOT_TOL = 1e-11
_DEGENERATE_RUN = 50


def _solve_dense(lp: LinearProgram, max_iter: int = 20000) -> LpOutcome:
    n = lp.nvar
    # x = shift + T @ y with y >= 0
    cols = []
    shift = np.zeros(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lp.lb[j]):
            shift[j] = lp.lb[j]
            cols.append(e)
        else:
            cols.extend([e, -e])
    T = np.array(cols).T if cols else np.zeros((n, 0))
    ny = T.shape[1]
    m_ub, m_eq = lp.A.shape[0], lp.A_eq.shape[0]
    m = m_ub + m_eq

    M = np.zeros((m, ny + m_ub))
    r = np.zeros(m)
    M[:m_ub, :ny] = lp.A @ T
    M[:m_ub, ny:] = np.eye(m_ub)
    r[:m_ub] = lp.b - lp.A @ shift
    M[m_ub:, :ny] = lp.A_eq @ T
    r[m_ub:] = lp.b_eq - lp.A_eq @ shift
    neg = r < 0
    M[neg] *= -1.0
    r[neg] *= -1.0
    cost = np.concatenate([T.T @ lp.c, np.zeros(m_ub)])
    nz = M.shape[1]

    # phase 1: artificials on every row
    tab = np.zeros((m + 1, nz + m + 1))
    tab[:m, :nz] = M
    tab[:m, nz:nz + m] = np.eye(m)
    tab[:m, -1] = r
    tab[m, :nz] = -M.sum(axis=0)
    tab[m, -1] = -r.sum()
    basis = list(range(nz, nz + m))
    status = _simplex_loop(tab, basis, nz + m, max_iter)
    if status != "optimal":  # phase 1 is bounded below by zero
        raise NumericFailure("dense simplex phase 1 failed")
    if -tab[m, -1] > 1e-9 * (1.0 + np.abs(r).max(initial=0.0)):
        return LpOutcome(LpStatus.INFEASIBLE)

    # drive artificials out of the basis; drop rows that are linearly dependent
    keep_rows = []
    for i in range(m):
        if basis[i] >= nz:
            candidates = np.nonzero(np.abs(tab[i, :nz]) > _PIVOT_TOL)[0]
            if candidates.size == 0:
                continue
            _pivot(tab, basis, i, int(candidates[0]))
        keep_rows.append(i)
    rows = keep_rows + [m]
    tab = np.hstack([tab[rows][:, :nz], tab[rows][:, -1:]])
    basis = [basis[i] for i in keep_rows]
    mk = len(keep_rows)

    # phase 2
    tab[mk, :] = 0.0
    tab[mk, :nz] = cost
    for i, bj in enumerate(basis):
        tab[mk] -= cost[bj] * tab[i]
    status = _simplex_loop(tab, basis, nz, max_iter)
    if status == "unbounded":
        return LpOutcome(LpStatus.UNBOUNDED)
    z = np.zeros(nz)
    for i, bj in enumerate(basis):
        z[bj] = tab[i, -1]
    x = shift + T @ z[:ny]
    return LpOutcome(LpStatus.OPTIMAL, float(lp.c @ x), x)


def _pivot(tab: np.ndarray, basis: list, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    colv = tab[:, col].copy()
    colv[row] = 0.0
    tab -= np.outer(colv, tab[row])
    basis[row] = col


def _simplex_loop(tab: np.ndarray, basis: list, ncols: int, max_iter: int) -> str:
    m = tab.shape[0] - 1
    degenerate = 0
    for _ in range(max_iter):
        red = tab[m, :ncols]
        bland = degenerate >= _DEGENERATE_RUN
        if bland:
            entering_set = np.nonzero(red < -_PIVOT_TOL)[0]
            if entering_set.size == 0:
                return "optimal"
            col = int(entering_set[0])
        else:
            col = int(np.argmin(red))
            if red[col] >= -_PIVOT_TOL:
                return "optimal"
        colv = tab[:m, col]
        pos = colv > _PIVOT_TOL
        if not np.any(pos):
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[pos] = tab[:m, -1][pos] / colv[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + 1e-12 * (1.0 + abs(best)))[0]
        row = int(min(ties, key=lambda i: basis[i]))
        degenerate = degenerate + 1 if best <= 1e-12 else 0
        _pivot(tab, basis, row, col)
    raise NumericFailure("dense simplex exceeded its iteration budget")


# ---------------------------------------------------------------------------
# Euclidean projection onto {x | H x <= h}
# ---------------------------------------------------------------------------

def nearest_point(H, h, v, max_iter: int = 500) -> tuple[np.ndarray, float]:
    """Project ``v`` onto the polyhedron ``{x | H x <= h}``.

    Primal active-set method started from a vertex returned by a feasibility
    LP.  Returns the projection and the Euclidean distance.

    Raises:
        EmptySet: the polyhedron is empty.
        NumericFailure: the active-set loop did not settle.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    h = np.asarray(h, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if H.shape[0] == 0 or np.all(H @ v <= h + TOL_FEAS):
        return v.copy(), 0.0

    start = solve_lp(LinearProgram(np.zeros(v.size), H, h))
    if not start.optimal:
        raise EmptySet("nearest_point on an empty polytope")
    x = start.x.copy()
    d = v.size

    # independent subset of the constraints active at the start vertex
    work: list[int] = []
    slack = h - H @ x
    for i in np.argsort(slack):
        if slack[i] > 1e-10 or len(work) == d:
            break
        trial = H[work + [int(i)]]
        if np.linalg.matrix_rank(trial, tol=1e-10) == len(work) + 1:
            work.append(int(i))

    for _ in range(max_iter):
        g = x - v
        if work:
            Mt = H[work].T
            # orthonormal null-space basis of the working rows; empty when |W| == d
            Q, _ = np.linalg.qr(Mt, mode="complete")
            N = Q[:, len(work):]
            p = -N @ (N.T @ g)
            mu = np.linalg.lstsq(Mt, -g - p, rcond=None)[0]
        else:
            mu = np.zeros(0)
            p = -g
        if np.linalg.norm(p) <= 1e-12 * (1.0 + np.linalg.norm(x) + np.linalg.norm(v)):
            if mu.size == 0 or mu.min() >= -1e-12:
                return x, float(np.linalg.norm(v - x))
            work.pop(int(np.argmin(mu)))
            continue
        Hp = H @ p
        slack = np.maximum(h - H @ x, 0.0)
        step, block = 1.0, -1
        for i in np.nonzero(Hp > 1e-14)[0]:
            if i in work:
                continue
            t = slack[i] / Hp[i]
            if t < step:
                step, block = t, int(i)
        x = x + step * p
        if block >= 0:
            work.append(block)
    raise NumericFailure("active-set projection did not converge")
