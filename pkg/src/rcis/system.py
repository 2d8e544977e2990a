"""Problem definition, ingestion and recentring at a stationary point."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from . import geom
from .errors import (
    DimensionMismatch,
    EmptySet,
    NoStationaryPoint,
    NumericFailure,
    ParseError,
    SeedOutsideSafeSet,
    UnboundedSet,
)
from .geom import Polytope
from .optim import LinearProgram, solve_lp

STATIONARY_RESIDUAL = 1e-9


@dataclass(frozen=True)
class LinearSystem:
    """``x+ = A x + B u + E d``."""

    A: np.ndarray
    B: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        E = np.asarray(self.E, dtype=float)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        B = B.reshape(n, -1)
        E = E.reshape(n, -1)
        for name, M in (("A", A), ("B", B), ("E", E)):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} has non-finite entries")
            M.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "E", E)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def l(self) -> int:
        return self.E.shape[1]


@dataclass(frozen=True)
class Problem:
    """System, safe set ``S_xu`` in R^(n+m), disturbance set ``D`` in R^l and
    an optional seed in R^n.

    Construct through :func:`make_problem` or :func:`load_problem` to get the
    compactness and seed checks; the bare constructor only checks shapes.
    """

    system: LinearSystem
    safe: Polytope
    disturbance: Polytope
    seed: Optional[Polytope] = field(default=None)

    def __post_init__(self):
        s = self.system
        if self.safe.dim != s.n + s.m:
            raise DimensionMismatch(f"safe set has dim {self.safe.dim}, expected {s.n + s.m}")
        if self.disturbance.dim != s.l:
            raise DimensionMismatch(f"disturbance set has dim {self.disturbance.dim}, expected {s.l}")
        if self.seed is not None and self.seed.dim != s.n:
            raise DimensionMismatch(f"seed has dim {self.seed.dim}, expected {s.n}")

    @property
    def n(self) -> int:
        return self.system.n

    @cached_property
    def state_safe(self) -> Polytope:
        """Projection of the safe set onto the state coordinates."""
        return geom.project(self.safe, self.n)

    def with_seed(self, seed: Optional[Polytope]) -> "Problem":
        return Problem(self.system, self.safe, self.disturbance, seed)

    def with_safe(self, safe: Polytope) -> "Problem":
        return Problem(self.system, safe, self.disturbance, self.seed)


def make_problem(A, B, E, safe: Polytope, disturbance: Polytope,
                 seed: Optional[Polytope] = None) -> Problem:
    """Build a problem and run the compactness and seed checks."""
    p = Problem(LinearSystem(A, B, E), safe, disturbance, seed)
    validate_problem(p)
    return p


def validate_problem(p: Problem) -> None:
    """Raise if the safe or disturbance set is empty/unbounded, or the seed
    leaves the projected safe set."""
    for name, P in (("safe set", p.safe), ("disturbance set", p.disturbance)):
        if geom.is_empty(P):
            raise EmptySet(f"{name} is empty")
        if not geom.is_bounded(P):
            raise UnboundedSet(f"{name} is unbounded")
    if p.seed is not None:
        if not geom.is_empty(p.seed) and not geom.is_bounded(p.seed):
            raise UnboundedSet("seed is unbounded")
        if not geom.contains(p.state_safe, p.seed):
            raise SeedOutsideSafeSet("seed is not contained in the projected safe set")


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

def scalar_problem_dict(alpha: float, u_max: float, d_max: float, x_max: float,
                        c0: Optional[float] = None) -> dict:
    """Expand the 1-D form ``x+ = alpha x + u + d`` into the general schema."""
    box = lambda r: {"H": [[1.0], [-1.0]], "h": [r, r]}  # noqa: E731
    out = {
        "A": [[alpha]],
        "B": [[1.0]],
        "E": [[1.0]],
        "safe": {"H": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
                 "h": [x_max, x_max, u_max, u_max]},
        "disturbance": box(d_max),
    }
    if c0 is not None:
        out["seed"] = box(c0)
    return out


def problem_from_dict(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ParseError("problem file must hold a JSON object")
    if "alpha" in data:
        try:
            data = scalar_problem_dict(
                float(data["alpha"]), float(data["u_max"]), float(data["d_max"]),
                float(data["x_max"]), None if data.get("c0") is None else float(data["c0"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad 1-D problem file: {exc}") from exc
    try:
        A = np.asarray(data["A"], dtype=float)
        B = np.asarray(data["B"], dtype=float)
        E = np.asarray(data["E"], dtype=float)
        safe = _polytope_field(data["safe"])
        dist = _polytope_field(data["disturbance"])
        seed = _polytope_field(data["seed"]) if data.get("seed") is not None else None
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DimensionMismatch):
            raise
        raise ParseError(f"malformed problem data: {exc}") from exc
    if A.ndim != 2 or B.ndim != 2 or E.ndim != 2:
        raise DimensionMismatch("A, B and E must be 2-D matrices")
    if B.shape[0] != A.shape[0] or E.shape[0] != A.shape[0]:
        raise DimensionMismatch("A, B and E must have the same number of rows")
    return make_problem(A, B, E, safe, dist, seed)


def _polytope_field(obj) -> Polytope:
    if not isinstance(obj, dict) or "H" not in obj or "h" not in obj:
        raise ParseError("polytopes are given as {'H': [[...]], 'h': [...]}")
    return Polytope.from_dict(obj)


def load_problem(text: str) -> Problem:
    """Parse and validate a problem file.

    Raises:
        ParseError, DimensionMismatch, UnboundedSet, EmptySet,
        SeedOutsideSafeSet.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return problem_from_dict(data)


def load_problem_file(path) -> Problem:
    return load_problem(Path(path).read_text())


def problem_to_dict(p: Problem) -> dict:
    out = {
        "A": p.system.A.tolist(),
        "B": p.system.B.tolist(),
        "E": p.system.E.tolist(),
        "safe": p.safe.to_dict(),
        "disturbance": p.disturbance.to_dict(),
    }
    if p.seed is not None:
        out["seed"] = p.seed.to_dict()
    return out


# ---------------------------------------------------------------------------
# stationary points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StationaryPoint:
    x_e: np.ndarray
    u_e: np.ndarray
    d_e: np.ndarray

    def residual(self, system: LinearSystem) -> float:
        s = system
        r = s.A @ self.x_e + s.B @ self.u_e + s.E @ self.d_e - self.x_e
        return float(np.linalg.norm(r))


def find_stationary_point(p: Problem) -> StationaryPoint:
    """Find ``(x_e, u_e, d_e)`` with ``x_e = A x_e + B u_e + E d_e``,
    ``(x_e, u_e)`` safe, ``d_e`` in ``D`` and ``x_e`` in the seed (if any).

    Among all such points the one of least 1-norm is returned, which makes
    the answer reproducible.

    Raises:
        NoStationaryPoint: the feasibility LP is infeasible.
    """
    s = p.system
    n, m, l = s.n, s.m, s.l
    N = n + m + l
    rows, rhs = [], []
    # |z| <= t
    rows += [np.hstack([np.eye(N), -np.eye(N)]), np.hstack([-np.eye(N), -np.eye(N)])]
    rhs += [np.zeros(N), np.zeros(N)]
    Hs = np.zeros((p.safe.n_rows, 2 * N))
    Hs[:, :n + m] = p.safe.H
    rows.append(Hs)
    rhs.append(p.safe.h)
    Hd = np.zeros((p.disturbance.n_rows, 2 * N))
    Hd[:, n + m:N] = p.disturbance.H
    rows.append(Hd)
    rhs.append(p.disturbance.h)
    if p.seed is not None:
        Hc = np.zeros((p.seed.n_rows, 2 * N))
        Hc[:, :n] = p.seed.H
        rows.append(Hc)
        rhs.append(p.seed.h)
    A_eq = np.zeros((n, 2 * N))
    A_eq[:, :n] = np.eye(n) - s.A
    A_eq[:, n:n + m] = -s.B
    A_eq[:, n + m:N] = -s.E
    c = np.concatenate([np.zeros(N), np.ones(N)])
    out = solve_lp(LinearProgram(c, np.vstack(rows), np.concatenate(rhs), A_eq, np.zeros(n)))
    if not out.optimal:
        raise NoStationaryPoint("no stationary point inside the safe set, disturbance set and seed")
    z = out.x[:N] + 0.0
    sp = StationaryPoint(z[:n], z[n:n + m], z[n + m:])
    if sp.residual(s) > STATIONARY_RESIDUAL:
        raise NumericFailure(f"stationary-point residual {sp.residual(s):.2e} too large")
    return sp


def recenter(p: Problem, s: StationaryPoint) -> Problem:
    """Shift coordinates so that ``s`` becomes the origin; dynamics unchanged."""
    xu = np.concatenate([s.x_e, s.u_e])
    safe = geom.translate(p.safe, -xu)
    dist = geom.translate(p.disturbance, -s.d_e)
    seed = None if p.seed is None else geom.translate(p.seed, -s.x_e)
    return Problem(p.system, safe, dist, seed)
