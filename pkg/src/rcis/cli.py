"""Command-line front end.

Commands::

    rcis inside-out PROBLEM [--k-max K] [--eps E] [--certificate] [--reference SET] [--out DIR]
    rcis outside-in PROBLEM [--k-max K] [--eps E] [--out DIR]
    rcis check PROBLEM --set SET [--interior TARGET]
    rcis oracle1d --alpha A --u-max U --d-max D --x-max X --c0 C [--k-max K]

Exit codes: 0 success, 2 bad input, 3 missing or non-invariant seed,
4 iteration or projection budget exhausted, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, geom, oracle1d, reach
from .errors import (
    BlowupBudget,
    DimensionMismatch,
    EmptySet,
    NoCertificateFound,
    NoStationaryPoint,
    NumericFailure,
    ParseError,
    PreconditionError,
    RcisError,
    SeedNotInvariant,
    SeedOutsideSafeSet,
    UnboundedSet,
)
from .geom import Polytope
from .system import Problem, find_stationary_point, load_problem_file, recenter

logger = logging.getLogger("rcis")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SEED = 3
EXIT_BUDGET = 4
EXIT_NUMERIC = 5


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _enc(x):
    """JSON has no infinity; store it as null."""
    return None if x is None or math.isinf(x) else x


def _dec(x):
    return math.inf if x is None else x


@dataclass
class RunReport:
    """Summary of one iteration run.

    ``fixed_point_k`` is the first index already equal to the limit;
    ``detected_at`` is the step at which the stopping test fired.
    """

    command: str
    status: str
    K: int
    fixed_point_k: Optional[int] = None
    detected_at: Optional[int] = None
    facets: list = field(default_factory=list)
    radii: Optional[list] = None
    reference: str = "C_K"
    k0: Optional[int] = None
    gammas: Optional[list] = None
    distances: list = field(default_factory=list)
    certificate: Optional[dict] = None
    certificate_error: Optional[str] = None
    fit: Optional[dict] = None
    gap: Optional[float] = None
    timings: dict = field(default_factory=dict)

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        if d["gammas"] is not None:
            d["gammas"] = [_enc(g) for g in d["gammas"]]
        if not timings:
            d.pop("timings")
        return d

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        if d.get("gammas") is not None:
            d["gammas"] = [_dec(g) for g in d["gammas"]]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _load_problem(path: str) -> Problem:
    try:
        return load_problem_file(path)
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc}") from exc
    except (ParseError, DimensionMismatch, EmptySet, UnboundedSet, SeedOutsideSafeSet) as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from exc


def _load_polytope(path: str) -> Polytope:
    try:
        return Polytope.from_json(Path(path).read_text())
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"{path}: malformed polytope: {exc}") from exc


def _summarize(command: str, trace: reach.IterationTrace, total: float) -> RunReport:
    rep = RunReport(
        command=command,
        status=trace.status.value,
        K=trace.K,
        fixed_point_k=trace.converged_k,
        detected_at=trace.fixed_point_k,
        facets=[C.n_rows for C in trace.sets],
        timings={"steps": list(trace.step_times), "total": total},
    )
    if trace.sets[0].dim == 1:
        rep.radii = [list(geom.interval(C)) if not geom.is_empty(C) else None for C in trace.sets]
    return rep


def _distances(trace: reach.IterationTrace, ref: Polytope) -> list:
    return [[k, d] for k, d in analysis.distances_to(trace, ref)]


def _fit(distances: list) -> Optional[dict]:
    pos = [(k, d) for k, d in distances if d > 0]
    if not pos:
        return None
    f = analysis.fit_exponential(pos)
    return {"c": f.c, "a": f.a, "underdetermined": f.underdetermined}


def _certificate(trace: reach.IterationTrace, p: Problem, ref: Optional[Polytope],
                 rep: RunReport) -> None:
    """Recenter at a stationary point if needed, then run the grid search."""
    try:
        sp = find_stationary_point(p)
    except NoStationaryPoint as exc:
        rep.certificate_error = str(exc)
        return
    shift = -sp.x_e
    if np.any(sp.x_e != 0) or np.any(sp.u_e != 0) or np.any(sp.d_e != 0):
        p = recenter(p, sp)
        trace = reach.IterationTrace([geom.translate(C, shift) for C in trace.sets],
                                     trace.status, trace.fixed_point_k, trace.step_times, trace.eps)
        ref = None if ref is None else geom.translate(ref, shift)
    try:
        cert = analysis.search_certificate(trace, p, reference=ref)
    except (PreconditionError, NoCertificateFound) as exc:
        rep.certificate_error = str(exc)
        return
    rep.certificate = cert.to_dict()


def _write_trace(out: Path, prefix: str, trace: reach.IterationTrace, rep: RunReport) -> None:
    sub = out / prefix
    sub.mkdir(parents=True, exist_ok=True)
    for k, C in enumerate(trace.sets):
        (sub / f"C_{k:03d}.json").write_text(C.to_json())
    # plot data stops at the first iterate equal to the limit
    last = rep.fixed_point_k if rep.fixed_point_k is not None else trace.K
    if trace.sets[0].dim == 2:
        for k in range(last + 1):
            C = trace.sets[k]
            if not geom.is_empty(C):
                (sub / f"C_{k:03d}.csv").write_text(geom.vertices_to_csv(geom.vertices(C)))
    (out / f"{prefix}_final.json").write_text(trace.final.to_json())


def _gap(out: Path, own: str, other: str, final: Polytope) -> Optional[float]:
    path = out / f"{other}_final.json"
    if not path.exists():
        return None
    other_final = Polytope.from_json(path.read_text())
    if geom.is_empty(other_final) or geom.is_empty(final):
        return None
    return analysis.hausdorff(final, other_final)


def _finish(rep: RunReport, out: Optional[Path], prefix: str) -> int:
    if out is not None:
        (out / f"{prefix}_report.json").write_text(rep.to_json())
    line = f"{rep.command}: {rep.status}, K={rep.K}"
    if rep.fixed_point_k is not None:
        line += f", fixed point at k={rep.fixed_point_k}"
    if rep.k0 is not None:
        line += f", seed condition holds with k0={rep.k0}"
    print(line)
    if rep.certificate is not None:
        c = rep.certificate
        print(f"certificate: N0={c['N0']} N={c['N']} a={c['a']:.6g} c={c['c']:.6g}")
    elif rep.certificate_error:
        print(f"certificate: none ({rep.certificate_error})")
    if rep.fit is not None:
        print(f"fit: {rep.fit['c']:.6g} * {rep.fit['a']:.6g}^k")
    if rep.gap is not None:
        print(f"gap between inner and outer final sets: {rep.gap:.6g}")
    return EXIT_BUDGET if rep.status == reach.TraceStatus.BUDGET_EXHAUSTED.value else EXIT_OK


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_inside_out(args) -> int:
    p = _load_problem(args.problem)
    if p.seed is None:
        raise CliError(EXIT_SEED, "problem file has no seed; inside-out needs one")
    ref = _load_polytope(args.reference) if args.reference else None
    t0 = time.perf_counter()
    trace = reach.inside_out(p, k_max=args.k_max, eps=args.eps)
    rep = _summarize("inside-out", trace, time.perf_counter() - t0)
    report = analysis.check_seed_condition(trace)
    rep.k0, rep.gammas = report.k0, report.gammas
    target = trace.final if ref is None else ref
    if ref is not None:
        rep.reference = "given"
    elif trace.status is reach.TraceStatus.FIXED_POINT:
        rep.reference = "C_max"
    rep.distances = _distances(trace, target)
    rep.fit = _fit(rep.distances)
    if args.certificate:
        _certificate(trace, p, ref, rep)
    out = Path(args.out) if args.out else None
    if out is not None:
        _write_trace(out, "inside_out", trace, rep)
        rep.gap = _gap(out, "inside_out", "outside_in", trace.final)
    return _finish(rep, out, "inside_out")


def cmd_outside_in(args) -> int:
    p = _load_problem(args.problem)
    ref = _load_polytope(args.reference) if args.reference else None
    t0 = time.perf_counter()
    trace = reach.outside_in(p, k_max=args.k_max, eps=args.eps)
    rep = _summarize("outside-in", trace, time.perf_counter() - t0)
    if trace.status is not reach.TraceStatus.EMPTY:
        target = trace.final if ref is None else ref
        if ref is not None:
            rep.reference = "given"
        elif trace.status is reach.TraceStatus.FIXED_POINT:
            rep.reference = "C_max"
        rep.distances = _distances(trace, target)
        rep.fit = _fit(rep.distances)
    out = Path(args.out) if args.out else None
    if out is not None:
        _write_trace(out, "outside_in", trace, rep)
        rep.gap = _gap(out, "outside_in", "inside_out", trace.final)
    return _finish(rep, out, "outside_in")


def cmd_check(args) -> int:
    p = _load_problem(args.problem)
    C = _load_polytope(args.set)
    if C.dim != p.n:
        raise CliError(EXIT_PARSE, f"set has dim {C.dim}, problem state has dim {p.n}")
    print("invariant" if reach.is_invariant(C, p) else "not invariant")
    if args.interior:
        P = _load_polytope(args.interior)
        if P.dim != C.dim:
            raise CliError(EXIT_PARSE, "target and set dimensions differ")
        x0, _ = geom.chebyshev_center(P)
        inside, gamma = geom.contains_in_interior(P, C, x0)
        print(f"gamma* = {gamma:.12g}")
        print("strictly inside" if inside else "not strictly inside")
    return EXIT_OK


def cmd_oracle1d(args) -> int:
    try:
        sp = oracle1d.ScalarProblem(args.alpha, args.u_max, args.d_max, args.x_max, args.c0)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    if not sp.seed_is_invariant():
        raise CliError(EXIT_SEED, "inputs fall outside the closed-form cases or the seed is not invariant")
    print(f"case {sp.case}, c_d = {oracle1d.c_d(sp):.12g}")
    header = "k\tc_k" + ("\td(C_k, C_max)" if sp.case == 2 else "")
    print(header)
    for k in range(args.k_max + 1):
        row = f"{k}\t{oracle1d.c_k(sp, k):.12g}"
        if sp.case == 2:
            row += f"\t{oracle1d.hausdorff_to_max(sp, k):.12g}"
        print(row)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcis", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def iteration_flags(sp):
        sp.add_argument("problem", help="problem JSON file")
        sp.add_argument("--k-max", type=int, default=reach.DEFAULT_K_MAX)
        sp.add_argument("--eps", type=float, default=reach.DEFAULT_EPS, help="fixed-point tolerance")
        sp.add_argument("--reference", help="polytope JSON to measure distances against")
        sp.add_argument("--out", help="directory for the report, iterates and vertex CSVs")

    sp = sub.add_parser("inside-out", help="grow the seed to the maximal invariant set")
    iteration_flags(sp)
    sp.add_argument("--certificate", action="store_true", help="search for a rate certificate")
    sp.set_defaults(func=cmd_inside_out)

    sp = sub.add_parser("outside-in", help="shrink the safe set to the maximal invariant set")
    iteration_flags(sp)
    sp.set_defaults(func=cmd_outside_in)

    sp = sub.add_parser("check", help="test a set for robust controlled invariance")
    sp.add_argument("problem")
    sp.add_argument("--set", required=True, help="polytope JSON to test")
    sp.add_argument("--interior", help="polytope JSON that should hold --set in its interior")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("oracle1d", help="closed-form radii for x+ = alpha x + u + d")
    for name in ("alpha", "u-max", "d-max", "x-max", "c0"):
        sp.add_argument(f"--{name}", type=float, required=True)
    sp.add_argument("--k-max", type=int, default=20)
    sp.set_defaults(func=cmd_oracle1d)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "out", None):
        Path(args.out).mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SeedNotInvariant as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEED
    except BlowupBudget as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NumericFailure, RcisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
