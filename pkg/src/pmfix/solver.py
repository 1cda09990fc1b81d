"""Picard iteration with certified bound chains.

Two solver modes share one loop and differ in their hypotheses and in where
the step distance is evaluated:

``thm41``  pointwise triangle function, TSR contraction, any k in (0, 1);
           checks ``F_{x_{n+1},x_n}(t) >= 1 - k^n (1 - F_{x_1,x_0}(t))``.
``thm33``  Menger sup-convolution, TSR-P contraction, k <= 1/2;
           checks ``F_{x_{n+1},x_n}(k^n t) >= 1 - k^n (1 - F_{x_1,x_0}(t))``.

A run whose hypotheses fail still iterates, but the trace is marked
uncertified and every chain violation is kept as data.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from ._numbers import format_number
from .algebra import idempotence_witnesses
from .contraction import (DEFAULT_T_GRID, ContractionReport, SelfMap, tsr_defect, tsr_p_defect)
from .ddf import Ddf, is_h0, piece_probes
from .space import (ContinuityReport, PMSpace, SphereSpec, check_axioms, check_continuity,
                    is_t_closed, sphere_members)

THM41, THM33 = "thm41", "thm33"
CONVERGED, CYCLE, BUDGET = "converged", "cycle", "budget_exhausted"


class SolverError(RuntimeError):
    pass


class NotCertifiedError(SolverError):
    def __init__(self, message, report: Optional[ContractionReport] = None):
        self.report = report
        super().__init__(message)


class SphereHypothesisError(SolverError):
    def __init__(self, witness_u, value, level):
        self.witness = witness_u
        self.value = value
        self.level = level
        super().__init__(
            f"F(x0, f(x0))({format_number(witness_u)}) = {format_number(value)} is not > {format_number(level)}")


@dataclass
class IterationTrace:
    mode: str
    k: object
    t_grid: Tuple[object, ...]
    iterates: List[Hashable] = field(default_factory=list)
    step_distance: List[Ddf] = field(default_factory=list)
    bound_value: List[Dict[object, object]] = field(default_factory=list)
    step_value: List[Dict[object, object]] = field(default_factory=list)
    residual: List[object] = field(default_factory=list)
    outcome: str = BUDGET
    fixed_point: Optional[Hashable] = None
    fixed_point_verified: bool = False
    contraction: Optional[ContractionReport] = None
    gate_failures: List[str] = field(default_factory=list)
    chain_violations: List[tuple] = field(default_factory=list)
    cauchy_violations: List[tuple] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    @property
    def certified(self) -> bool:
        return not (self.gate_failures or self.chain_violations or self.cauchy_violations)

    @property
    def converged(self) -> bool:
        return self.outcome == CONVERGED

    def rows(self):
        for n, x in enumerate(self.iterates[:len(self.step_distance)]):
            yield {
                "n": n,
                "x_n": format_number(x),
                "residual": format_number(self.residual[n]),
                "min_t_bound_value": format_number(min(self.bound_value[n].values())),
                "min_t_step_value": format_number(min(self.step_value[n].values())),
                "certified": self.certified,
            }

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["n", "x_n", "residual", "min_t_bound_value", "min_t_step_value", "certified"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()

    def to_json(self):
        fmt = format_number
        return {
            "mode": self.mode,
            "k": fmt(self.k),
            "t_grid": [fmt(t) for t in self.t_grid],
            "iterates": [fmt(x) for x in self.iterates],
            "steps": self.steps,
            "step_distance": [F.to_json() for F in self.step_distance],
            "bound_value": [[[fmt(t), fmt(v)] for t, v in b.items()] for b in self.bound_value],
            "step_value": [[[fmt(t), fmt(v)] for t, v in s.items()] for s in self.step_value],
            "residual": [fmt(r) for r in self.residual],
            "outcome": self.outcome,
            "fixed_point": fmt(self.fixed_point),
            "fixed_point_verified": self.fixed_point_verified,
            "certified": self.certified,
            "contraction": self.contraction.to_json() if self.contraction else None,
            "gate_failures": list(self.gate_failures),
            "chain_violations": [[fmt(v) for v in row] for row in self.chain_violations],
            "cauchy_violations": [[fmt(v) for v in row] for row in self.cauchy_violations],
        }


def hypothesis_gates(space: PMSpace, f: SelfMap, k, mode: str, t_grid, m_max: int = 3,
                     domain=None) -> Tuple[List[str], ContractionReport]:
    """Reasons a run in ``mode`` cannot be certified, plus the contraction report."""
    failures = []
    T = space.mode.tnorm
    if not T.verified:
        failures.append(f"t-norm {T.kind!r} is unverified")
    wit = idempotence_witnesses(T)
    if wit:
        failures.append(f"t-norm {T.kind!r} is not idempotent-dominant (a*a < a at a={format_number(wit[len(wit) // 2])})")
    if mode == THM41:
        if space.mode.is_menger:
            failures.append("thm41 mode needs the pointwise triangle function")
        report = tsr_defect(space, f, k, t_grid, domain=domain)
    elif mode == THM33:
        if not space.mode.is_menger:
            failures.append("thm33 mode needs the Menger sup-convolution")
        if k > Fraction(1, 2):
            failures.append(f"thm33 mode needs k <= 1/2, got {format_number(k)}")
        report = tsr_p_defect(space, f, k, t_grid, m_max=m_max, domain=domain)
    else:
        raise ValueError(f"unknown solver mode {mode!r}")
    if not report.holds:
        failures.append(f"{report.klass} contraction fails (max defect {format_number(report.max_defect)})")
    if not check_axioms(space).ok:
        failures.append("triangle axiom fails on the space")
    return failures, report


def _bound(k, n, F10, t):
    return 1 - k ** n * (1 - F10.eval(t))


def picard(space: PMSpace, f: SelfMap, x0, k, t_grid: Sequence[object] = DEFAULT_T_GRID,
           eps=0, max_iter: int = 1000, mode: str = THM41, m_max: int = 3,
           domain=None) -> IterationTrace:
    """Iterate ``x_{n+1} = f(x_n)`` and certify each step against the bound chain.

    Stops on an exact fixed point, on ``residual <= eps``, on a revisited point
    (cycle), or after ``max_iter`` applications of ``f``.
    """
    if x0 not in space:
        raise ValueError(f"start point {x0!r} is not in the space")
    f.validate(space)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not 0 < k < 1:
        raise ValueError("k must lie in (0, 1)")
    ts = tuple(t for t in t_grid if t > 0)
    if not ts:
        raise ValueError("t_grid must contain positive values")

    gates, report = hypothesis_gates(space, f, k, mode, ts, m_max, domain)
    trace = IterationTrace(mode, k, ts, iterates=[x0], contraction=report, gate_failures=gates)
    seen = {x0}
    F10 = space.distance(f(x0), x0)
    for n in range(max_iter):
        x = trace.iterates[-1]
        nxt = f(x)
        D = space.distance(nxt, x)
        scale = k ** n if mode == THM33 else 1
        bounds = {t: _bound(k, n, F10, t) for t in ts}
        values = {t: D.eval(scale * t) for t in ts}
        trace.step_distance.append(D)
        trace.bound_value.append(bounds)
        trace.step_value.append(values)
        trace.residual.append(1 - min(D.eval(t) for t in ts))
        for t in ts:
            if values[t] < bounds[t]:
                trace.chain_violations.append((n, t, values[t], bounds[t]))
        if nxt == x:
            trace.outcome, trace.fixed_point = CONVERGED, x
            break
        if nxt in seen:
            trace.iterates.append(nxt)
            trace.outcome = CYCLE
            break
        trace.iterates.append(nxt)
        seen.add(nxt)
        if trace.residual[-1] <= eps:
            trace.outcome, trace.fixed_point = CONVERGED, nxt
            break
    if trace.fixed_point is not None:
        y = trace.fixed_point
        trace.fixed_point_verified = is_h0(space.distance(f(y), y), 0)
    trace.cauchy_violations = cauchy_violations(space, trace.iterates, k, ts)
    return trace


def cauchy_violations(space: PMSpace, iterates: Sequence[Hashable], k, t_grid) -> List[tuple]:
    """Pairs ``(n, p, t)`` where ``F_{x_{n+p},x_n}(t) < 1 - k^n (1 - F_{x_1,x_0}(t))``."""
    if len(iterates) < 2:
        return []
    F10 = space.distance(iterates[1], iterates[0])
    out = []
    N = len(iterates) - 1
    for n in range(N + 1):
        for p in range(1, N - n + 1):
            D = space.distance(iterates[n + p], iterates[n])
            for t in t_grid:
                b = _bound(k, n, F10, t)
                v = D.eval(t)
                if v < b:
                    out.append((n, p, t, v, b))
    return out


# -- sphere-constrained runs ----------------------------------------------

@dataclass
class SphereReport:
    sphere: SphereSpec
    members: List[Hashable]
    t_closed: bool
    escaped: List[Tuple[int, Hashable]]
    limit_in_sphere: Optional[bool]

    @property
    def holds(self) -> bool:
        return not self.escaped and bool(self.limit_in_sphere)

    def to_json(self):
        return {
            "center": format_number(self.sphere.center),
            "r": format_number(self.sphere.r),
            "t": format_number(self.sphere.t),
            "members": [format_number(p) for p in self.members],
            "t_closed": self.t_closed,
            "escaped": [[n, format_number(x)] for n, x in self.escaped],
            "limit_in_sphere": self.limit_in_sphere,
            "holds": self.holds,
        }


def sphere_hypothesis_witness(space: PMSpace, f: SelfMap, x0, r, u_grid: Sequence[object] = ()):
    """A ``u > 0`` with ``F_{x0,f(x0)}(u) <= 1 - r``, or None if none exists."""
    D = space.distance(x0, f(x0))
    level = 1 - r
    for u in sorted(u for u in u_grid if u > 0):
        if not D.eval(u) > level:
            return u
    # F is non-decreasing, so a failure anywhere shows up in the first piece
    first = piece_probes(D.thresholds)[0]
    if not D.eval(first) > level:
        return first
    return None


def picard_in_sphere(space: PMSpace, f: SelfMap, x0, k, r, t, u_grid: Sequence[object] = DEFAULT_T_GRID,
                     eps=0, max_iter: int = 1000, mode: Optional[str] = None,
                     m_max: int = 3) -> Tuple[IterationTrace, SphereReport]:
    """Picard run with the contraction judged on the closed sphere around ``x0``.

    Raises :class:`SphereHypothesisError` when ``F_{x0,f(x0)}(u) > 1 - r`` fails
    for some ``u > 0``. An iterate leaving the sphere is recorded as a
    counterexample and the trace loses its certificate.
    """
    mode = mode or (THM33 if space.mode.is_menger else THM41)
    f.validate(space)
    w = sphere_hypothesis_witness(space, f, x0, r, u_grid)
    if w is not None:
        raise SphereHypothesisError(w, space.F(x0, f(x0), w), 1 - r)
    spec = SphereSpec(x0, r, t, closed=True)
    members = sphere_members(space, spec)
    trace = picard(space, f, x0, k, u_grid, eps, max_iter, mode, m_max, domain=members)
    inside = set(members)
    escaped = [(n, x) for n, x in enumerate(trace.iterates) if x not in inside]
    limit_in = None if trace.fixed_point is None else trace.fixed_point in inside
    closed = is_t_closed(space, members, t)
    if not closed:
        trace.gate_failures.append("closed sphere is not t-closed")
    for n, x in escaped:
        trace.gate_failures.append(f"iterate x_{n} = {format_number(x)} escaped the closed sphere")
    return trace, SphereReport(spec, members, closed, escaped, limit_in)


# -- powers of f ----------------------------------------------------------

@dataclass
class PowerReport:
    m: int
    trace: IterationTrace
    g_contraction: ContractionReport
    continuity: ContinuityReport
    aux_chain_violations: List[tuple]
    f_fixes_limit: bool
    g_fixed_points: List[Hashable]

    note = ("continuity of f is probed on a finite (eps, t) grid; the probe can "
            "only refute continuity, never establish it")

    @property
    def fixed_point(self):
        return self.trace.fixed_point

    @property
    def holds(self) -> bool:
        return (self.trace.converged and self.trace.certified and self.f_fixes_limit
                and not self.aux_chain_violations and self.continuity.ok
                and self.g_fixed_points == [self.fixed_point])

    def to_json(self):
        return {
            "m": self.m,
            "fixed_point": format_number(self.fixed_point),
            "f_fixes_limit": self.f_fixes_limit,
            "g_fixed_points": [format_number(p) for p in self.g_fixed_points],
            "g_contraction": self.g_contraction.to_json(),
            "continuity_ok": self.continuity.ok,
            "continuity_note": self.note,
            "aux_chain_violations": [[format_number(v) for v in row] for row in self.aux_chain_violations],
            "holds": self.holds,
            "trace": self.trace.to_json(),
        }


def power_picard(space: PMSpace, f: SelfMap, m: int, x0, k, t_grid: Sequence[object] = DEFAULT_T_GRID,
                 eps=0, max_iter: int = 1000, eps_grid: Sequence[object] = (Fraction(1, 10), Fraction(1, 100))
                 ) -> PowerReport:
    """Find the fixed point of ``f`` through Picard iteration of ``g = f^m``.

    Refuses (``NotCertifiedError``) when ``g`` is not a TSR contraction with
    constant ``k``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    f.validate(space)
    g = f.power(m)
    ts = tuple(t for t in t_grid if t > 0)
    g_report = tsr_defect(space, g, k, ts)
    if not g_report.holds:
        raise NotCertifiedError(
            f"f^{m} is not a TSR contraction with k={format_number(k)} "
            f"(max defect {format_number(g_report.max_defect)})", g_report)
    continuity = check_continuity(space, f, eps_grid, ts)
    trace = picard(space, g, x0, k, ts, eps, max_iter, THM41)
    if not continuity.ok:
        trace.gate_failures.append("continuity probe of f failed")

    F_start = space.distance(f(x0), x0)
    aux = []
    a, b = f(x0), x0
    for n in range(len(trace.iterates)):
        D = space.distance(a, b)
        for t in ts:
            bound = _bound(k, n, F_start, t)
            if D.eval(t) < bound:
                aux.append((n, t, D.eval(t), bound))
        a, b = g(a), g(b)
    y = trace.fixed_point
    f_fixes = y is not None and f(y) == y
    g_fixed = [p for p in space.points if g(p) == p]
    return PowerReport(m, trace, g_report, continuity, aux, f_fixes, g_fixed)


# -- uniqueness -----------------------------------------------------------

@dataclass
class UniquenessReport:
    y: Hashable
    z: Hashable
    unique: bool
    contradiction: Optional[Tuple[object, object, object]]
    recheck: Optional[ContractionReport] = None

    def to_json(self):
        return {
            "y": format_number(self.y),
            "z": format_number(self.z),
            "unique": self.unique,
            "contradiction": None if self.contradiction is None else [format_number(v) for v in self.contradiction],
            "recheck": None if self.recheck is None else self.recheck.to_json(),
        }


def verify_uniqueness(space: PMSpace, f: SelfMap, y, z, k, t_grid: Sequence[object] = DEFAULT_T_GRID,
                      tol=0) -> UniquenessReport:
    """Replay ``1 - F_{y,z}(t) <= k (1 - F_{y,z}(t))`` for two fixed points.

    The inequality forces ``F_{y,z}(t) = 1``; any probe where it fails is a
    contradiction witness ``(t, d, k*d)`` and triggers a fresh TSR check of ``f``.
    """
    for p in (y, z):
        if f(p) != p:
            raise ValueError(f"{p!r} is not a fixed point of the map")
    F = space.distance(y, z)
    probes = sorted(set(t for t in t_grid if t > 0) | set(piece_probes(F.thresholds)))
    contradiction = None
    for t in probes:
        d = 1 - F.eval(t)
        if d > k * d:
            contradiction = (t, d, k * d)
            break
    if contradiction is not None:
        return UniquenessReport(y, z, False, contradiction, tsr_defect(space, f, k, t_grid))
    return UniquenessReport(y, z, is_h0(F, tol), None)
