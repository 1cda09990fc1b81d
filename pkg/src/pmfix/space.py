"""Finite probabilistic metric spaces and exhaustive checks on them.

Distances are :class:`~pmfix.ddf.Ddf` step functions, so the triangle axiom,
sphere membership and the sequence diagnostics are all decided exactly.
Completeness cannot be checked on a finite truncation; it is carried in
``metadata`` as a declared assumption.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import MIN, TNorm, TriangleMode
from .ddf import H0, Ddf, dirac, geq_witness, is_h0, plateau


class SpaceError(ValueError):
    """Structural problem with a distance table."""


class UltrametricError(SpaceError):
    def __init__(self, witness, message=None):
        self.witness = witness
        super().__init__(message or f"strong triangle inequality fails on {witness}")


class MetricError(SpaceError):
    def __init__(self, witness, message=None):
        self.witness = witness
        super().__init__(message or f"metric axioms fail on {witness}")


@dataclass(frozen=True)
class PMSpace:
    points: Tuple[Hashable, ...]
    matrix: Tuple[Tuple[Ddf, ...], ...] = field(repr=False)
    mode: TriangleMode
    metadata: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self._index

    def index(self, p) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise KeyError(f"{p!r} is not a point of the space") from None

    def distance(self, p, q) -> Ddf:
        return self.matrix[self.index(p)][self.index(q)]

    def F(self, p, q, t):
        """Shorthand for ``distance(p, q)(t)``."""
        return self.matrix[self.index(p)][self.index(q)].eval(t)

    def distances(self) -> List[Ddf]:
        return [self.matrix[i][j] for i in range(len(self)) for j in range(i + 1, len(self))]

    @property
    def exact(self) -> bool:
        return all(F.exact for F in self.distances())

    def thresholds(self) -> set:
        out = set()
        for F in self.distances():
            out.update(F.thresholds)
        return out

    def restrict(self, subset: Iterable[Hashable]) -> "PMSpace":
        keep = [p for p in self.points if p in set(subset)]
        idx = [self.index(p) for p in keep]
        matrix = tuple(tuple(self.matrix[i][j] for j in idx) for i in idx)
        return PMSpace(tuple(keep), matrix, self.mode, dict(self.metadata))


def build_space(points: Sequence[Hashable], distance_table, mode: TriangleMode,
                metadata: Optional[Mapping[str, object]] = None) -> PMSpace:
    """Assemble a space from ``{(p, q): Ddf}`` (one orientation suffices).

    Identity of indiscernibles and symmetry are enforced here; the triangle
    axiom is left to :func:`check_axioms`.
    """
    points = tuple(points)
    if not points:
        raise SpaceError("a PM space needs at least one point")
    if len(set(points)) != len(points):
        raise SpaceError("duplicate point identifiers")
    index = {p: i for i, p in enumerate(points)}
    n = len(points)
    grid: List[List[Optional[Ddf]]] = [[None] * n for _ in range(n)]
    for (p, q), F in dict(distance_table).items():
        if p not in index or q not in index:
            raise SpaceError(f"distance entry ({p!r}, {q!r}) names an unknown point")
        i, j = index[p], index[q]
        for a, b in ((i, j), (j, i)):
            if grid[a][b] is not None and grid[a][b] != F:
                raise SpaceError(f"asymmetric distance between {p!r} and {q!r}")
            grid[a][b] = F
    for i in range(n):
        if grid[i][i] is None:
            grid[i][i] = H0
        elif grid[i][i] != H0:
            raise SpaceError(f"distance from {points[i]!r} to itself is not H0")
        for j in range(n):
            if i == j:
                continue
            if grid[i][j] is None:
                raise SpaceError(f"missing distance between {points[i]!r} and {points[j]!r}")
            if grid[i][j] == H0:
                raise SpaceError(f"distinct points {points[i]!r}, {points[j]!r} at distance H0")
    meta = {"complete": "assumed"}
    meta.update(metadata or {})
    return PMSpace(points, tuple(tuple(row) for row in grid), mode, meta)


def ultrametric_witness(points, beta) -> Optional[tuple]:
    """First triple (a, b, c) with ``beta[a][c] > max(beta[a][b], beta[b][c])``."""
    n = len(points)
    for i, j, k in itertools.permutations(range(n), 3):
        if beta[i][k] > max(beta[i][j], beta[j][k]):
            return (points[i], points[j], points[k])
    return None


def ultrametric_plateau_space(points: Sequence[Hashable], beta_table, tnorm: TNorm = MIN,
                              mode: str = "tau_star", validate: bool = True) -> PMSpace:
    """Space with ``F_{p,q}`` constant ``1 - beta(p, q)`` on ``(0, inf)``."""
    points = tuple(points)
    n = len(points)
    if len(beta_table) != n or any(len(row) != n for row in beta_table):
        raise SpaceError("beta table shape does not match the point set")
    for i in range(n):
        if beta_table[i][i] != 0:
            raise SpaceError(f"beta({points[i]!r}, {points[i]!r}) must be 0")
        for j in range(n):
            if beta_table[i][j] != beta_table[j][i]:
                raise SpaceError(f"beta is not symmetric at ({points[i]!r}, {points[j]!r})")
            if not 0 <= beta_table[i][j] <= 1:
                raise SpaceError(f"beta({points[i]!r}, {points[j]!r}) outside [0, 1]")
    if validate:
        w = ultrametric_witness(points, beta_table)
        if w is not None:
            raise UltrametricError(w)
    table = {(points[i], points[j]): plateau(beta_table[i][j])
             for i in range(n) for j in range(i + 1, n)}
    return build_space(points, table, TriangleMode(mode, tnorm),
                       {"family": "ultrametric_plateau", "beta": [list(r) for r in beta_table]})


def simple_space(points: Sequence[Hashable], metric_table, shape: Ddf, tnorm: TNorm = MIN,
                 mode: str = "tau_star") -> PMSpace:
    """``F_{p,q}(t) = G(t / d(p, q))`` for an ordinary metric ``d`` and shape ``G``."""
    points = tuple(points)
    n = len(points)
    d = metric_table
    if len(d) != n or any(len(row) != n for row in d):
        raise SpaceError("metric table shape does not match the point set")
    for i in range(n):
        if d[i][i] != 0:
            raise MetricError((points[i],), f"d({points[i]!r}, {points[i]!r}) must be 0")
        for j in range(n):
            if d[i][j] != d[j][i]:
                raise MetricError((points[i], points[j]), "metric is not symmetric")
            if i != j and not d[i][j] > 0:
                raise MetricError((points[i], points[j]), "distinct points at metric distance 0")
    for i, j, k in itertools.permutations(range(n), 3):
        if d[i][k] > d[i][j] + d[j][k]:
            raise MetricError((points[i], points[j], points[k]))
    if shape.eval(0) != 0 or shape == H0:
        raise SpaceError("shape must vanish at 0 and differ from H0")
    table = {(points[i], points[j]): shape.scale(d[i][j]) for i in range(n) for j in range(i + 1, n)}
    return build_space(points, table, TriangleMode(mode, tnorm), {"family": "simple"})


# -- axiom (iii) ----------------------------------------------------------

@dataclass
class TriangleViolation:
    triple: tuple
    t: object
    lhs: object
    rhs: object


@dataclass
class SpaceReport:
    triples_checked: int
    violations: List[TriangleViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _threads() -> int:
    raw = os.environ.get("PMFIX_THREADS")
    if raw is None:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError("PMFIX_THREADS must be an integer >= 1")
    return n


def check_axioms(space: PMSpace, workers: Optional[int] = None) -> SpaceReport:
    """Check ``F_{p,r} >= tau(F_{p,q}, F_{q,r})`` for every ordered triple."""
    n = len(space)
    # distinct distance functions are few, so verdicts are cached per id triple
    ids: Dict[Ddf, int] = {}
    table = [[ids.setdefault(F, len(ids)) for F in row] for row in space.matrix]
    distinct = list(ids)
    verdicts: Dict[tuple, Optional[object]] = {}
    combined: Dict[tuple, Ddf] = {}

    def verdict(a, b, c):
        key = (a, b, c)
        if key not in verdicts:
            comb = combined.get((a, b))
            if comb is None:
                comb = combined[(a, b)] = space.mode(distinct[a], distinct[b])
            verdicts[key] = geq_witness(distinct[c], comb)
        return verdicts[key]

    def check_row(i):
        found = []
        row_i = table[i]
        for j in range(n):
            a, row_j = row_i[j], table[j]
            for k in range(n):
                t = verdict(a, row_j[k], row_i[k])
                if t is not None:
                    trip = (space.points[i], space.points[j], space.points[k])
                    comb = combined[(a, row_j[k])]
                    found.append(TriangleViolation(trip, t, space.matrix[i][k].eval(t), comb.eval(t)))
        return found

    workers = workers or _threads()
    report = SpaceReport(triples_checked=n ** 3)
    if workers > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(check_row, range(n)))
    else:
        rows = [check_row(i) for i in range(n)]
    for r in rows:
        report.violations.extend(r)
    return report


# -- spheres --------------------------------------------------------------

@dataclass(frozen=True)
class SphereSpec:
    center: Hashable
    r: object
    t: object
    closed: bool = True

    def __post_init__(self):
        # r = 1 is admitted for open spheres so the "whole space" case is expressible
        if not 0 < self.r <= 1:
            raise ValueError("sphere radius must lie in (0, 1]")
        if not self.t > 0:
            raise ValueError("sphere parameter t must be positive")


def sphere_members(space: PMSpace, spec: SphereSpec) -> List[Hashable]:
    level = 1 - spec.r
    out = []
    for x in space.points:
        v = space.F(x, spec.center, spec.t)
        if (v >= level) if spec.closed else (v > level):
            out.append(x)
    return out


def t_limit_points(space: PMSpace, subset: Iterable[Hashable], t) -> List[Hashable]:
    """Points ``y`` whose every t-open sphere meets ``subset``.

    On a finite set this happens iff ``max_s F_{y,s}(t) == 1``.
    """
    subset = list(subset)
    if not subset:
        return []
    return [y for y in space.points if max(space.F(y, s, t) for s in subset) == 1]


def is_t_closed(space: PMSpace, subset: Iterable[Hashable], t) -> bool:
    subset = set(subset)
    for p in subset:
        space.index(p)
    return all(y in subset for y in t_limit_points(space, subset, t))


# -- sequences ------------------------------------------------------------

@dataclass(frozen=True)
class SequenceDiagnostics:
    sequence: Tuple[Hashable, ...]
    alpha: object
    t: object
    target: Optional[Hashable] = None

    def __post_init__(self):
        object.__setattr__(self, "sequence", tuple(self.sequence))
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.t > 0:
            raise ValueError("t must be positive")


@dataclass
class PrefixReport:
    """Least index from which a finite-prefix condition holds.

    ``m_index`` is None on failure; ``failures`` lists offending indices.
    """

    m_index: Optional[int]
    failures: List[tuple] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.m_index is not None


def check_convergence(space: PMSpace, diag: SequenceDiagnostics) -> PrefixReport:
    if diag.target is None:
        raise ValueError("convergence check needs a target point")
    level = 1 - diag.alpha
    bad = [n for n, x in enumerate(diag.sequence)
           if not space.F(x, diag.target, diag.t) > level]
    m = bad[-1] + 1 if bad else 0
    if m >= len(diag.sequence):
        return PrefixReport(None, [(n,) for n in bad])
    return PrefixReport(m, [(n,) for n in bad])


def check_cauchy_prefix(space: PMSpace, sequence: Sequence[Hashable], alpha, t, p_max: int) -> PrefixReport:
    """Least ``m`` with ``F_{x_{n+p}, x_n}(t) > 1 - alpha`` for all listed ``n >= m, p <= p_max``.

    Holds only if at least one pair lies beyond ``m``; this is a statement about
    the listed prefix, not a completeness proof.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    seq = list(sequence)
    level = 1 - alpha
    bad = [(n, n + p) for n in range(len(seq)) for p in range(1, p_max + 1)
           if n + p < len(seq) and not space.F(seq[n + p], seq[n], t) > level]
    m = max((n for n, _ in bad), default=-1) + 1
    if m > len(seq) - 2:
        return PrefixReport(None, bad)
    return PrefixReport(m, bad)


@dataclass
class JointLimitReport:
    """``start_index`` is the first n after which every difference is within eps.

    When an ``alpha`` was supplied, ``convergence_index`` is the larger of the two
    convergence indices (None if either sequence failed to converge).
    """

    limit_value: object
    start_index: Optional[int]
    differences: List[object]
    alpha: object = None
    convergence_index: Optional[int] = None

    @property
    def holds(self) -> bool:
        if self.start_index is None:
            return False
        if self.alpha is None:
            return True
        return self.convergence_index is not None and self.start_index <= self.convergence_index


def check_joint_limit(space: PMSpace, xs, ys, x, y, t, eps, alpha=None) -> JointLimitReport:
    """``|F_{x_n,y_n}(t) - F_{x,y}(t)| <= eps`` beyond the joint convergence index."""
    xs, ys = list(xs), list(ys)
    if len(xs) != len(ys):
        raise ValueError("sequences must have equal length")
    target = space.F(x, y, t)
    diffs = [abs(space.F(a, b, t) - target) for a, b in zip(xs, ys)]
    bad = [n for n, d in enumerate(diffs) if d > eps]
    start = bad[-1] + 1 if bad else 0
    if start >= len(diffs):
        start = None
    conv = None
    if alpha is not None:
        rx = check_convergence(space, SequenceDiagnostics(xs, alpha, t, x))
        ry = check_convergence(space, SequenceDiagnostics(ys, alpha, t, y))
        if rx.holds and ry.holds:
            conv = max(rx.m_index, ry.m_index)
    return JointLimitReport(target, start, diffs, alpha, conv)


# -- continuity -----------------------------------------------------------

@dataclass
class ContinuityReport:
    """Finite probe of the epsilon-delta condition; a pass is evidence only."""

    probes: int
    failures: List[tuple] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_continuity(space: PMSpace, f, eps_grid: Sequence[object], t_grid: Sequence[object],
                     at: Optional[Iterable[Hashable]] = None) -> ContinuityReport:
    """Probe continuity of ``f`` at each point for every ``(eps, t)`` pair.

    On a finite space a suitable delta exists iff every ``x`` with
    ``F_{x,a}(t) = 1`` has ``F_{f x, f a}(t) > 1 - eps``.
    """
    points = list(at) if at is not None else list(space.points)
    report = ContinuityReport(probes=len(points) * len(eps_grid) * len(t_grid))
    for a in points:
        for t in t_grid:
            near = [x for x in space.points if space.F(x, a, t) == 1]
            for eps in eps_grid:
                for x in near:
                    if not space.F(f(x), f(a), t) > 1 - eps:
                        report.failures.append((a, x, eps, t))
                        break
    return report
