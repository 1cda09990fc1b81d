"""Defect functionals for the four contraction classes.

Every checker returns a :class:`ContractionReport` whose ``max_defect`` is the
largest violation over all ordered pairs and probed ``t``; the contraction
holds iff ``max_defect <= tolerance``.

The probe set is the caller's grid plus one point inside every constancy piece
of the pair's defect, so on step-function spaces the TSR, TSR-P and B checks
are decisive over all ``t > 0``. The H check compares against ``1 - t``, which
is not piecewise constant, and stays a grid check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from ._numbers import format_number
from .ddf import piece_probes
from .space import PMSpace

TSR, TSR_P, B, H = "TSR", "TSR_P", "B", "H"
CLASSES = (TSR, TSR_P, B, H)
EXACT_TOL = 0
SAMPLED_TOL = 1e-12

DEFAULT_T_GRID = tuple(Fraction(1, 2 ** i) for i in range(10, -1, -1)) + (Fraction(2), Fraction(4), Fraction(8))


class SelfMap:
    """A total map on a finite point set given as a lookup table."""

    def __init__(self, table: Mapping[Hashable, Hashable]):
        self.table = dict(table)

    def __call__(self, x):
        try:
            return self.table[x]
        except KeyError:
            raise KeyError(f"map is undefined at {x!r}") from None

    def __eq__(self, other):
        return isinstance(other, SelfMap) and self.table == other.table

    def __repr__(self):
        return f"SelfMap({self.table!r})"

    @classmethod
    def from_function(cls, points: Iterable[Hashable], fn: Callable) -> "SelfMap":
        return cls({p: fn(p) for p in points})

    def validate(self, space: PMSpace) -> None:
        missing = [p for p in space.points if p not in self.table]
        if missing:
            raise ValueError(f"map is not total: undefined at {missing[0]!r}")
        escaped = [(p, q) for p, q in self.table.items() if p in space and q not in space]
        if escaped:
            p, q = escaped[0]
            raise ValueError(f"map is not closed: {p!r} -> {q!r} leaves the point set")

    def power(self, m: int) -> "SelfMap":
        if m < 1:
            raise ValueError("power must be >= 1")
        out = {}
        for p in self.table:
            q = p
            for _ in range(m):
                q = self.table[q]
            out[p] = q
        return SelfMap(out)

    def to_json(self):
        return {"type": "table", "pairs": [[format_number(p), format_number(q)] for p, q in self.table.items()]}


@dataclass
class ContractionReport:
    klass: str
    k: object
    max_defect: object
    witness: Optional[Tuple[object, object, object, Optional[int]]]
    tolerance: object = 0
    pairs_checked: int = 0
    probes_checked: int = 0
    per_t: Dict[object, object] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.max_defect <= self.tolerance

    def to_json(self):
        w = None
        if self.witness is not None:
            x, y, t, m = self.witness
            w = {"x": format_number(x), "y": format_number(y), "t": format_number(t), "m": m}
        return {
            "class": self.klass,
            "k": format_number(self.k),
            "max_defect": format_number(self.max_defect),
            "holds": self.holds,
            "tolerance": format_number(self.tolerance),
            "witness": w,
            "pairs_checked": self.pairs_checked,
            "probes_checked": self.probes_checked,
        }


def default_tolerance(space: PMSpace):
    """Zero on exact inputs, a float slack otherwise."""
    return EXACT_TOL if space.exact else SAMPLED_TOL


def _check_args(space: PMSpace, f: SelfMap, k):
    if not 0 < k < 1:
        raise ValueError(f"contraction constant k={k!r} must lie in (0, 1)")
    f.validate(space)


def _pairs(space: PMSpace, domain):
    pts = list(space.points) if domain is None else list(dict.fromkeys(domain))
    return [(x, y) for x in pts for y in pts if x != y]


def _scan(space, f, k, t_grid, domain, tolerance, klass, augment, defect_fn, jumps_fn, m_values=(None,)):
    _check_args(space, f, k)
    if tolerance is None:
        tolerance = default_tolerance(space)
    grid = [t for t in t_grid if t > 0]
    if not grid and not augment:
        raise ValueError("t_grid must contain positive values")
    best, witness = -math.inf, None
    per_t: Dict[object, object] = {}
    probes = 0
    pairs = _pairs(space, domain)
    for x, y in pairs:
        Fxy, Ffxfy = space.distance(x, y), space.distance(f(x), f(y))
        for m in m_values:
            ts = list(grid)
            if augment:
                ts += piece_probes(jumps_fn(Fxy, Ffxfy, m))
            for t in ts:
                d = defect_fn(Fxy, Ffxfy, t, m)
                if d is None:
                    continue
                probes += 1
                if t in grid and (t not in per_t or d > per_t[t]):
                    per_t[t] = d
                if d > best:
                    best, witness = d, (x, y, t, m)
    if witness is None:
        # nothing probed (no pairs, or no H trigger): vacuously satisfied
        best = 0
    return ContractionReport(klass, k, best, witness, tolerance, len(pairs), probes, per_t)


def tsr_defect(space: PMSpace, f: SelfMap, k, t_grid: Sequence[object] = DEFAULT_T_GRID,
               domain=None, tolerance=None, augment: bool = True) -> ContractionReport:
    """``max (1 - F_{fx,fy}(k t)) - k (1 - F_{x,y}(t))`` over pairs and probes.

    ``domain`` restricts the pairs (e.g. to a sphere); images may lie anywhere.
    """
    def defect(Fxy, Ff, t, _m):
        return (1 - Ff.eval(k * t)) - k * (1 - Fxy.eval(t))

    def jumps(Fxy, Ff, _m):
        return list(Fxy.thresholds) + [a / k for a in Ff.thresholds]

    return _scan(space, f, k, t_grid, domain, tolerance, TSR, augment, defect, jumps)


def tsr_p_defect(space: PMSpace, f: SelfMap, k, t_grid: Sequence[object] = DEFAULT_T_GRID,
                 m_max: int = 3, domain=None, tolerance=None, augment: bool = True) -> ContractionReport:
    """``(1 - F_{fx,fy}(k^{m+1} t)) - k (1 - F_{x,y}(k^m t))`` for ``m = 0..m_max``."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")

    def defect(Fxy, Ff, t, m):
        km = k ** m
        return (1 - Ff.eval(km * k * t)) - k * (1 - Fxy.eval(km * t))

    def jumps(Fxy, Ff, m):
        km = k ** m
        return [a / km for a in Fxy.thresholds] + [a / (km * k) for a in Ff.thresholds]

    return _scan(space, f, k, t_grid, domain, tolerance, TSR_P, augment, defect, jumps,
                 m_values=range(m_max + 1))


def b_contraction_check(space: PMSpace, f: SelfMap, k, t_grid: Sequence[object] = DEFAULT_T_GRID,
                        domain=None, tolerance=None, augment: bool = True) -> ContractionReport:
    """``max F_{x,y}(t) - F_{fx,fy}(k t)``."""
    def defect(Fxy, Ff, t, _m):
        return Fxy.eval(t) - Ff.eval(k * t)

    def jumps(Fxy, Ff, _m):
        return list(Fxy.thresholds) + [a / k for a in Ff.thresholds]

    return _scan(space, f, k, t_grid, domain, tolerance, B, augment, defect, jumps)


def h_contraction_check(space: PMSpace, f: SelfMap, k, t_grid: Sequence[object] = DEFAULT_T_GRID,
                        domain=None, tolerance=None, augment: bool = True) -> ContractionReport:
    """Shortfall ``(1 - k t) - F_{fx,fy}(k t)`` on probes where ``F_{x,y}(t) > 1 - t``.

    Each probe is judged on its own; untriggered probes contribute nothing.
    """
    def defect(Fxy, Ff, t, _m):
        if not Fxy.eval(t) > 1 - t:
            return None
        return (1 - k * t) - Ff.eval(k * t)

    def jumps(Fxy, Ff, _m):
        return list(Fxy.thresholds) + [a / k for a in Ff.thresholds]

    return _scan(space, f, k, t_grid, domain, tolerance, H, augment, defect, jumps)


CHECKERS = {TSR: tsr_defect, TSR_P: tsr_p_defect, B: b_contraction_check, H: h_contraction_check}


def check_contraction(space, f, klass, k, t_grid=DEFAULT_T_GRID, m_max=3, **kw) -> ContractionReport:
    klass = klass.upper().replace("-", "_")
    if klass not in CHECKERS:
        raise ValueError(f"unknown contraction class {klass!r}")
    if klass == TSR_P:
        return tsr_p_defect(space, f, k, t_grid, m_max=m_max, **kw)
    return CHECKERS[klass](space, f, k, t_grid, **kw)


def plateau_tsr_holds(beta: Mapping[Tuple[Hashable, Hashable], object], f: SelfMap, k) -> bool:
    """Closed form on plateau spaces: ``beta(fx, fy) <= k * beta(x, y)`` for all pairs."""
    def b(x, y):
        return 0 if x == y else beta[(x, y)]
    pts = {x for x, _ in beta}
    return all(b(f(x), f(y)) <= k * b(x, y) for x in pts for y in pts if x != y)


# -- constant search ------------------------------------------------------

class NonMonotoneProfile(RuntimeError):
    """The holds/fails profile over k is not monotone, so bisection would be unsound."""

    def __init__(self, profile):
        self.profile = profile
        super().__init__("contraction profile over k is not monotone; refusing to bisect")


def k_profile(space, f, klass, t_grid=DEFAULT_T_GRID, scan: int = 64, **kw) -> List[Tuple[Fraction, bool]]:
    ks = [Fraction(i, scan) for i in range(1, scan)]
    return [(k, check_contraction(space, f, klass, k, t_grid, **kw).holds) for k in ks]


def estimate_min_k(space: PMSpace, f: SelfMap, klass: str = TSR, t_grid=DEFAULT_T_GRID,
                   tol=Fraction(1, 2 ** 20), scan: int = 64, **kw) -> Optional[Fraction]:
    """Smallest k in (0, 1) certified by the chosen check, to within ``tol``.

    A coarse scan establishes that the holds-predicate is monotone in k; the
    returned value is always one where the check passed.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    profile = k_profile(space, f, klass, t_grid, scan, **kw)
    flags = [h for _, h in profile]
    if True not in flags:
        return None
    first = flags.index(True)
    if not all(flags[first:]):
        raise NonMonotoneProfile(profile)
    if first == 0:
        return profile[0][0]
    lo, hi = profile[first - 1][0], profile[first][0]
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if check_contraction(space, f, klass, mid, t_grid, **kw).holds:
            hi = mid
        else:
            lo = mid
    return hi


def per_t_min_k(space: PMSpace, f: SelfMap, klass: str = TSR, t_grid=DEFAULT_T_GRID,
                tol=Fraction(1, 2 ** 20), **kw) -> Dict[object, Optional[Fraction]]:
    """k(t) under the per-t reading: each grid t judged alone, no augmentation."""
    out = {}
    for t in t_grid:
        try:
            out[t] = estimate_min_k(space, f, klass, [t], tol, augment=False, **kw)
        except NonMonotoneProfile:
            out[t] = None
    return out
