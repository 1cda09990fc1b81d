"""Triangular norms and the two triangle functions on distance distributions.

``tau_star`` is the sup-convolution that makes a space Menger; ``tau_pointwise``
combines two distributions value by value. Both are exact on step functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .ddf import H0, Ddf, close, geq, merged_thresholds

TAU_STAR = "tau_star"
TAU_POINTWISE = "tau_pointwise"
_MODE_ALIASES = {
    "tau_star": TAU_STAR,
    "sup_convolution": TAU_STAR,
    "menger": TAU_STAR,
    "tau_pointwise": TAU_POINTWISE,
    "pointwise": TAU_POINTWISE,
}


@dataclass(frozen=True)
class TNorm:
    """A binary operation on [0, 1] meant to satisfy the t-norm axioms.

    Built-ins are trusted; custom operations start with ``verified=False`` and
    only become verified through :func:`verify_tnorm`.
    """

    kind: str
    fn: Callable[[object, object], object] = field(compare=False, repr=False)
    verified: bool = True

    def __call__(self, a, b):
        return self.fn(a, b)

    @classmethod
    def custom(cls, fn, name="custom") -> "TNorm":
        return cls(name, fn, verified=False)

    @classmethod
    def from_table(cls, table: Sequence[Sequence[object]], name="table") -> "TNorm":
        """Operation given by values on a uniform ``n x n`` grid over [0,1]^2.

        Off-grid arguments use bilinear interpolation.
        """
        n = len(table) - 1
        if n < 1 or any(len(row) != n + 1 for row in table):
            raise ValueError("t-norm table must be square with at least 2x2 entries")
        rows = [tuple(r) for r in table]

        def fn(a, b):
            x, y = a * n, b * n
            i, j = min(int(math.floor(x)), n - 1), min(int(math.floor(y)), n - 1)
            fx, fy = x - i, y - j
            return (rows[i][j] * (1 - fx) * (1 - fy) + rows[i + 1][j] * fx * (1 - fy)
                    + rows[i][j + 1] * (1 - fx) * fy + rows[i + 1][j + 1] * fx * fy)

        return cls(name, fn, verified=False)


def _lukasiewicz(a, b):
    s = a + b - 1
    return s if s > 0 else 0 * s


MIN = TNorm("min", lambda a, b: a if a <= b else b)
PRODUCT = TNorm("product", lambda a, b: a * b)
LUKASIEWICZ = TNorm("lukasiewicz", _lukasiewicz)
BUILTIN_TNORMS = {"min": MIN, "minimum": MIN, "product": PRODUCT, "lukasiewicz": LUKASIEWICZ}


def tnorm_by_name(name: str) -> TNorm:
    try:
        return BUILTIN_TNORMS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown t-norm {name!r}; expected one of min, product, lukasiewicz") from None


def apply_tnorm(T: TNorm, a, b):
    if not (0 <= a <= 1 and 0 <= b <= 1):
        raise ValueError(f"t-norm arguments must lie in [0, 1], got ({a!r}, {b!r})")
    return T(a, b)


def probability_grid(grid_step) -> List[Fraction]:
    """Uniform grid on [0, 1] with exact endpoints, spacing at most ``grid_step``."""
    if not 0 < grid_step < 1:
        raise ValueError("grid_step must lie in (0, 1)")
    n = math.ceil(Fraction(grid_step).limit_denominator(10**9) ** -1)
    return [Fraction(i, n) for i in range(n + 1)]


@dataclass
class AxiomReport:
    """Violations found by a grid or sample check. Empty means none found, not proof."""

    scope: str
    violations: List[Tuple[str, tuple]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_axiom(self, name: str) -> List[tuple]:
        return [w for a, w in self.violations if a == name]

    def to_json(self):
        from ._numbers import format_number

        def fmt(x):
            if isinstance(x, Ddf):
                return x.to_json()
            return format_number(x)

        return {
            "scope": self.scope,
            "ok": self.ok,
            "violations": [{"axiom": a, "witness": [fmt(x) for x in w]} for a, w in self.violations],
        }


def check_tnorm_axioms(T: TNorm, grid_step=Fraction(1, 10), tol=0) -> AxiomReport:
    """Scan commutativity, associativity, monotonicity and the identity on a grid.

    Grid points are exact rationals, so built-ins pass with ``tol=0``.
    """
    grid = probability_grid(grid_step)
    report = AxiomReport(scope=f"uniform grid on [0,1], {len(grid)} points")

    def differ(u, v):
        return abs(u - v) > tol

    for x in grid:
        if differ(T(x, 1), x):
            report.violations.append(("identity", (x,)))
    for x, y in itertools.combinations(grid, 2):
        if differ(T(x, y), T(y, x)):
            report.violations.append(("commutativity", (x, y)))
    for x, y, z in itertools.product(grid, repeat=3):
        if differ(T(x, T(y, z)), T(T(x, y), z)):
            report.violations.append(("associativity", (x, y, z)))
        if y <= z and T(x, y) > T(x, z) + tol:
            report.violations.append(("monotonicity", (x, y, z)))
    return report


def verify_tnorm(T: TNorm, grid_step=Fraction(1, 10), tol=0) -> TNorm:
    """Return ``T`` flagged verified when the grid scan comes back clean."""
    report = check_tnorm_axioms(T, grid_step, tol)
    return replace(T, verified=report.ok) if report.ok else T


def idempotence_witnesses(T: TNorm, grid_step=Fraction(1, 100)) -> List[Fraction]:
    """Grid points where ``a * a < a``."""
    return [a for a in probability_grid(grid_step) if T(a, a) < a]


def is_idempotent_dominant(T: TNorm, grid_step=Fraction(1, 100)) -> bool:
    return not idempotence_witnesses(T, grid_step)


# -- triangle functions -------------------------------------------------

def tau_star(T: TNorm, F: Ddf, G: Ddf) -> Ddf:
    """Sup-convolution ``sup{T(F(t1), G(t2)) : t1 + t2 = t}``.

    For step functions the supremum at ``t`` collects ``T(v_i, w_j)`` for every
    pair of jumps with ``a_i + b_j < t``; boundary splits add only ``T(0, .) = 0``.
    """
    return Ddf(tuple((a + b, T(v, w)) for a, v in F.steps for b, w in G.steps))


def tau_pointwise(T: TNorm, F: Ddf, G: Ddf) -> Ddf:
    """``t -> T(F(t), G(t))``, built on the merged threshold set."""
    return Ddf(tuple((u, T(F.right_value(u), G.right_value(u))) for u in merged_thresholds(F, G)))


@dataclass(frozen=True)
class TriangleMode:
    kind: str
    tnorm: TNorm = MIN

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", _MODE_ALIASES[self.kind])
        except KeyError:
            raise ValueError(f"unknown triangle function {self.kind!r}") from None

    def __call__(self, F: Ddf, G: Ddf) -> Ddf:
        if self.kind == TAU_STAR:
            return tau_star(self.tnorm, F, G)
        return tau_pointwise(self.tnorm, F, G)

    @property
    def is_menger(self) -> bool:
        return self.kind == TAU_STAR

    def to_json(self):
        return {"triangle": self.kind, "tnorm": self.tnorm.kind}


def check_triangle_axioms(mode: TriangleMode, samples: Sequence[Ddf], tol=0) -> AxiomReport:
    """Commutativity, associativity, monotonicity and H0-identity over all sample pairs/triples."""
    if not samples:
        raise ValueError("need at least one sample")
    samples = list(dict.fromkeys(samples))
    report = AxiomReport(scope=f"{len(samples)} sampled distributions, exact step arithmetic")
    tau = mode
    cache = {}

    def t2(F, G):
        key = (F, G)
        if key not in cache:
            cache[key] = tau(F, G)
        return cache[key]

    for F in samples:
        if not close(t2(F, H0), F, tol) or not close(t2(H0, F), F, tol):
            report.violations.append(("identity", (F,)))
    for F, G in itertools.combinations(samples, 2):
        if not close(t2(F, G), t2(G, F), tol):
            report.violations.append(("commutativity", (F, G)))
    for F, G, K in itertools.product(samples, repeat=3):
        if not close(t2(F, t2(G, K)), t2(t2(F, G), K), tol):
            report.violations.append(("associativity", (F, G, K)))
        if geq(G, K) and not geq(t2(F, G), t2(F, K)):
            report.violations.append(("monotonicity", (F, G, K)))
    return report
