"""Ready-made spaces and maps used by the bundled configs and the tests."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .algebra import MIN, TNorm
from .contraction import SelfMap
from .ddf import Ddf, sample_shape
from .space import PMSpace, simple_space, ultrametric_plateau_space

CANONICAL_POINTS = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16), Fraction(0))


def canonical_beta(points: Sequence[Fraction] = CANONICAL_POINTS) -> List[List[Fraction]]:
    """``beta(x, y) = max(x, y)`` off the diagonal; an ultrametric on any set of reals >= 0."""
    return [[Fraction(0) if x == y else max(x, y) for y in points] for x in points]


def canonical_space(mode: str = "tau_pointwise", tnorm: TNorm = MIN) -> PMSpace:
    return ultrametric_plateau_space(CANONICAL_POINTS, canonical_beta(), tnorm, mode)


def halving_map(points: Sequence[Fraction] = CANONICAL_POINTS) -> SelfMap:
    """``x -> x/2``, with the smallest positive point sent to 0 so the set is closed."""
    pts = set(points)
    return SelfMap({x: x / 2 if x / 2 in pts else Fraction(0) for x in points})


def rational_shape(u) -> Fraction:
    return u / (u + 1)


SHAPE_GRID = tuple(Fraction(i * i, 64) for i in range(1, 65))


def sampled_shape(grid: Sequence[Fraction] = SHAPE_GRID) -> Ddf:
    """``u / (u + 1)`` sampled from below on a 64-point quadratic grid."""
    return sample_shape(rational_shape, grid)


SIMPLE_POINTS = (Fraction(0), Fraction(1, 2), Fraction(1))
# halving leaves {0, 1/2, 1}; adding 1/4 keeps x/2 exact on every pair drawn from SIMPLE_POINTS
SIMPLE_AMBIENT = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1))


def simple_counterexample(mode: str = "tau_star", points: Sequence[Fraction] = SIMPLE_AMBIENT) -> PMSpace:
    d = [[abs(x - y) for y in points] for x in points]
    return simple_space(points, d, sampled_shape(), MIN, mode)


def simple_halving_map(points: Sequence[Fraction] = SIMPLE_AMBIENT) -> SelfMap:
    return halving_map(points)


def swap_map(a, b) -> SelfMap:
    return SelfMap({a: b, b: a})


# -- random families ------------------------------------------------------

def random_ultrametric(n: int, rng: random.Random, levels: int = 8,
                       top=Fraction(9, 10)) -> List[List[Fraction]]:
    """Random ultrametric on ``n`` points with values in ``{top / 2^j}``.

    Built from a random ordering and gap heights: ``beta(i, j)`` is the largest
    gap between positions ``i`` and ``j``, which satisfies the strong triangle
    inequality by construction.
    """
    order = list(range(n))
    rng.shuffle(order)
    gaps = [top / 2 ** rng.randrange(levels) for _ in range(n - 1)]
    pos = {p: i for i, p in enumerate(order)}
    beta = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if a != b:
                i, j = sorted((pos[a], pos[b]))
                beta[a][b] = max(gaps[i:j])
    return beta


def break_ultrametric(beta: List[List[Fraction]], rng: random.Random) -> Tuple[List[List[Fraction]], tuple]:
    """Raise one entry above the two-step maximum through some third point.

    Returns the mutated copy and the triple ``(a, b, c)`` used.
    """
    n = len(beta)
    a, b, c = rng.sample(range(n), 3)
    out = [row[:] for row in beta]
    hi = max(beta[a][b], beta[b][c])
    new = (hi + 1) / 2 if hi < 1 else hi
    out[a][c] = out[c][a] = new
    return out, (a, b, c)


def random_root_contraction(beta: List[List[Fraction]], root: int, k, rng: random.Random) -> SelfMap:
    """Random map with ``beta(fx, fy) <= k * beta(x, y)`` fixing ``root``.

    Each ``x`` goes to a random point within ``k * sep(x)`` of the root, where
    ``sep(x)`` is the distance from ``x`` to its nearest neighbour. The strong
    triangle inequality then bounds every image pair by ``k * beta(x, y)``.
    """
    n = len(beta)
    table = {}
    for x in range(n):
        if x == root:
            table[x] = root
            continue
        sep = min(beta[x][y] for y in range(n) if y != x)
        choices = [z for z in range(n) if beta[z][root] <= k * sep]
        table[x] = rng.choice(choices)
    return SelfMap(table)


def random_plateau_space(n: int, rng: random.Random, mode: str = "tau_star",
                         tnorm: TNorm = MIN) -> PMSpace:
    return ultrametric_plateau_space(list(range(n)), random_ultrametric(n, rng), tnorm, mode)
