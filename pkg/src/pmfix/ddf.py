"""Distance distribution functions as exact left-continuous step functions.

A :class:`Ddf` is stored as a strictly increasing list of ``(threshold, value)``
pairs. Evaluation is

    F(t) = max({v_i : a_i < t} | {0}),   F(+inf) = 1

so every constructed object is non-decreasing, left-continuous, vanishes on
``t <= 0`` and reaches 1 at infinity.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

from ._numbers import INF, format_number, is_exact, parse_number

Step = Tuple[object, object]


def _canonical(steps: Iterable[Step]) -> Tuple[Step, ...]:
    """Upper envelope of the given steps with redundant entries dropped."""
    best = {}
    for a, v in steps:
        if isinstance(a, float) and math.isnan(a):
            raise ValueError("threshold is NaN")
        if a < 0:
            raise ValueError(f"negative threshold {a!r}: outside the distance distribution family")
        if not 0 <= v <= 1:
            raise ValueError(f"value {v!r} outside [0, 1]")
        if a == INF or v == 0:
            # a jump at +inf is the built-in terminal value; a zero step is invisible
            continue
        if a not in best or v > best[a]:
            best[a] = v
    out = []
    running = 0
    for a in sorted(best):
        v = best[a]
        if v > running:
            out.append((a, v))
            running = v
    return tuple(out)


@dataclass(frozen=True)
class Ddf:
    """Left-continuous non-decreasing step function on the extended half-line.

    ``steps`` may be given in any order; the stored form is canonical, so two
    objects describing the same function compare equal.
    """

    steps: Tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", _canonical(self.steps))
        object.__setattr__(self, "_thresholds", tuple(a for a, _ in self.steps))

    # -- evaluation -----------------------------------------------------
    def __call__(self, t) -> object:
        return self.eval(t)

    def eval(self, t):
        if t == INF:
            return 1
        i = bisect_left(self._thresholds, t)
        return self.steps[i - 1][1] if i else 0

    def right_value(self, t):
        """Limit from the right at ``t``, i.e. the value on ``(t, next threshold]``."""
        if t == INF:
            return 1
        i = bisect_right(self._thresholds, t)
        return self.steps[i - 1][1] if i else 0

    @property
    def thresholds(self) -> Tuple[object, ...]:
        return self._thresholds

    @property
    def values(self) -> Tuple[object, ...]:
        return tuple(v for _, v in self.steps)

    @property
    def exact(self) -> bool:
        return all(is_exact(a) and is_exact(v) for a, v in self.steps)

    def scale(self, factor) -> "Ddf":
        """``t -> F(t / factor)`` for ``factor > 0``."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        return Ddf(tuple((a * factor, v) for a, v in self.steps))

    # -- comparisons ----------------------------------------------------
    def __ge__(self, other: "Ddf") -> bool:
        return geq(self, other)

    def __le__(self, other: "Ddf") -> bool:
        return geq(other, self)

    def to_json(self):
        return [[format_number(a), format_number(v)] for a, v in self.steps]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[object]]) -> "Ddf":
        steps = []
        for pair in data:
            if len(pair) != 2:
                raise ValueError(f"breakpoint must be [threshold, value], got {pair!r}")
            steps.append((parse_number(pair[0]), parse_number(pair[1])))
        return cls(tuple(steps))

    def __repr__(self):
        if not self.steps:
            return "Ddf(H_inf)"
        body = ", ".join(f"({format_number(a)}, {format_number(v)})" for a, v in self.steps)
        return f"Ddf({body})"


def eval_ddf(F: Ddf, t):
    return F.eval(t)


def dirac(a) -> Ddf:
    """Dirac distribution ``H_a``: 0 on ``[-inf, a]``, 1 on ``(a, inf]``."""
    if a == INF:
        return Ddf(())
    if a < 0:
        raise ValueError(f"H_{a} is not a distance distribution function")
    return Ddf(((a, 1),))


H0 = dirac(Fraction(0))


def plateau(beta) -> Ddf:
    """Constant ``1 - beta`` on ``(0, inf)``."""
    if not 0 <= beta <= 1:
        raise ValueError(f"beta={beta!r} outside [0, 1]")
    return Ddf(((Fraction(0) if is_exact(beta) else 0.0, 1 - beta),))


def sample_shape(fn, grid: Sequence[object]) -> Ddf:
    """Step approximation from below: on ``(u_i, u_{i+1}]`` the value is ``fn(u_i)``.

    ``fn`` must be non-decreasing with values in ``[0, 1]`` and ``grid`` positive.
    """
    return Ddf(tuple((u, fn(u)) for u in grid))


def merged_thresholds(*fs: Ddf) -> list:
    return sorted(set().union(*(f.thresholds for f in fs)))


def geq_witness(F: Ddf, G: Ddf) -> Optional[object]:
    """A point ``t`` with ``F(t) < G(t)``, or None when ``F >= G`` everywhere."""
    us = merged_thresholds(F, G)
    for i, u in enumerate(us):
        if F.right_value(u) < G.right_value(u):
            nxt = us[i + 1] if i + 1 < len(us) else u + 1
            return (u + nxt) / 2
    return None


def geq(F: Ddf, G: Ddf) -> bool:
    """Pointwise order ``F(t) >= G(t)`` for all t, decided on merged thresholds."""
    return geq_witness(F, G) is None


def sup_distance(F: Ddf, G: Ddf):
    """``max_t |F(t) - G(t)|`` computed exactly on merged thresholds."""
    return max((abs(F.right_value(u) - G.right_value(u)) for u in merged_thresholds(F, G)), default=0)


def close(F: Ddf, G: Ddf, tol=0) -> bool:
    if tol == 0:
        return F == G
    return sup_distance(F, G) <= tol


def is_h0(F: Ddf, tol=0) -> bool:
    """True iff ``F(t) >= 1 - tol`` for every ``t > 0``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    # F is non-decreasing, so the infimum over t > 0 is the value just above 0
    return F.right_value(0) >= 1 - tol


def piece_probes(thresholds: Iterable[object]) -> list:
    """One interior point per constancy piece of a step function on ``(0, inf)``.

    Given every jump location, the returned points hit each open piece between
    consecutive positive jumps plus the unbounded tail.
    """
    pos = sorted({a for a in thresholds if a > 0 and a != INF})
    probes = []
    prev = 0
    for a in pos:
        probes.append((prev + a) / 2)
        prev = a
    probes.append(prev + 1 if prev == 0 else prev * 2)
    return probes
