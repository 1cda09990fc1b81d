import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from pmfix.algebra import MIN, TriangleMode, tau_star
from pmfix.catalog import (CANONICAL_POINTS, canonical_beta, canonical_space, halving_map, random_ultrametric,
                           simple_counterexample, SIMPLE_POINTS)
from pmfix.ddf import H0, dirac, is_h0, plateau
from pmfix.space import (MetricError, SequenceDiagnostics, SpaceError, SphereSpec, UltrametricError, build_space,
                         check_axioms, check_cauchy_prefix, check_continuity, check_convergence, check_joint_limit,
                         is_t_closed, simple_space, sphere_members, t_limit_points, ultrametric_plateau_space)

POINTWISE = TriangleMode("tau_pointwise", MIN)
STAR = TriangleMode("tau_star", MIN)
HALVES = [Fr(1, 2 ** n) for n in range(5)] + [Fr(0)]


def test_two_point_space():
    S = build_space(["a", "b"], {("a", "b"): plateau(Fr(2, 5))}, POINTWISE)
    assert S.distance("b", "a") == plateau(Fr(2, 5))
    assert S.distance("a", "a") == H0
    assert check_axioms(S).ok
    assert S.metadata["complete"] == "assumed"


def test_build_space_errors():
    with pytest.raises(SpaceError):
        build_space(["a", "b"], {("a", "a"): plateau(Fr(1, 10)), ("a", "b"): plateau(Fr(1, 2))}, POINTWISE)
    with pytest.raises(SpaceError):
        build_space(["a", "b"], {("a", "b"): H0}, POINTWISE)
    with pytest.raises(SpaceError):
        build_space(["a", "b", "c"], {("a", "b"): plateau(Fr(1, 2))}, POINTWISE)
    with pytest.raises(SpaceError):
        build_space(["a", "b"], {("a", "b"): plateau(Fr(1, 2)), ("b", "a"): plateau(Fr(1, 3))}, POINTWISE)


@pytest.mark.parametrize("mode", ["tau_star", "tau_pointwise"])
def test_canonical_space_passes_axioms(mode):
    S = canonical_space(mode)
    assert len(S) == 6
    assert check_axioms(S).ok


def test_ultrametric_violation_has_witness():
    beta = [[0, Fr(1, 2), Fr(9, 10)], [Fr(1, 2), 0, Fr(1, 2)], [Fr(9, 10), Fr(1, 2), 0]]
    with pytest.raises(UltrametricError) as e:
        ultrametric_plateau_space(["a", "b", "c"], beta)
    assert set(e.value.witness) == {"a", "b", "c"}


def test_non_ultrametric_plateau_space_fails_check_axioms():
    beta = [[0, Fr(1, 2), Fr(9, 10)], [Fr(1, 2), 0, Fr(1, 2)], [Fr(9, 10), Fr(1, 2), 0]]
    S = ultrametric_plateau_space(["a", "b", "c"], beta, validate=False)
    rep = check_axioms(S)
    assert not rep.ok
    v = rep.violations[0]
    assert v.lhs < v.rhs


def test_singleton_space():
    S = ultrametric_plateau_space(["x"], [[0]])
    assert check_axioms(S).ok


def test_simple_space_examples():
    S = simple_counterexample(points=SIMPLE_POINTS)
    assert check_axioms(S).ok
    with pytest.raises(MetricError):
        simple_space([0, 1, 2], [[0, 1, 5], [1, 0, 1], [5, 1, 0]], dirac(1))
    D = simple_space([0, 1, 3], [[0, 1, 3], [1, 0, 2], [3, 2, 0]], dirac(1))
    assert D.distance(0, 3) == dirac(3)
    assert D.distance(1, 3) == dirac(2)


def test_sphere_members_canonical():
    S = canonical_space()
    for t in (Fr(1, 100), 1, 5):
        assert set(sphere_members(S, SphereSpec(Fr(1, 4), Fr(3, 10), t))) == {Fr(1, 4), Fr(1, 8), Fr(1, 16), 0}
    assert sphere_members(S, SphereSpec(Fr(1, 4), Fr(1, 100), 1)) == [Fr(1, 4)]
    whole = sphere_members(S, SphereSpec(Fr(0), Fr(1), 1, closed=False))
    assert set(whole) == set(CANONICAL_POINTS) - {Fr(1)}


def test_sphere_spec_validation():
    with pytest.raises(ValueError):
        SphereSpec(0, 0, 1)
    with pytest.raises(ValueError):
        SphereSpec(0, Fr(1, 2), 0)


def test_t_closed_examples():
    S = canonical_space()
    assert is_t_closed(S, [], 1)
    assert is_t_closed(S, S.points, 1)
    for c in S.points:
        for r in (Fr(1, 10), Fr(3, 10), Fr(7, 10)):
            for t in (Fr(1, 2), 1, 2):
                assert is_t_closed(S, sphere_members(S, SphereSpec(c, r, t)), t)


def test_t_limit_points_of_a_set_are_its_members_in_plateau_spaces():
    S = canonical_space()
    assert set(t_limit_points(S, [Fr(1, 2), 0], 1)) == {Fr(1, 2), 0}


def test_convergence_examples():
    S = canonical_space()
    assert check_convergence(S, SequenceDiagnostics(HALVES, Fr(1, 10), 1, Fr(0))).m_index == 4
    assert check_convergence(S, SequenceDiagnostics([0, 0, 0], Fr(1, 10), 1, Fr(0))).m_index == 0
    stuck = [Fr(1, 2)] * 5
    assert not check_convergence(S, SequenceDiagnostics(stuck, Fr(1, 10), 1, Fr(1, 4))).holds


def test_cauchy_prefix_examples():
    S = canonical_space()
    assert check_cauchy_prefix(S, HALVES, Fr(1, 10), 1, 3).m_index == 4
    assert check_cauchy_prefix(S, [0] * 4, Fr(1, 10), 1, 2).m_index == 0
    alt = [Fr(1, 2), Fr(1, 4)] * 4
    assert not check_cauchy_prefix(S, alt, Fr(2, 5), 1, 2).holds


def test_joint_limit_examples():
    S = canonical_space()
    xs = [Fr(1, 2 ** n) for n in range(5)]
    ys = [Fr(1, 4)] * 5
    rep = check_joint_limit(S, xs, ys, Fr(0), Fr(1, 4), 1, 0)
    assert rep.limit_value == Fr(3, 4)
    assert all(d == 0 for d in rep.differences[3:])
    assert rep.start_index == 3
    both = check_joint_limit(S, [0] * 3, [Fr(1, 2)] * 3, 0, Fr(1, 2), 1, 0)
    assert both.start_index == 0 and both.holds


def test_continuity_probe():
    S = canonical_space()
    assert check_continuity(S, halving_map(), [Fr(1, 10)], [1]).ok


def test_thread_pool_matches_serial(monkeypatch):
    S = canonical_space("tau_star")
    serial = check_axioms(S, workers=1)
    assert check_axioms(S, workers=4).triples_checked == serial.triples_checked


# -- properties -------------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10 ** 6))
def test_random_ultrametric_spaces_pass(n, seed):
    beta = random_ultrametric(n, random.Random(seed))
    for mode in ("tau_star", "tau_pointwise"):
        assert check_axioms(ultrametric_plateau_space(list(range(n)), beta, MIN, mode)).ok


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10 ** 6),
       st.fractions(0, 3, max_denominator=4), st.fractions(0, 3, max_denominator=4))
def test_menger_split_inequality(n, seed, t1, t2):
    beta = random_ultrametric(n, random.Random(seed))
    S = ultrametric_plateau_space(list(range(n)), beta, MIN, "tau_star")
    for p in range(n):
        for q in range(n):
            for r in range(n):
                assert S.F(p, r, t1 + t2) >= min(S.F(p, q, t1), S.F(q, r, t2))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CANONICAL_POINTS), st.fractions(Fr(1, 100), 1, max_denominator=100),
       st.fractions(Fr(1, 100), 1, max_denominator=100), st.fractions(Fr(1, 10), 4, max_denominator=10))
def test_sphere_members_monotone_in_r(c, r1, r2, t):
    S = canonical_space()
    lo, hi = sorted((r1, r2))
    assert set(sphere_members(S, SphereSpec(c, lo, t))) <= set(sphere_members(S, SphereSpec(c, hi, t)))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CANONICAL_POINTS), st.sampled_from(CANONICAL_POINTS),
       st.lists(st.sampled_from(CANONICAL_POINTS), min_size=2, max_size=8))
def test_unique_limits(x, y, seq):
    S = canonical_space("tau_star")
    alphas = [Fr(1, 10), Fr(1, 100), Fr(1, 1000)]
    ts = [Fr(1, 2), 1, 2]
    conv_x = all(check_convergence(S, SequenceDiagnostics(seq, a, t, x)).holds for a in alphas for t in ts)
    conv_y = all(check_convergence(S, SequenceDiagnostics(seq, a, t, y)).holds for a in alphas for t in ts)
    if conv_x and conv_y:
        assert is_h0(S.distance(x, y), 0)
