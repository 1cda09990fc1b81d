"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

import json
import random
import sys
import time
from fractions import Fraction as Fr
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import brute_sup_conv, grid_sup_conv, probe_points, step_eval, t_luk, t_min, t_prod  # noqa: E402
from pmfix.algebra import (LUKASIEWICZ, MIN, PRODUCT, TriangleMode, idempotence_witnesses,  # noqa: E402
                           is_idempotent_dominant, tau_star)
from pmfix.catalog import (CANONICAL_POINTS, break_ultrametric, canonical_space, halving_map,  # noqa: E402
                           random_root_contraction, random_ultrametric)
from pmfix.cli import main  # noqa: E402
from pmfix.config import load_config, read_config_text  # noqa: E402
from pmfix.contraction import b_contraction_check, tsr_defect  # noqa: E402
from pmfix.ddf import Ddf, plateau  # noqa: E402
from pmfix.solver import (NotCertifiedError, SphereHypothesisError, picard, picard_in_sphere,  # noqa: E402
                          power_picard, verify_uniqueness)
from pmfix.space import (SphereSpec, build_space, check_axioms, check_joint_limit, is_t_closed,  # noqa: E402
                         sphere_members, ultrametric_plateau_space)

HALF = Fr(1, 2)
T_GRID = (Fr(1, 1000), Fr(1, 100), Fr(1, 10), HALF, 1, 2, 10)
RESULTS = {}


def report(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    RESULTS[name] = ok
    print(line, flush=True)
    return ok


def axiom_suite():
    rng = random.Random(20240601)
    clean = True
    detected = mutated = 0
    for _ in range(50):
        n = rng.randrange(3, 33)
        beta = random_ultrametric(n, rng)
        pts = list(range(n))
        for mode in ("tau_star", "tau_pointwise"):
            clean &= check_axioms(ultrametric_plateau_space(pts, beta, MIN, mode)).ok
        broken, _ = break_ultrametric(beta, rng)
        mutated += 1
        hit = True
        for mode in ("tau_star", "tau_pointwise"):
            rep = check_axioms(ultrametric_plateau_space(pts, broken, MIN, mode, validate=False))
            hit &= bool(rep.violations) and all(v.lhs < v.rhs for v in rep.violations)
        detected += hit
    rate = detected / mutated
    return clean and rate >= 0.95, f"clean spaces ok={clean}, mutations detected {detected}/{mutated}"


def sup_convolution_oracle():
    rng = random.Random(99)
    norms = [(MIN, t_min), (PRODUCT, t_prod), (LUKASIEWICZ, t_luk)]
    probes = mismatches = 0
    for _ in range(100):
        F = [(Fr(rng.randrange(0, 25), 8), Fr(rng.randrange(1, 11), 10)) for _ in range(rng.randrange(1, 4))]
        G = [(Fr(rng.randrange(0, 25), 8), Fr(rng.randrange(1, 11), 10)) for _ in range(rng.randrange(1, 4))]
        for T, oracle in norms:
            exact = tau_star(T, Ddf(F), Ddf(G))
            for t in probe_points(F, G):
                probes += 1
                if exact.eval(t) != grid_sup_conv(oracle, F, G, t):
                    mismatches += 1
    # spot-check the fast oracle against the direct split scan
    F, G = [(Fr(1, 2), Fr(3, 10)), (Fr(2), Fr(9, 10))], [(Fr(1, 4), Fr(1, 2))]
    for t in probe_points(F, G)[:10]:
        if grid_sup_conv(t_prod, F, G, t) != brute_sup_conv(t_prod, F, G, t):
            mismatches += 1
    return mismatches == 0, f"{probes} probes, {mismatches} mismatches"


def bound_chains():
    S = canonical_space()
    tr = picard(S, halving_map(), Fr(1), HALF, T_GRID)
    eq = all(tr.step_distance[n].eval(t) == 1 - Fr(1, 2 ** n) == tr.bound_value[n][t]
             for n in range(5) for t in T_GRID)
    it = tr.iterates
    F10 = S.distance(it[1], it[0])
    cauchy = all(S.distance(it[n + p], it[n]).eval(t) >= 1 - HALF ** n * (1 - F10.eval(t))
                 for n in range(6) for p in range(1, 6 - n) if n + p <= 5 for t in T_GRID)
    # Menger-mode chain on the same data
    M = canonical_space("tau_star")
    tm = picard(M, halving_map(), Fr(1), HALF, T_GRID, mode="thm33")
    ok = eq and cauchy and tr.certified and tm.certified and not tm.chain_violations
    return ok, f"equality chain={eq}, cauchy={cauchy}, thm33 certified={tm.certified}"


def fixed_point_uniqueness():
    S = canonical_space()
    ends = {picard(S, halving_map(), x0, HALF, T_GRID).fixed_point for x0 in CANONICAL_POINTS}
    uniq = verify_uniqueness(S, halving_map(), Fr(0), Fr(0), HALF).unique
    rng = random.Random(7)
    roots_ok = 0
    for _ in range(20):
        n = rng.randrange(3, 16)
        beta = random_ultrametric(n, rng)
        root = rng.randrange(n)
        f = random_root_contraction(beta, root, HALF, rng)
        R = ultrametric_plateau_space(list(range(n)), beta, MIN, "tau_pointwise")
        runs = [picard(R, f, x0, HALF, T_GRID) for x0 in range(n)]
        roots_ok += all(r.fixed_point == root and r.certified for r in runs)
    return ends == {0} and uniq and roots_ok == 20, f"endpoints={sorted(ends)}, random roots found {roots_ok}/20"


def sphere_runs():
    cfg = load_config("sphere_thm43.json")
    s = cfg.solve
    tr, rep = picard_in_sphere(cfg.space, cfg.map, s["x0"], s["k"], s["sphere"].r, s["sphere"].t, s["t_grid"])
    inside = set(tr.iterates) <= set(rep.members) and tr.fixed_point in rep.members
    gate_fails = False
    try:
        picard_in_sphere(cfg.space, cfg.map, Fr(1), s["k"], s["sphere"].r, s["sphere"].t, s["t_grid"])
    except SphereHypothesisError as e:
        gate_fails = e.witness is not None
    S = canonical_space("tau_pointwise")
    closed = all(is_t_closed(S, sphere_members(S, SphereSpec(c, r, t)), t)
                 for c in S.points for r in (Fr(1, 10), Fr(3, 10), Fr(7, 10)) for t in (HALF, 1, 2))
    ok = rep.holds and tr.certified and inside and gate_fails and closed
    return ok, f"iterates in sphere={inside}, x0=1 gate fails={gate_fails}, t-closed={closed}"


def strictness_counterexample():
    cfg = load_config("simple_counterexample.json")
    dom = cfg.check["domain"]
    grid = cfg.check["t_grid"]
    b = b_contraction_check(cfg.space, cfg.map, HALF, grid, domain=dom, tolerance=1e-12)
    tsr = tsr_defect(cfg.space, cfg.map, HALF, grid, domain=dom)
    at = tsr.per_t.get(Fr(1, 100))
    ok = b.holds and b.max_defect <= 1e-12 and at is not None and at >= 0.4 and not tsr.holds
    return ok, f"B defect={b.max_defect}, TSR defect at t=0.01: {at}"


def joint_limit():
    S = canonical_space()
    # x_n = 2^-n until the finite chain bottoms out at 0, where halving stays put
    xs = [Fr(1, 2 ** n) for n in range(5)] + [Fr(0)] * 7
    ys = [Fr(1, 4)] * 12
    rep = check_joint_limit(S, xs, ys, Fr(0), Fr(1, 4), 1, 0)
    ok = rep.limit_value == Fr(3, 4) and all(d == 0 for d in rep.differences[3:])
    return ok, f"max |diff| for n>=3: {max(rep.differences[3:])}"


def power_map():
    S = canonical_space()
    p2 = power_picard(S, halving_map(), 2, Fr(1), Fr(1, 4), T_GRID)
    p1 = picard(S, halving_map(), Fr(1), HALF, T_GRID)
    same = p2.fixed_point == p1.fixed_point == 0
    chain = p2.trace.certified and not p2.aux_chain_violations and p2.holds
    two = build_space(["a", "b"], {("a", "b"): plateau(HALF)}, TriangleMode("tau_pointwise", MIN))
    from pmfix.catalog import swap_map
    refused = False
    try:
        power_picard(two, swap_map("a", "b"), 2, "a", HALF)
    except NotCertifiedError:
        refused = True
    cfg = json.loads(read_config_text("power_thm45.json"))
    cfg["map"]["pairs"] = [["1", "1/2"], ["1/2", "1"]] + [[p, p] for p in ("1/4", "1/8", "1/16", "0")]
    tmp = Path(__file__).parent / "_acceptance_two_cycle.json"
    tmp.write_text(json.dumps(cfg))
    try:
        cli_exit = main(["solve", str(tmp)])
    finally:
        tmp.unlink()
    ok = same and chain and refused and cli_exit == 1
    return ok, f"m=2 fixed point={p2.fixed_point}, g-chain ok={chain}, 2-cycle refused={refused}, cli exit={cli_exit}"


def idempotent_gate():
    flags = (is_idempotent_dominant(MIN), is_idempotent_dominant(PRODUCT), is_idempotent_dominant(LUKASIEWICZ))
    wit = HALF in idempotence_witnesses(PRODUCT) and HALF in idempotence_witnesses(LUKASIEWICZ)
    refuse = True
    for T in (PRODUCT, LUKASIEWICZ):
        for mode, tri in (("thm41", "tau_pointwise"), ("thm33", "tau_star")):
            tr = picard(canonical_space(tri, T), halving_map(), Fr(1), HALF, T_GRID, mode=mode)
            refuse &= not tr.certified
    ok = flags == (True, False, False) and wit and refuse
    return ok, f"dominant(min, product, lukasiewicz)={flags}, witness 1/2={wit}, refused={refuse}"


CRITERIA = [
    ("axiom suite", axiom_suite),
    ("sup-convolution oracle", sup_convolution_oracle),
    ("bound chains", bound_chains),
    ("fixed point and uniqueness", fixed_point_uniqueness),
    ("sphere runs", sphere_runs),
    ("strictness counterexample", strictness_counterexample),
    ("joint limit", joint_limit),
    ("power map", power_map),
    ("idempotent-dominance gate", idempotent_gate),
]


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(name, fn, capsys):
    start = time.perf_counter()
    ok, detail = fn()
    with capsys.disabled():
        print()
        report(name, ok, f"{detail}; {time.perf_counter() - start:.1f}s")
    assert ok, detail


if __name__ == "__main__":
    t0 = time.perf_counter()
    for name, fn in CRITERIA:
        ok, detail = fn()
        report(name, ok, detail)
    print(f"{sum(RESULTS.values())}/{len(RESULTS)} criteria passed in {time.perf_counter() - t0:.1f}s")
    sys.exit(0 if all(RESULTS.values()) else 1)
