"""Command-line front end.

    pmfix check-space CONFIG
    pmfix check-contraction CONFIG [--class B] [--k 1/2]
    pmfix solve CONFIG [--force]
    pmfix report CONFIG

Exit status: 0 success, 1 semantic failure (violation, non-convergence,
refused certification), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from ._numbers import format_number, parse_number
from .algebra import check_tnorm_axioms, idempotence_witnesses, is_idempotent_dominant
from .config import ConfigError, RunConfig, dump_space, dumps, load_config
from .contraction import NonMonotoneProfile, check_contraction, estimate_min_k
from .solver import (THM33, THM41, NotCertifiedError, SphereHypothesisError, picard,
                     picard_in_sphere, power_picard)
from .space import MetricError, SpaceError, UltrametricError, check_axioms

OK, FAIL, USAGE = 0, 1, 2


def _write(cfg: RunConfig, args, payload: dict, csv_text: Optional[str] = None) -> None:
    path = args.out or cfg.output.get("path")
    if not path:
        return
    fmt = cfg.output.get("format", "json")
    text = csv_text if (fmt == "csv" and csv_text is not None) else dumps(payload)
    Path(path).write_text(text)


def space_section(cfg: RunConfig) -> dict:
    axioms = check_axioms(cfg.space)
    T = cfg.space.mode.tnorm
    tn = check_tnorm_axioms(T)
    return {
        "space": dump_space(cfg.space),
        "triangle_axiom": {
            "ok": axioms.ok,
            "triples_checked": axioms.triples_checked,
            "violations": [
                {"triple": [format_number(p) for p in v.triple], "t": format_number(v.t),
                 "lhs": format_number(v.lhs), "rhs": format_number(v.rhs)}
                for v in axioms.violations
            ],
        },
        "tnorm_axioms": tn.to_json(),
        "idempotent_dominant": is_idempotent_dominant(T),
        "metadata": {k: v for k, v in cfg.space.metadata.items() if k in ("complete", "family")},
        "ok": axioms.ok and tn.ok,
    }


def contraction_section(cfg: RunConfig, klass=None, k=None) -> dict:
    check = cfg.check or {"class": "TSR", "k": "search", "t_grid": None, "m_max": 3}
    klass = (klass or check["class"]).upper().replace("-", "_")
    k = check["k"] if k is None else k
    grid = check.get("t_grid") or ()
    kw = {"t_grid": grid} if grid else {}
    if check.get("domain") is not None:
        kw["domain"] = check["domain"]
    if k == "search":
        try:
            found = estimate_min_k(cfg.space, cfg.map, klass, m_max=check.get("m_max", 3), **kw)
        except NonMonotoneProfile as e:
            return {"class": klass, "search": True, "k": None, "holds": False,
                    "non_monotone_profile": [[format_number(a), b] for a, b in e.profile]}
        return {"class": klass, "search": True, "k": format_number(found), "holds": found is not None}
    report = check_contraction(cfg.space, cfg.map, klass, k, m_max=check.get("m_max", 3), **kw)
    return report.to_json()


def solve_section(cfg: RunConfig, force: bool):
    """Returns (payload, csv_text, exit_status)."""
    s = cfg.solve
    mode = s["mode"]
    common = dict(eps=s["eps"], max_iter=s["max_iter"])
    try:
        if mode == "power":
            rep = power_picard(cfg.space, cfg.map, s["m"], s["x0"], s["k"], s["t_grid"], **common)
            trace, extra = rep.trace, {"power": {k: v for k, v in rep.to_json().items() if k != "trace"}}
            good = rep.holds
        elif mode == "sphere":
            sp = s["sphere"]
            trace, srep = picard_in_sphere(cfg.space, cfg.map, s["x0"], s["k"], sp.r, sp.t, s["t_grid"], **common)
            extra = {"sphere": srep.to_json()}
            good = srep.holds and trace.converged and trace.certified
        else:
            trace = picard(cfg.space, cfg.map, s["x0"], s["k"], s["t_grid"], mode=mode, **common)
            extra = {}
            good = trace.converged and trace.certified
    except SphereHypothesisError as e:
        payload = {"mode": mode, "error": "sphere hypothesis fails", "detail": str(e),
                   "witness_u": format_number(e.witness)}
        return payload, None, FAIL
    except NotCertifiedError as e:
        payload = {"mode": mode, "error": "refused: contraction not certified", "detail": str(e),
                   "report": e.report.to_json() if e.report else None}
        return payload, None, FAIL

    payload = {"mode": mode, "trace": trace.to_json(), **extra}
    if not trace.certified and not force:
        payload["error"] = "run not certified (use --force to accept an uncertified fixed point)"
        return payload, trace.to_csv(), FAIL
    if force and not trace.certified:
        good = trace.converged and trace.fixed_point_verified
    return payload, trace.to_csv(), OK if good else FAIL


def cmd_check_space(cfg, args) -> int:
    sec = space_section(cfg)
    _write(cfg, args, sec)
    tri = sec["triangle_axiom"]
    print(f"triangle axiom: {'ok' if tri['ok'] else 'VIOLATED'} ({tri['triples_checked']} triples)")
    for v in tri["violations"][:5]:
        print(f"  witness triple {v['triple']} at t={v['t']}: {v['lhs']} < {v['rhs']}")
    print(f"t-norm axioms: {'ok' if sec['tnorm_axioms']['ok'] else 'VIOLATED'}")
    return OK if sec["ok"] else FAIL


def cmd_check_contraction(cfg, args) -> int:
    if cfg.map is None:
        raise ConfigError("check-contraction needs a map")
    k = None
    if args.k is not None:
        k = "search" if args.k == "search" else parse_number(args.k)
    sec = contraction_section(cfg, args.klass, k)
    _write(cfg, args, sec)
    if "max_defect" in sec:
        print(f"{sec['class']} k={sec['k']}: {'holds' if sec['holds'] else 'FAILS'} "
              f"(max defect {sec['max_defect']}, witness {sec['witness']})")
    else:
        print(f"{sec['class']} minimal k: {sec['k']}")
    return OK if sec["holds"] else FAIL


def cmd_solve(cfg, args) -> int:
    if not cfg.solve:
        raise ConfigError("config has no solve section")
    payload, csv_text, status = solve_section(cfg, args.force)
    _write(cfg, args, payload, csv_text)
    if "trace" in payload:
        tr = payload["trace"]
        print(f"outcome: {tr['outcome']}; fixed point: {tr['fixed_point']}; "
              f"iterations: {tr['steps']}; certified: {str(tr['certified']).lower()}")
    if "error" in payload:
        print(f"error: {payload['error']}: {payload.get('detail', '')}".rstrip(": "))
        if "witness_u" in payload:
            print(f"hypothesis witness u = {payload['witness_u']}")
    return status


def cmd_report(cfg, args) -> int:
    out = {"space": space_section(cfg)}
    status = OK if out["space"]["ok"] else FAIL
    if cfg.map is not None and cfg.check:
        out["contraction"] = contraction_section(cfg)
        status = status or (OK if out["contraction"]["holds"] else FAIL)
    if cfg.solve:
        payload, _, st = solve_section(cfg, args.force)
        out["solve"] = payload
        status = status or st
    _write(cfg, args, out)
    print(dumps({k: (v.get("ok", v.get("holds")) if isinstance(v, dict) else v) for k, v in out.items()}), end="")
    return status


COMMANDS = {
    "check-space": cmd_check_space,
    "check-contraction": cmd_check_contraction,
    "solve": cmd_solve,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmfix", description="Fixed points in probabilistic metric spaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="config path, or the name of a bundled example")
        p.add_argument("--out", help="override output.path")
        p.add_argument("--force", action="store_true", help="accept uncertified runs")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized generators")
        if name == "check-contraction":
            p.add_argument("--class", dest="klass", help="override check.class")
            p.add_argument("--k", help="override check.k (number or 'search')")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    threads = os.environ.get("PMFIX_THREADS")
    if threads is not None and (not threads.isdigit() or int(threads) < 1):
        print("error: PMFIX_THREADS must be an integer >= 1", file=sys.stderr)
        return USAGE
    try:
        cfg = load_config(args.config, args.seed)
    except (UltrametricError, MetricError) as e:
        print(f"violation: {e}")
        return FAIL
    except (ConfigError, SpaceError, FileNotFoundError, ValueError, TypeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
