"""JSON (de)serialization of spaces, maps and run configurations."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

from ._numbers import format_number, parse_number, parse_point
from .algebra import TriangleMode, tnorm_by_name
from .catalog import random_ultrametric
from .contraction import CLASSES, DEFAULT_T_GRID, SelfMap
from .ddf import Ddf
from .space import PMSpace, SphereSpec, build_space, simple_space, ultrametric_plateau_space

BUNDLED = ("canonical_ultrametric.json", "simple_counterexample.json",
           "sphere_thm43.json", "power_thm45.json")
SOLVE_MODES = ("thm33", "thm41", "sphere", "power")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (CLI exit status 2)."""


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"{where}: missing key {key!r}")
    return obj[key]


def _num(value, where):
    try:
        return parse_number(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def _table(rows, where) -> List[List[Any]]:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{where}: expected a square array")
    return [[_num(v, where) for v in r] for r in rows]


def load_mode(data) -> TriangleMode:
    data = data or {}
    try:
        return TriangleMode(data.get("triangle", "tau_star"), tnorm_by_name(data.get("tnorm", "min")))
    except ValueError as e:
        raise ConfigError(f"mode: {e}") from None


def load_space(data: Dict[str, Any], seed: Optional[int] = None) -> PMSpace:
    """Build a space from its JSON form.

    Raises ConfigError on malformed input; semantic violations from the
    generators (UltrametricError, MetricError) propagate unchanged.
    """
    mode = load_mode(data.get("mode") if isinstance(data, dict) else None)
    if isinstance(data, dict) and "random_ultrametric_plateau" in data:
        gen = data["random_ultrametric_plateau"]
        n = int(_require(gen, "n", "random_ultrametric_plateau"))
        if n < 1:
            raise ConfigError("random_ultrametric_plateau.n must be >= 1")
        rng = random.Random(seed if seed is not None else gen.get("seed", 0))
        return ultrametric_plateau_space(list(range(n)), random_ultrametric(n, rng), mode.tnorm, mode.kind)
    points = [parse_point(p) for p in _require(data, "points", "space")]
    if "ultrametric_plateau" in data:
        gen = data["ultrametric_plateau"]
        beta = _table(_require(gen, "beta", "ultrametric_plateau"), "ultrametric_plateau.beta")
        return ultrametric_plateau_space(points, beta, mode.tnorm, mode.kind,
                                         validate=gen.get("validate", True))
    if "simple" in data:
        gen = data["simple"]
        metric = _table(_require(gen, "metric", "simple"), "simple.metric")
        shape = Ddf.from_json(_require(gen, "shape", "simple"))
        return simple_space(points, metric, shape, mode.tnorm, mode.kind)
    entries = _require(data, "distance", "space")
    table = {}
    for entry in entries:
        if not isinstance(entry, list) or len(entry) != 3:
            raise ConfigError(f"distance entry must be [i, j, ddf], got {entry!r}")
        i, j, ddf = entry
        try:
            table[(points[i], points[j])] = Ddf.from_json(ddf)
        except (IndexError, TypeError) as e:
            raise ConfigError(f"distance entry {entry!r}: {e}") from None
    return build_space(points, table, mode)


def dump_space(space: PMSpace) -> Dict[str, Any]:
    n = len(space)
    return {
        "points": [format_number(p) for p in space.points],
        "mode": space.mode.to_json(),
        "distance": [[i, j, space.matrix[i][j].to_json()] for i in range(n) for j in range(i + 1, n)],
    }


def load_map(data: Dict[str, Any]) -> SelfMap:
    if data.get("type", "table") != "table":
        raise ConfigError(f"map: unsupported type {data.get('type')!r}")
    pairs = _require(data, "pairs", "map")
    table = {}
    for pair in pairs:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"map pair must be [from, to], got {pair!r}")
        a, b = parse_point(pair[0]), parse_point(pair[1])
        if a in table and table[a] != b:
            raise ConfigError(f"map assigns two images to {pair[0]!r}")
        table[a] = b
    return SelfMap(table)


@dataclass
class RunConfig:
    space: PMSpace
    map: Optional[SelfMap] = None
    check: Dict[str, Any] = field(default_factory=dict)
    solve: Dict[str, Any] = field(default_factory=dict)
    output: Dict[str, Any] = field(default_factory=dict)


def _grid(values, where):
    if values is None:
        return DEFAULT_T_GRID
    grid = [_num(v, where) for v in values]
    if not grid or not all(t > 0 for t in grid):
        raise ConfigError(f"{where}: expected a non-empty list of positive numbers")
    return tuple(grid)


def parse_config(data: Dict[str, Any], seed: Optional[int] = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    space = load_space(_require(data, "space", "config"), seed)
    fmap = None
    if "map" in data:
        fmap = load_map(data["map"])
        try:
            fmap.validate(space)
        except ValueError as e:
            raise ConfigError(f"map: {e}") from None

    check = dict(data.get("check") or {})
    if check:
        klass = str(check.get("class", "TSR")).upper().replace("-", "_")
        if klass not in CLASSES:
            raise ConfigError(f"check.class must be one of {CLASSES}")
        check["class"] = klass
        k = check.get("k", "search")
        check["k"] = "search" if k == "search" else _num(k, "check.k")
        check["t_grid"] = _grid(check.get("t_grid"), "check.t_grid")
        check["m_max"] = int(check.get("m_max", 3))
        if check.get("domain") is not None:
            dom = [parse_point(p) for p in check["domain"]]
            if any(p not in space for p in dom):
                raise ConfigError("check.domain must list points of the space")
            check["domain"] = dom

    solve = dict(data.get("solve") or {})
    if solve:
        mode = _require(solve, "mode", "solve")
        if mode not in SOLVE_MODES:
            raise ConfigError(f"solve.mode must be one of {SOLVE_MODES}")
        solve["x0"] = parse_point(_require(solve, "x0", "solve"))
        if solve["x0"] not in space:
            raise ConfigError(f"solve.x0 {solve['x0']!r} is not a point of the space")
        solve["k"] = _num(_require(solve, "k", "solve"), "solve.k")
        solve["eps"] = _num(solve.get("eps", 0), "solve.eps")
        solve["max_iter"] = int(solve.get("max_iter", 1000))
        solve["t_grid"] = _grid(solve.get("t_grid"), "solve.t_grid")
        if mode == "sphere":
            sp = _require(solve, "sphere", "solve")
            center = parse_point(sp.get("center", solve["x0"]))
            try:
                solve["sphere"] = SphereSpec(center, _num(_require(sp, "r", "solve.sphere"), "solve.sphere.r"),
                                             _num(sp.get("t", 1), "solve.sphere.t"), True)
            except ValueError as e:
                raise ConfigError(f"solve.sphere: {e}") from None
            if center != solve["x0"]:
                raise ConfigError("solve.sphere.center must equal x0")
        if mode == "power":
            solve["m"] = int(_require(solve, "m", "solve"))
        if fmap is None:
            raise ConfigError("solve needs a map")
    if check and fmap is None:
        raise ConfigError("check needs a map")

    output = dict(data.get("output") or {})
    if output.get("format", "json") not in ("json", "csv"):
        raise ConfigError("output.format must be 'json' or 'csv'")
    return RunConfig(space, fmap, check, solve, output)


def read_config_text(path: str) -> str:
    """Read a config from disk, falling back to the bundled examples by file name."""
    p = Path(path)
    if p.exists():
        return p.read_text()
    if p.name in BUNDLED:
        return resources.files("pmfix").joinpath("configs", p.name).read_text()
    raise FileNotFoundError(path)


def load_config(path: str, seed: Optional[int] = None) -> RunConfig:
    try:
        data = json.loads(read_config_text(path))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return parse_config(data, seed)


def dumps(obj) -> str:
    """Deterministic JSON used for every report file."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
