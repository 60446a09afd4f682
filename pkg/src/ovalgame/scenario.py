"""JSON scenario files.

Example::

    {
      "schema_version": 1,
      "name": "colinear",
      "dimension": 2,
      "pursuers": [{"position": [1, 0], "alpha": 2, "capture_radius": 0}],
      "evader": {"position": [0, 0]},
      "cost": {"kind": "point-distance", "anchor": [-10, 0]},
      "options": {"seed": 0}
    }

``cost.kind`` is one of ``point-distance``, ``weighted-min-distance``,
``fixed-affine`` or ``signed-distance`` (with a ``shape`` member).  A bare
shape (``disk``, ``box``, ``polygon``, ``union``) is also accepted and puts
the scenario in target-defense mode.  Validation errors name the offending
field, e.g. ``pursuers[1].alpha``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .costs import Affine, PointDistance, SignedDistanceCost, TerminalCost, WeightedMinDistance
from .errors import InvalidConfig, ScenarioError
from .geometry import PursuerParams
from .shapes import SHAPE_KINDS, Box, Disk, Polygon, TargetShape, Union
from .state import GameState

SCHEMA_VERSION = 1


@dataclass
class ScenarioOptions:
    seed: int = 0
    dt: float | None = None  # default 1e-3 * M(y0)
    t_max: float | None = None  # default: twice the capture-time bound
    angular_resolution: int = 720
    oracle_resolution: int = 256
    oracle_seeds: int = 5
    verify_states: int = 200
    verify_rollouts: int = 5
    angle_pairs: int = 1000
    random_hold: float | None = None  # heading switch interval of the random evader, default M/10
    sweep_bounds: list | None = None  # [[lo, hi], ...] per coordinate
    grid: list | None = None  # cells per coordinate


@dataclass
class Scenario:
    state: GameState
    cost: TerminalCost
    options: ScenarioOptions = field(default_factory=ScenarioOptions)
    name: str = ""

    @property
    def defense_mode(self) -> bool:
        return isinstance(self.cost, SignedDistanceCost)

    def to_dict(self) -> dict:
        cost = self.cost.to_dict()
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "dimension": self.state.n,
            "pursuers": [
                {"position": xp.tolist(), "alpha": p.alpha, "capture_radius": p.l}
                for xp, p in zip(self.state.pursuers, self.state.params)
            ],
            "evader": {"position": self.state.evader.tolist()},
            "cost": cost,
            "options": {k: v for k, v in asdict(self.options).items() if v is not None},
        }


def _require(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise ScenarioError(path, "expected an object")
    if key not in obj:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing required field")
    v = obj[key]
    if kind is not None and not isinstance(v, kind):
        raise ScenarioError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return v


def _number(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ScenarioError(path, f"expected a finite number, got {v!r}")
    return float(v)


def _vector(v, path, n=None) -> np.ndarray:
    if not isinstance(v, list):
        raise ScenarioError(path, "expected a list of numbers")
    out = np.array([_number(c, f"{path}[{j}]") for j, c in enumerate(v)])
    if n is not None and out.shape != (n,):
        raise ScenarioError(path, f"expected {n} coordinates, got {len(v)}")
    return out


def _matrix(v, path, n) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ScenarioError(path, "expected a nonempty list of points")
    return np.array([_vector(r, f"{path}[{j}]", n) for j, r in enumerate(v)])


def _wrap(path, fn, *args):
    try:
        return fn(*args)
    except InvalidConfig as exc:
        raise ScenarioError(path, str(exc)) from None


def parse_shape(d, path, n) -> TargetShape:
    kind = _require(d, "kind", path, str)
    if kind == "disk":
        return _wrap(path, Disk, _vector(_require(d, "center", path), f"{path}.center", n),
                     _number(_require(d, "radius", path), f"{path}.radius"))
    if kind == "box":
        return _wrap(path, Box, _vector(_require(d, "lower", path), f"{path}.lower", n),
                     _vector(_require(d, "upper", path), f"{path}.upper", n))
    if kind == "polygon":
        if n != 2:
            raise ScenarioError(f"{path}.kind", "polygons are planar only")
        return _wrap(path, Polygon, _matrix(_require(d, "vertices", path), f"{path}.vertices", 2))
    if kind == "union":
        members = _require(d, "members", path, list)
        if not members:
            raise ScenarioError(f"{path}.members", "union needs at least one member")
        return Union(tuple(parse_shape(mm, f"{path}.members[{j}]", n) for j, mm in enumerate(members)))
    raise ScenarioError(f"{path}.kind", f"unknown shape kind {kind!r}")


def parse_cost(d, n, path="cost") -> TerminalCost:
    kind = _require(d, "kind", path, str)
    if kind in SHAPE_KINDS:
        return SignedDistanceCost(parse_shape(d, path, n))
    if kind == "signed-distance":
        return SignedDistanceCost(parse_shape(_require(d, "shape", path), f"{path}.shape", n))
    if kind == "point-distance":
        return _wrap(path, PointDistance, _vector(_require(d, "anchor", path), f"{path}.anchor", n),
                     _number(d.get("weight", 1.0), f"{path}.weight"),
                     _number(d.get("offset", 0.0), f"{path}.offset"))
    if kind == "weighted-min-distance":
        A = _matrix(_require(d, "anchors", path), f"{path}.anchors", n)
        w = _vector(d["weights"], f"{path}.weights", len(A)) if "weights" in d else None
        b = _vector(d["offsets"], f"{path}.offsets", len(A)) if "offsets" in d else None
        return _wrap(path, WeightedMinDistance, A, w, b)
    if kind == "fixed-affine":
        return _wrap(path, Affine, _vector(_require(d, "coef", path), f"{path}.coef", n),
                     _number(d.get("offset", 0.0), f"{path}.offset"))
    raise ScenarioError(f"{path}.kind", f"unknown cost kind {kind!r}")


def _options(d) -> ScenarioOptions:
    if d is None:
        return ScenarioOptions()
    if not isinstance(d, dict):
        raise ScenarioError("options", "expected an object")
    known = {f.name: f for f in fields(ScenarioOptions)}
    out = {}
    for k, v in d.items():
        if k not in known:
            raise ScenarioError(f"options.{k}", "unknown option")
        out[k] = v
    for k in ("seed", "angular_resolution", "oracle_resolution", "oracle_seeds", "verify_states",
              "verify_rollouts", "angle_pairs"):
        if k in out and (isinstance(out[k], bool) or not isinstance(out[k], int) or out[k] < 0):
            raise ScenarioError(f"options.{k}", "expected a nonnegative integer")
    for k in ("dt", "t_max", "random_hold"):
        if out.get(k) is not None and _number(out[k], f"options.{k}") < 0:
            raise ScenarioError(f"options.{k}", "expected a nonnegative number")
    return ScenarioOptions(**out)


def parse_scenario(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("$", "scenario must be a JSON object")
    version = _require(doc, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise ScenarioError("schema_version", f"unsupported schema version {version!r}")
    n = _require(doc, "dimension", "")
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ScenarioError("dimension", "expected an integer >= 2")
    pursuers = _require(doc, "pursuers", "", list)
    if not pursuers:
        raise ScenarioError("pursuers", "at least one pursuer is required")
    positions, params = [], []
    for i, p in enumerate(pursuers):
        path = f"pursuers[{i}]"
        positions.append(_vector(_require(p, "position", path), f"{path}.position", n))
        alpha = _number(_require(p, "alpha", path), f"{path}.alpha")
        radius = _number(p.get("capture_radius", 0.0), f"{path}.capture_radius")
        try:
            params.append(PursuerParams(alpha, radius))
        except InvalidConfig as exc:
            field_name = "alpha" if "alpha" in str(exc) else "capture_radius"
            raise ScenarioError(f"{path}.{field_name}", str(exc)) from None
    evader = _vector(_require(_require(doc, "evader", "", dict), "position", "evader"), "evader.position", n)
    cost = parse_cost(_require(doc, "cost", "", dict), n)
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")
    return Scenario(GameState(np.array(positions), evader, tuple(params)), cost, _options(doc.get("options")), name)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError("$", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON: {exc}") from None
    sc = parse_scenario(doc)
    if not sc.name:
        sc.name = path.stem
    return sc


def bundled_dir() -> Path:
    return Path(__file__).parent / "scenarios"


def bundled_scenarios() -> dict[str, Scenario]:
    return {p.stem: load_scenario(p) for p in sorted(bundled_dir().glob("*.json"))}
