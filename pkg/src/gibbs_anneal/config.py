"""Run configuration: JSON parsing, schema validation, defaults, object builders."""

from __future__ import annotations

import copy
import hashlib
import json
import re
from dataclasses import dataclass

import jsonschema

from . import potential as pot
from .configuration import BoxRegion, Snapshot, lattice_collar

_num = {"type": "number"}
_vec = {"type": "array", "items": _num, "minItems": 1, "maxItems": 3}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMA = _obj({
    "seed": {"type": "integer", "minimum": 0},
    "potential": {
        "type": "object",
        "properties": {"family": {"enum": ["shoulder_well", "bump", "hard_rods", "ideal"]},
                       **{k: _num for k in ("J", "alpha", "a", "R", "m", "h", "w", "r1", "r2")}},
        "required": ["family"], "additionalProperties": False,
    },
    "box": _obj({"dimension": {"enum": [1, 2, 3]}, "lower": _vec, "upper": _vec, "length": _num},
                ["dimension"]),
    "boundary": _obj({"kind": {"enum": ["empty", "file", "lattice"]}, "path": {"type": "string"},
                      "lattice": {"enum": ["square", "triangular"]}, "spacing": _num,
                      "offset": _num}, ["kind"]),
    "gibbs": _obj({"beta": _num, "lambda": _num}),
    "schedule": _obj({"kind": {"enum": ["geometric", "linear", "explicit"]}, "beta_min": _num,
                      "beta_max": _num, "factor": _num, "count": {"type": "integer"},
                      "sweeps": {"type": "integer"},
                      "stages": {"type": "array", "items": {"type": "array", "items": _num,
                                                            "minItems": 2, "maxItems": 2}}},
                     ["kind"]),
    "moves": _obj({"insert": _num, "delete": _num, "move": _num, "sigma": {"type": ["number", "null"]}}),
    "sampling": _obj({"sweeps": {"type": "integer", "minimum": 1}, "thin": {"type": "integer", "minimum": 1},
                      "burn": {"type": "integer", "minimum": 0},
                      "checkpoints": {"type": "integer", "minimum": 0}}),
    "anneal": _obj({"chains": {"type": "integer", "minimum": 1}, "thin": {"type": "integer", "minimum": 1},
                    "burn_fraction": _num, "gap_samples": {"type": "integer", "minimum": 0},
                    "workers": {"type": "integer", "minimum": 1},
                    "gap_threshold": {"type": ["number", "null"]}}),
    "window": _obj({"lower": _vec, "upper": _vec, "half_width": _num,
                    "r": {"type": ["number", "null"]}, "h": {"type": ["number", "null"]},
                    "d_max": {"type": "integer", "minimum": 0}, "i_max": {"type": "integer", "minimum": 0},
                    "refine_top": {"type": ["integer", "null"]}, "tol": _num}),
    "check": _obj({"snapshot": {"type": "string"}}, ["snapshot"]),
    "observables": _obj({"snapshots": {"type": "string"}, "grid_pitch": _num,
                         "trim": {"type": ["number", "null"]},
                         "rho": {"type": ["array", "null"], "items": _num}}, ["snapshots"]),
    "counterexample": _obj({"beta": _num, "lambda": _num, "K": {"type": ["number", "null"]},
                            "grid": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                            "nested_grid": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                            "levels": {"type": "integer", "minimum": 1},
                            "sweeps": {"type": "integer", "minimum": 10},
                            "ablation": {"type": "boolean"}}),
}, ["potential"])

DEFAULTS = {
    "seed": 0,
    "boundary": {"kind": "empty"},
    "gibbs": {"beta": 1.0, "lambda": 0.0},
    "moves": {"insert": 0.25, "delete": 0.25, "move": 0.5, "sigma": None},
    "sampling": {"sweeps": 1000, "thin": 10, "burn": 0, "checkpoints": 4},
    "anneal": {"chains": 1, "thin": 10, "burn_fraction": 0.5, "gap_samples": 20, "workers": 1,
               "gap_threshold": None},
    "counterexample": {"beta": 1.0,
                       "lambda": 1.0, "K": None, "grid": [0, 10, 20, 40],
                       "nested_grid": [0, 10, 20, 40, 60, 80, 100, 120, 160], "levels": 2,
                       "sweeps": 3000, "ablation": True},
    "window": {"r": None, "h": None, "d_max": 1, "i_max": 1, "refine_top": 4, "tol": 1e-6},
    "observables": {"grid_pitch": 0.25, "trim": None, "rho": None},
}

SECTION_ORDER = ("seed", "potential", "box", "boundary", "gibbs", "schedule", "moves", "sampling",
                 "anneal", "window", "check", "observables", "counterexample")


class ConfigError(ValueError):
    pass


def _line_of(text: str, path) -> int | None:
    """Best-effort line number for the last key of a JSON path."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    pos = 0
    for k in keys:
        m = re.compile(r'"%s"\s*:' % re.escape(k)).search(text, pos)
        if m is None:
            return None
        pos = m.start()
    return text.count("\n", 0, pos) + 1


def _fail(text: str, path, msg: str):
    line = _line_of(text, path)
    where = ".".join(str(p) for p in path) or "<root>"
    prefix = f"line {line}: " if line else ""
    raise ConfigError(f"{prefix}{where}: {msg}")


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration; ``data`` holds every section with defaults filled in."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    def get(self, key, default=None):
        return self.data.get(key, default)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and emit(self) == emit(other)

    def __hash__(self):
        return hash(emit(self))

    @property
    def sha256(self) -> str:
        return hashlib.sha256(emit(self).encode()).hexdigest()


def emit(cfg: RunConfig) -> str:
    ordered = {k: cfg.data[k] for k in SECTION_ORDER if k in cfg.data}
    return json.dumps(ordered, indent=2, sort_keys=False) + "\n"


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}: invalid JSON: {e.msg}") from None
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as e:
        path = list(e.absolute_path)
        extra = re.search(r"\('([^']+)' was unexpected\)", e.message)
        if extra and e.validator == "additionalProperties":
            path.append(extra.group(1))
        _fail(text, path, e.message)

    data = copy.deepcopy(raw)
    for section, defaults in DEFAULTS.items():
        if section == "seed":
            data.setdefault("seed", defaults)
            continue
        if section in ("counterexample", "window", "observables") and section not in data:
            continue
        merged = dict(defaults)
        merged.update(data.get(section, {}))
        data[section] = merged

    try:
        p = pot.from_spec(data["potential"])
    except (TypeError, ValueError) as e:
        _fail(text, ["potential"], str(e))
    data["potential"] = p.to_spec()

    if "box" in data:
        b = data["box"]
        n = b["dimension"]
        if "length" in b:
            b.setdefault("lower", [0.0] * n)
            b.setdefault("upper", [b["lower"][i] + b["length"] for i in range(n)])
            del b["length"]
        if "lower" not in b or "upper" not in b:
            _fail(text, ["box"], "give either length or both lower and upper")
        b["lower"] = [float(v) for v in b["lower"]]
        b["upper"] = [float(v) for v in b["upper"]]
        try:
            build_box(data)
        except (OSError, ValueError) as e:
            _fail(text, ["boundary"], str(e))

    g = data["gibbs"]
    if g["beta"] < 0:
        _fail(text, ["gibbs", "beta"], "beta must be >= 0")
    mv = data["moves"]
    if abs(mv["insert"] + mv["delete"] + mv["move"] - 1.0) > 1e-12:
        _fail(text, ["moves"], "move weights must sum to 1")
    if mv["sigma"] is None and "box" in data:
        from .sampler import MoveWeights
        mv["sigma"] = MoveWeights.default(p, g["lambda"], data["box"]["dimension"]).sigma
    if "schedule" in data:
        try:
            build_schedule(data)
        except (KeyError, ValueError) as e:
            _fail(text, ["schedule"], f"invalid schedule: {e}")
    return RunConfig(data)


def build_potential(data: dict) -> pot.PairPotential:
    return pot.from_spec(data["potential"])


def build_box(data: dict) -> BoxRegion:
    b = data["box"]
    box = BoxRegion(b["dimension"], tuple(b["lower"]), tuple(b["upper"]))
    p = build_potential(data)
    bd = data.get("boundary", {"kind": "empty"})
    if bd["kind"] == "file":
        with open(bd["path"]) as fh:
            snap = Snapshot.from_json(json.load(fh))
        box = box.with_boundary(snap.boundary or snap.points)
    elif bd["kind"] == "lattice":
        box = box.with_boundary(lattice_collar(box, p, bd.get("spacing", 1.25),
                                               bd.get("lattice", "square"), bd.get("offset", 0.0)))
    box.validate(p)
    return box


def build_schedule(data: dict):
    from .annealing import Schedule
    s = data["schedule"]
    if s["kind"] == "geometric":
        return Schedule.geometric(s["beta_min"], s["beta_max"], s.get("factor", 2.0), s.get("sweeps", 1000))
    if s["kind"] == "linear":
        return Schedule.linear(s["beta_min"], s["beta_max"], s["count"], s.get("sweeps", 1000))
    return Schedule(tuple(tuple(st) for st in s["stages"]))
