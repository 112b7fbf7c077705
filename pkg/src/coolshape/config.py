"""JSON run configuration: schema, defaults, overrides and problem setup."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import jsonschema

from .adjoint import ObjectiveParams
from .expr import as_vector
from .mesh import Mesh, generate_channel_array, load_msh, rectangle
from .optimize import OptimizerConfig
from .state import BoundaryData, Liftings, PhysicalParams, StateSolution, make_liftings, solve_state
from .transform import AdmissibleField, bump_translation, wall_bump


class ConfigError(ValueError):
    pass


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_EXPR = {"type": ["string", "number"]}
_VEC = {"type": "array", "items": _EXPR, "minItems": 2, "maxItems": 2}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj({
    "geometry": {"oneOf": [
        _obj({"type": {"const": "channel_array"}, "length": _POS, "height": _POS,
              "n_fins": {"type": "integer", "minimum": 0}, "fin_width": _POS, "fin_height": _POS,
              "h_target": _POS}, ["type"]),
        _obj({"type": {"const": "rectangle"}, "nx": {"type": "integer", "minimum": 1},
              "ny": {"type": "integer", "minimum": 1}, "length": _POS, "height": _POS,
              "subdomain_box": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}}, ["type"]),
        _obj({"type": {"const": "msh"}, "path": {"type": "string"},
              "subdomain_group": {"type": "integer"}}, ["type", "path"]),
    ]},
    "physics": _obj({"mu": _POS, "kappa": _POS, "rho": _POS, "cp": _POS, "alpha": _POS}),
    "boundary": _obj({"u_in": _VEC, "T_in": _EXPR, "T_wall": _EXPR}),
    "objective": _obj({
        "weights": {"oneOf": [{"const": "auto"},
                              {"type": "array", "items": {"type": "number", "minimum": 0},
                               "minItems": 3, "maxItems": 3}]},
        "Q_des": _NUM, "u_des": _VEC}),
    "optimizer": _obj({
        "max_iters": {"type": "integer", "minimum": 0}, "initial_step": _POS,
        "c1": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "backtrack": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "grad_tol": {"type": "number", "minimum": 0}, "min_angle": {"type": "number", "minimum": 0, "maximum": 60},
        "max_t": _POS, "max_backtracks": {"type": "integer", "minimum": 1},
        "field_space": {"enum": ["P1v", "P2v", "P1-vector-2D", "P2-vector-2D"]},
        "mu_e": _POS, "delta": _POS, "snapshot_every": {"type": "integer", "minimum": 0}}),
    "fields": {"type": "object", "additionalProperties": {"oneOf": [
        _obj({"type": {"const": "bump_translation"}, "center": _PAIR, "radius": _POS, "direction": _PAIR},
             ["type", "center", "radius", "direction"]),
        _obj({"type": {"const": "wall_bump"}, "x0": _NUM, "x1": _NUM, "y_wall": _NUM, "amplitude": _NUM,
              "depth": _POS}, ["type", "x0", "x1", "y_wall", "amplitude", "depth"]),
        _obj({"type": {"const": "expression"}, "components": _VEC,
              "support": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}},
             ["type", "components"]),
    ]}},
    "taylor": _obj({"field": {"type": "string"}, "objective": {"enum": ["perimeter", "volume", "full"]},
                    "t0": _POS, "n": {"type": "integer", "minimum": 2}}),
    "verify": _obj({"quick": {"type": "boolean"}, "include_config_problem": {"type": "boolean"}}),
    "output": _obj({"directory": {"type": "string"},
                    "formats": {"type": "array", "items": {"enum": ["vtk", "csv", "json", "msh"]}}}),
    "threads": {"type": "integer", "minimum": 1},
})

DEFAULTS: dict = {
    "geometry": {"type": "channel_array", "length": 2.0, "height": 1.0, "n_fins": 3, "fin_width": 0.1,
                 "fin_height": 0.6, "h_target": 0.0625},
    "physics": {"mu": 1.0, "kappa": 0.1, "rho": 1.0, "cp": 1.0, "alpha": 1.0},
    "boundary": {"u_in": ["4*y*(1-y)*bump(x/0.4)", "0"], "T_in": "0", "T_wall": "1"},
    "objective": {"weights": "auto", "Q_des": 1.2, "u_des": ["0.6", "0"]},
    "optimizer": {"max_iters": 10, "initial_step": 1.0, "c1": 1e-4, "backtrack": 0.5, "grad_tol": 1e-8,
                  "min_angle": 10.0, "max_t": 0.05, "max_backtracks": 30, "field_space": "P1v",
                  "mu_e": 1.0, "delta": 0.1, "snapshot_every": 1},
    "fields": {"center_bump": {"type": "bump_translation", "center": [1.0, 0.5], "radius": 0.35,
                               "direction": [0.3, 1.0]}},
    "taylor": {"field": "center_bump", "objective": "full", "t0": 1e-2, "n": 6},
    "verify": {"quick": False, "include_config_problem": True},
    "output": {"directory": "coolshape_out", "formats": ["vtk", "csv", "json"]},
    "threads": 1,
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(raw: dict, assignment: str) -> dict:
    """Apply ``a.b.c=value`` (value parsed as JSON when possible, else a string)."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, value = assignment.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"empty key in override {assignment!r}")
    out = copy.deepcopy(raw)
    node = out
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = _parse_value(value)
    return out


@dataclass
class RunConfig:
    raw: dict
    source: Optional[Path] = None

    @classmethod
    def from_dict(cls, data: dict, overrides=(), source=None) -> "RunConfig":
        """Defaults, then ``data``, then the ``key=value`` overrides, then schema validation.

        A geometry block of a different ``type`` replaces the default one
        instead of being merged into it.
        """
        if not isinstance(data, dict):
            raise ConfigError("the configuration must be a JSON object")
        merged = _merge(DEFAULTS, {k: v for k, v in data.items() if k != "geometry"})
        geo = data.get("geometry")
        if isinstance(geo, dict):
            same = geo.get("type", DEFAULTS["geometry"]["type"]) == DEFAULTS["geometry"]["type"]
            merged["geometry"] = {**DEFAULTS["geometry"], **geo} if same else copy.deepcopy(geo)
        elif geo is not None:
            merged["geometry"] = geo
        for a in overrides:
            merged = apply_override(merged, a)
        try:
            jsonschema.validate(merged, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid configuration at {where}: {exc.message}") from None
        return cls(merged, source)

    def __getitem__(self, key):
        return self.raw[key]

    def optimizer_config(self) -> OptimizerConfig:
        opt = {k: v for k, v in self.raw["optimizer"].items() if k != "snapshot_every"}
        return OptimizerConfig(**opt)

    @property
    def output_dir(self) -> Path:
        return Path(self.raw["output"]["directory"])

    def build(self) -> "Setup":
        try:
            mesh = build_mesh(self.raw["geometry"], self.source)
            params = PhysicalParams(**self.raw["physics"])
            b = self.raw["boundary"]
            data = BoundaryData.from_strings(b["u_in"], b["T_in"], b["T_wall"])
        except ConfigError:
            raise
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from exc
        return Setup(self, mesh, params, data)

    def field(self, name: str) -> AdmissibleField:
        fields = self.raw.get("fields", {})
        if name not in fields:
            raise ConfigError(f"unknown field {name!r}; defined: {sorted(fields)}")
        return build_field(fields[name], name)


def build_mesh(geo: dict, source: Optional[Path] = None) -> Mesh:
    kind = geo["type"]
    if kind == "channel_array":
        return generate_channel_array(geo["length"], geo["height"], geo["n_fins"], geo.get("fin_width"),
                                      geo.get("fin_height"), geo["h_target"])
    if kind == "rectangle":
        return rectangle(geo.get("nx", 8), geo.get("ny", 8), geo.get("length", 1.0), geo.get("height", 1.0),
                         subdomain_box=geo.get("subdomain_box"))
    path = Path(geo["path"])
    if not path.is_absolute() and source is not None and not path.exists():
        path = Path(source).parent / path
    return load_msh(path, geo.get("subdomain_group", 4))


def build_field(spec: dict, name: str = "") -> AdmissibleField:
    kind = spec["type"]
    if kind == "bump_translation":
        V = bump_translation(spec["center"], spec["radius"], spec["direction"])
    elif kind == "wall_bump":
        V = wall_bump(spec["x0"], spec["x1"], spec["y_wall"], spec["amplitude"], spec["depth"])
    else:
        V = AdmissibleField.from_expression([str(c) for c in spec["components"]], spec.get("support"))
    V.name = name or V.name
    return V


@dataclass
class Setup:
    config: RunConfig
    mesh: Mesh
    params: PhysicalParams
    data: BoundaryData
    _lifts: Optional[Liftings] = field(default=None, repr=False)
    _state: Optional[StateSolution] = field(default=None, repr=False)
    _objective: Optional[ObjectiveParams] = field(default=None, repr=False)

    @property
    def lifts(self) -> Liftings:
        if self._lifts is None:
            self._lifts = make_liftings(self.mesh, self.data)
        return self._lifts

    def state(self) -> StateSolution:
        if self._state is None:
            self._state = solve_state(self.mesh, self.params, self.data, lifts=self.lifts)
        return self._state

    def objective(self) -> ObjectiveParams:
        """Objective parameters; ``"auto"`` weights come from the initial state."""
        if self._objective is None:
            o = self.config["objective"]
            u_des = as_vector([str(c) for c in o["u_des"]])
            if o["weights"] == "auto":
                from .objective import normalization_weights

                w = normalization_weights(self.mesh, self.state(), o["Q_des"], u_des)
            else:
                w = tuple(o["weights"])
            self._objective = ObjectiveParams(*w, o["Q_des"], u_des)
        return self._objective


def load_config(path=None, overrides=()) -> RunConfig:
    """Read a JSON config (defaults when ``path`` is None) and apply overrides."""
    if path is None:
        return RunConfig.from_dict({}, overrides)
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data, overrides, p)
