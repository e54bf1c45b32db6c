"""JSON experiment configs: schema validation and object construction.

A config file describes one experiment: the model, the extrapolation
method with its parameters, the domain tree with boundary tags, and
either a resolution ladder (kind "convergence") or a single mesh plus
snapshot times (kind "run").  ``load`` parses and validates; the
``build_*`` helpers turn the validated dictionary into package objects.
"""

from __future__ import annotations

import json
import math

import jsonschema
import numpy as np

from . import geometry as geo
from . import models
from .extrapolation import METHODS, WeightParams


class ConfigError(ValueError):
    """Raised for anything wrong with an experiment config."""


_BC = {"enum": ["inflow", "outflow", "reflect"]}
_PAIR = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_STATE3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_STATE4 = {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}

_DOMAIN_REF = {"$ref": "#/$defs/domain"}

_DEFS = {
    "domain": {
        "oneOf": [
            {"$ref": "#/$defs/interval"},
            {"$ref": "#/$defs/box"},
            {"$ref": "#/$defs/disk"},
            {"$ref": "#/$defs/polygon"},
            {"$ref": "#/$defs/halfplane"},
            {"$ref": "#/$defs/union"},
            {"$ref": "#/$defs/intersection"},
            {"$ref": "#/$defs/complement"},
            {"$ref": "#/$defs/difference"},
        ]
    },
    "interval": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "xmin", "xmax"],
        "properties": {
            "type": {"const": "interval"},
            "xmin": {"type": "number"},
            "xmax": {"type": "number"},
            "bc_left": _BC,
            "bc_right": _BC,
        },
    },
    "box": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "xmin", "xmax", "ymin", "ymax"],
        "properties": {
            "type": {"const": "box"},
            "xmin": {"type": "number"},
            "xmax": {"type": "number"},
            "ymin": {"type": "number"},
            "ymax": {"type": "number"},
            "bc": {
                "oneOf": [
                    _BC,
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["left", "right", "bottom", "top"],
                        "properties": {
                            "left": _BC, "right": _BC, "bottom": _BC, "top": _BC,
                        },
                    },
                ]
            },
        },
    },
    "disk": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "center", "radius"],
        "properties": {
            "type": {"const": "disk"},
            "center": _PAIR,
            "radius": {"type": "number", "exclusiveMinimum": 0},
            "bc": _BC,
        },
    },
    "polygon": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "vertices"],
        "properties": {
            "type": {"const": "polygon"},
            "vertices": {"type": "array", "items": _PAIR, "minItems": 3},
            "bc": {"oneOf": [_BC, {"type": "array", "items": _BC, "minItems": 3}]},
        },
    },
    "halfplane": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "normal", "offset"],
        "properties": {
            "type": {"const": "halfplane"},
            "normal": _PAIR,
            "offset": {"type": "number"},
            "bc": _BC,
        },
    },
    "union": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "parts"],
        "properties": {
            "type": {"const": "union"},
            "parts": {"type": "array", "items": _DOMAIN_REF, "minItems": 2},
        },
    },
    "intersection": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "parts"],
        "properties": {
            "type": {"const": "intersection"},
            "parts": {"type": "array", "items": _DOMAIN_REF, "minItems": 2},
        },
    },
    "complement": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "part"],
        "properties": {"type": {"const": "complement"}, "part": _DOMAIN_REF},
    },
    "difference": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "outer", "minus"],
        "properties": {
            "type": {"const": "difference"},
            "outer": _DOMAIN_REF,
            "minus": _DOMAIN_REF,
        },
    },
    "model": {
        "oneOf": [
            {
                "type": "object",
                "additionalProperties": False,
                "required": ["name"],
                "properties": {
                    "name": {"enum": ["advection1d", "advection2d", "burgers1d"]},
                },
            },
            {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "pieces"],
                "properties": {
                    "name": {"const": "euler1d"},
                    "gamma": {"type": "number", "exclusiveMinimum": 1},
                    "pieces": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "array",
                            "items": {"type": "number"},
                            "minItems": 5,
                            "maxItems": 5,
                        },
                    },
                    "inflow": _STATE3,
                },
            },
            {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "initial"],
                "properties": {
                    "name": {"const": "euler2d"},
                    "gamma": {"type": "number", "exclusiveMinimum": 1},
                    "initial": {"$ref": "#/$defs/field2d"},
                    "inflow": {
                        "oneOf": [
                            {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["type", "state"],
                                "properties": {
                                    "type": {"const": "constant"},
                                    "state": _STATE4,
                                },
                            },
                            {"$ref": "#/$defs/movingshock"},
                        ]
                    },
                },
            },
        ]
    },
    "field2d": {
        "oneOf": [
            {
                "type": "object",
                "additionalProperties": False,
                "required": ["type", "state"],
                "properties": {"type": {"const": "uniform"}, "state": _STATE4},
            },
            {
                "type": "object",
                "additionalProperties": False,
                "required": ["type", "x", "left", "right"],
                "properties": {
                    "type": {"const": "x-jump"},
                    "x": {"type": "number"},
                    "left": _STATE4,
                    "right": _STATE4,
                },
            },
        ]
    },
    "movingshock": {
        "type": "object",
        "additionalProperties": False,
        "required": ["type", "x0", "speed", "behind", "ahead"],
        "properties": {
            "type": {"const": "moving-shock"},
            "x0": {"type": "number"},
            "speed": {"type": "number"},
            "behind": _STATE4,
            "ahead": _STATE4,
        },
    },
    "weights": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "r": {"type": "integer", "minimum": 1},
            "R": {"type": "integer", "minimum": 1},
            "r0": {"type": "integer", "minimum": 1},
            "s1": {"type": "integer", "minimum": 1},
            "s2": {"type": "integer", "minimum": 1},
            "d": {"type": "integer", "minimum": 1},
            "lam": {"type": "number"},
            "m": {"type": "integer", "minimum": 1},
            "eps": {"type": "number", "exclusiveMinimum": 0},
            "beta_mode": {"enum": ["none", "fixed-power", "total-variation"]},
            "beta_scale": {"type": "number"},
            "kappa": {"type": "number", "exclusiveMinimum": 0},
        },
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "id", "model", "method", "domain", "t_end"],
    "properties": {
        "kind": {"enum": ["convergence", "run"]},
        "id": {"type": "string", "pattern": r"^[A-Za-z0-9][A-Za-z0-9_\-]*$"},
        "model": {"$ref": "#/$defs/model"},
        "method": {"enum": list(METHODS)},
        "weights": {"$ref": "#/$defs/weights"},
        "domain": _DOMAIN_REF,
        "cover": {
            "type": "object",
            "additionalProperties": False,
            "required": ["x"],
            "properties": {"x": _PAIR, "y": _PAIR},
        },
        "resolutions": {
            "type": "array",
            "items": {"type": "integer", "minimum": 4},
            "minItems": 1,
        },
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 4},
                "h": {"type": "number", "exclusiveMinimum": 0},
            },
            "oneOf": [{"required": ["n"]}, {"required": ["h"]}],
        },
        "t_end": {"type": "number", "minimum": 0},
        "dt": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["cfl", "order-study"]},
                "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "reflect": {"enum": ["negate", "mirror"]},
        "snapshot_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "output": {"type": "string"},
    },
    "$defs": _DEFS,
}

_MODEL_DIM = {
    "advection1d": 1,
    "burgers1d": 1,
    "euler1d": 1,
    "advection2d": 2,
    "euler2d": 2,
}


def validate(cfg: dict) -> None:
    """Schema check plus the cross-field rules jsonschema cannot express."""
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {e.message}") from e
    dim = _MODEL_DIM[cfg["model"]["name"]]
    dom_is_interval = cfg["domain"]["type"] == "interval"
    if (dim == 1) != dom_is_interval:
        raise ConfigError(
            f"model {cfg['model']['name']!r} needs a "
            f"{'1D interval' if dim == 1 else '2D'} domain"
        )
    if cfg["kind"] == "convergence":
        if len(cfg.get("resolutions", [])) < 2:
            raise ConfigError("convergence configs need >= 2 resolutions")
        if "mesh" in cfg:
            raise ConfigError("convergence configs use 'resolutions', not 'mesh'")
    else:
        if "mesh" not in cfg:
            raise ConfigError("run configs need a 'mesh' block")
        if "resolutions" in cfg:
            raise ConfigError("run configs use 'mesh', not 'resolutions'")
    if dim == 2 and "cover" not in cfg:
        raise ConfigError("2D configs need a 'cover' block for the mesh extent")
    if "cover" in cfg:
        cov = cfg["cover"]
        if dim == 2 and "y" not in cov:
            raise ConfigError("2D cover needs a 'y' range")
        for key in ("x", "y"):
            if key in cov and not cov[key][1] > cov[key][0]:
                raise ConfigError(f"cover {key} range must be increasing")


def load(path) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    validate(cfg)
    return cfg


def _build_node(node: dict):
    t = node["type"]
    if t == "interval":
        return geo.Interval(
            node["xmin"], node["xmax"],
            bc_left=node.get("bc_left", "inflow"),
            bc_right=node.get("bc_right", "outflow"),
        )
    if t == "box":
        return geo.box(
            node["xmin"], node["xmax"], node["ymin"], node["ymax"],
            bc=node.get("bc", "outflow"),
        )
    if t == "disk":
        return geo.Disk(tuple(node["center"]), node["radius"], bc=node.get("bc", "reflect"))
    if t == "polygon":
        return geo.Polygon(
            tuple(map(tuple, node["vertices"])), bc=node.get("bc", "reflect")
        )
    if t == "halfplane":
        return geo.HalfPlane(tuple(node["normal"]), node["offset"], bc=node.get("bc", "outflow"))
    if t == "union":
        return geo.Union(tuple(_build_node(p) for p in node["parts"]))
    if t == "intersection":
        return geo.Intersection(tuple(_build_node(p) for p in node["parts"]))
    if t == "complement":
        return geo.Complement(_build_node(node["part"]))
    if t == "difference":
        return geo.Intersection(
            (_build_node(node["outer"]), geo.Complement(_build_node(node["minus"])))
        )
    raise ConfigError(f"unknown domain node type {t!r}")


def build_domain(spec: dict) -> geo.Domain:
    try:
        return geo.Domain(_build_node(spec))
    except geo.GeometryError as e:
        raise ConfigError(f"bad domain: {e}") from e


def build_model(spec: dict):
    name = spec["name"]
    if name == "advection1d":
        return models.Advection1D()
    if name == "advection2d":
        return models.Advection2D()
    if name == "burgers1d":
        return models.Burgers1D()
    if name == "euler1d":
        gamma = spec.get("gamma", 1.4)
        model = models.Euler1D(gamma=gamma, init_pieces=[tuple(p) for p in spec["pieces"]])
        if "inflow" in spec:
            rho, v, p = spec["inflow"]
            model.inflow_state = model.conserved(rho, v, p)
        return model
    if name == "euler2d":
        gamma = spec.get("gamma", 1.4)
        model = models.Euler2D(gamma=gamma, initial_fn=_initial_fn_2d(spec["initial"]))
        inflow = spec.get("inflow")
        if inflow is not None:
            if inflow["type"] == "constant":
                model.inflow_state = model.conserved(*inflow["state"])
            else:
                model.boundary_fn = _moving_shock_fn(inflow)
                model.boundary_is_field = True
        return model
    raise ConfigError(f"unknown model {name!r}")


def _initial_fn_2d(spec: dict):
    if spec["type"] == "uniform":
        state = spec["state"]

        def init(model, x, y):
            u = model.conserved(*state)
            return np.broadcast_to(u, np.asarray(x).shape + (4,)).copy()

        return init

    xj, left, right = spec["x"], spec["left"], spec["right"]

    def init(model, x, y):
        x = np.asarray(x, dtype=float)
        ul = model.conserved(*left)
        ur = model.conserved(*right)
        return np.where((x <= xj)[..., None], ul, ur)

    return init


def _moving_shock_fn(spec: dict):
    """Boundary data for a planar shock travelling in +x at a fixed speed."""
    x0, speed = spec["x0"], spec["speed"]
    behind, ahead = spec["behind"], spec["ahead"]

    def boundary(model, x, y, t):
        x = np.asarray(x, dtype=float)
        ub = model.conserved(*behind)
        ua = model.conserved(*ahead)
        g = np.where((x <= x0 + speed * t)[..., None], ub, ua)
        return g, np.zeros_like(g), np.zeros_like(g)

    return boundary


def build_weights(cfg: dict) -> WeightParams:
    return WeightParams(**cfg.get("weights", {}))


def mesh_extent(cfg: dict):
    """(xmin, xmax, ymin, ymax) the mesh must cover, from cover or interval."""
    if "cover" in cfg:
        cov = cfg["cover"]
        x0, x1 = cov["x"]
        y0, y1 = cov.get("y", (0.0, 0.0))
        return float(x0), float(x1), float(y0), float(y1)
    dom = cfg["domain"]
    return float(dom["xmin"]), float(dom["xmax"]), 0.0, 0.0


def build_mesh(cfg: dict, n: int | None = None, h: float | None = None) -> geo.Mesh:
    """Mesh for resolution n (cells across the x extent) or spacing h."""
    x0, x1, y0, y1 = mesh_extent(cfg)
    if h is None:
        if n is None:
            raise ConfigError("need a resolution or a spacing")
        h = (x1 - x0) / n
    return geo.Mesh.cover(x0, x1, y0, y1, h)
