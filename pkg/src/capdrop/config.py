"""Run configuration: JSON schema, loading with located errors, and builders
for containers and minimizer settings."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
from scipy import interpolate

from .container import Container
from .minimizer import MinimizeConfig

__all__ = ["ConfigError", "SCHEMA", "load_config", "validate_config", "config_hash", "build_container", "build_minimize_config"]

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_SIGMA = {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


def _kind(name: str, props: dict | None = None, required=()) -> dict:
    return _obj({"kind": {"const": name}, **(props or {})}, ("kind", *required))


SCHEMA: dict[str, Any] = _obj(
    {
        "container": {
            "oneOf": [
                _kind("disk", {"radius": _POS, "n_stations": {"type": "integer", "minimum": 256}}),
                _kind("ellipse", {"a": _POS, "b": _POS, "n_stations": {"type": "integer", "minimum": 256}}, ("a", "b")),
                _kind("stadium", {"flat": _POS, "radius": _POS, "n_stations": {"type": "integer", "minimum": 256}},
                      ("flat", "radius")),
                _kind("samples", {"points": {"type": "array", "items": _POINT, "minItems": 16},
                                  "n_stations": {"type": "integer", "minimum": 256}}, ("points",)),
            ]
        },
        "sigma": {
            "oneOf": [
                _kind("const", {"value": _SIGMA}, ("value",)),
                _kind("cosine", {"base": _SIGMA, "amplitude": _NUM, "phase": _NUM}, ("base", "amplitude")),
                _kind("table", {"values": {"type": "array", "items": _SIGMA, "minItems": 2}}, ("values",)),
            ]
        },
        "g": {
            "oneOf": [
                _kind("zero"),
                _kind("linear", {"coeffs": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}}, ("coeffs",)),
                _kind("grid", {"x": {"type": "array", "items": _NUM, "minItems": 2},
                               "y": {"type": "array", "items": _NUM, "minItems": 2},
                               "values": {"type": "array", "items": {"type": "array", "items": _NUM}}},
                      ("x", "y", "values")),
            ]
        },
        "volume": _POS,
        "masses": {"type": "array", "items": _POS, "minItems": 1},
        "rng_seed": {"type": "integer", "minimum": 0},
        "minimize": _obj(
            {
                "vertex_count": {"type": "integer", "minimum": 32},
                "grad_tol": _POS,
                "max_iters": {"type": "integer", "minimum": 1},
                "remesh_interval": {"type": "integer", "minimum": 1},
                "initial_step": _POS,
                "shrink": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "armijo": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "n_boundary_seeds": {"type": "integer", "minimum": 0},
                "interior_seed": {"type": "boolean"},
                "jitter": {"type": "number", "minimum": 0},
            }
        ),
        "outputs": _obj({k: {"type": "string"} for k in ("droplet", "result", "svg", "sweep")}),
    },
    ("container", "sigma"),
)


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is a dotted path into the JSON."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


def _path(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def _deepest(err: jsonschema.ValidationError) -> jsonschema.ValidationError:
    # for oneOf failures, report the branch whose "kind" matched
    if err.context:
        kinds = [e for e in err.context if e.validator != "const" and "kind" not in e.absolute_path]
        matched = {e.relative_schema_path[0] for e in err.context if e.validator == "const"}
        good = [e for e in kinds if e.relative_schema_path[0] not in matched]
        pool = good or kinds or list(err.context)
        return _deepest(max(pool, key=lambda e: len(e.absolute_path)))
    return err


def validate_config(cfg: Any) -> dict:
    """Schema validation plus cross-field checks; raises ConfigError."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = _deepest(errors[0])
        raise ConfigError(err.message, _path(err))
    sig = cfg["sigma"]
    if sig["kind"] == "cosine":
        lo, hi = sig["base"], sig["base"] + 2.0 * sig["amplitude"]
        if not (-1 < min(lo, hi) and max(lo, hi) < 1):
            raise ConfigError("base + amplitude * (1 - cos) must stay inside (-1, 1)", "sigma.amplitude")
    g = cfg.get("g")
    if g and g["kind"] == "grid":
        vals = np.asarray(g["values"], dtype=float)
        if vals.shape != (len(g["x"]), len(g["y"])):
            raise ConfigError(f"expected a {len(g['x'])}x{len(g['y'])} table, got {vals.shape}", "g.values")
    masses = cfg.get("masses")
    if masses and any(b >= a for a, b in zip(masses, masses[1:])):
        raise ConfigError("masses must be strictly decreasing", "masses")
    return cfg


def load_config(path: str | Path) -> dict:
    """Read and validate a JSON config.  Malformed JSON is reported with its
    line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return validate_config(cfg)


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _sigma_field(spec: dict, length: float):
    kind = spec["kind"]
    if kind == "const":
        return float(spec["value"])
    if kind == "cosine":
        base, amp, phase = spec["base"], spec["amplitude"], spec.get("phase", 0.0)
        return lambda s: base + amp * (1.0 - np.cos(2 * math.pi * s / length - phase))
    vals = np.asarray(spec["values"], dtype=float)
    # periodic table sampled uniformly in arc length
    knots = length * np.arange(len(vals) + 1) / len(vals)
    ext = np.append(vals, vals[0])
    return lambda s: np.interp(np.mod(s, length), knots, ext)


def _g_field(spec: dict | None):
    if spec is None or spec["kind"] == "zero":
        return None
    if spec["kind"] == "linear":
        c0, c1, c2 = (float(v) for v in spec["coeffs"])
        return lambda p: c0 + c1 * p[..., 0] + c2 * p[..., 1]
    interp = interpolate.RegularGridInterpolator(
        (np.asarray(spec["x"], float), np.asarray(spec["y"], float)), np.asarray(spec["values"], float),
        bounds_error=False, fill_value=None,
    )
    return lambda p: interp(np.asarray(p).reshape(-1, 2)).reshape(np.shape(p)[:-1])


def build_container(cfg: dict) -> Container:
    spec = cfg["container"]
    kw = {"n_stations": spec["n_stations"]} if "n_stations" in spec else {}
    kind = spec["kind"]
    # build the geometry first: the sigma field needs the perimeter
    if kind == "disk":
        geom = Container.disk(spec.get("radius", 1.0), **kw)
    elif kind == "ellipse":
        geom = Container.ellipse(spec["a"], spec["b"], **kw)
    elif kind == "stadium":
        geom = Container.stadium(spec["flat"], spec["radius"], **kw)
    else:
        geom = Container.from_samples(np.asarray(spec["points"], dtype=float), **kw)
    try:
        return Container(geom.curve, sigma=_sigma_field(cfg["sigma"], geom.length), g=_g_field(cfg.get("g")), **kw)
    except ValueError as exc:
        raise ConfigError(str(exc), "sigma") from None


def build_minimize_config(cfg: dict, volume: float | None = None) -> MinimizeConfig:
    opts = dict(cfg.get("minimize", {}))
    vol = volume if volume is not None else cfg.get("volume")
    if vol is None:
        masses = cfg.get("masses")
        if not masses:
            raise ConfigError("a volume (or masses list) is required", "volume")
        vol = masses[0]
    return MinimizeConfig(volume=float(vol), rng_seed=int(cfg.get("rng_seed", 0)), **opts)
