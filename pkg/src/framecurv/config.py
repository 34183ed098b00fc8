"""Run configuration: a JSON document validated against ``CONFIG_SCHEMA``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .collapse import SplitSpec
from .expr import ParseError
from .geometry import ChartManifold, DerivativeEngine
from . import zoo


class ConfigError(ValueError):
    """The configuration is malformed or inconsistent."""


_NUMBER = {"type": "number"}
_INTERVAL = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["manifold"],
    "properties": {
        "manifold": {
            "oneOf": [
                {"type": "string", "minLength": 1},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["dim", "coord_names", "frame", "sample_box"],
                    "properties": {
                        "name": {"type": "string"},
                        "dim": {"type": "integer", "minimum": 1, "maximum": 8},
                        "coord_names": {"type": "array", "items": {"type": "string"}},
                        "frame": {"type": "array",
                                  "items": {"type": "array", "items": {"type": "string"}}},
                        "sample_box": {"type": "array", "items": _INTERVAL},
                        "frame_labels": {"type": "array", "items": {"type": "string"}},
                    },
                },
            ]
        },
        "split": {
            "type": "object",
            "additionalProperties": False,
            "required": ["r"],
            "properties": {"r": {"type": "integer", "minimum": 1}},
        },
        "f_values": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                     "minItems": 1},
        "f_range": {
            "type": "object",
            "additionalProperties": False,
            "required": ["min", "max", "steps"],
            "properties": {
                "min": {"type": "number", "exclusiveMinimum": 0},
                "max": {"type": "number", "exclusiveMinimum": 0},
                "steps": {"type": "integer", "minimum": 1},
            },
        },
        "samples": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1, "maximum": 100000},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "engine": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["ad", "fd"]},
                "fd_step": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.01},
                "nested_step": {"type": "number", "exclusiveMinimum": 0,
                                "exclusiveMaximum": 0.01},
            },
        },
        "K_H": {"type": "number", "exclusiveMaximum": 0},
        "expected": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _NUMBER for k in
                           ("scalar_curvature", "q4", "q2", "q0", "qm2", "npb_indicator")},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": "string"},
            },
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    manifold: ChartManifold
    manifold_id: str
    split: SplitSpec | None
    f_values: tuple[float, ...] = ()
    count: int = 16
    seed: int = 0
    engine: DerivativeEngine = field(default_factory=DerivativeEngine)
    expected: dict[str, float] = field(default_factory=dict)
    output_format: str | None = None
    output_path: str | None = None

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def f_grid(f_min: float, f_max: float, steps: int) -> tuple[float, ...]:
    """``steps`` values from ``f_min`` to ``f_max`` inclusive, geometrically spaced."""
    if not (f_min > 0 and f_max > 0):
        raise ConfigError("f range must be positive")
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    if f_max < f_min:
        raise ConfigError("f_range.max must not be below f_range.min")
    if steps == 1:
        return (float(f_min),)
    return tuple(float(v) for v in np.geomspace(f_min, f_max, steps))


def _custom_manifold(spec: dict) -> ChartManifold:
    n = spec["dim"]
    for key in ("coord_names", "frame", "sample_box"):
        if len(spec[key]) != n:
            raise ConfigError(f"manifold.{key} must have {n} entries")
    try:
        return ChartManifold.from_strings(spec.get("name", "custom"), spec["coord_names"],
                                          spec["frame"], spec["sample_box"],
                                          spec.get("frame_labels", ()))
    except (ValueError, ParseError) as err:
        raise ConfigError(f"manifold: {err}") from err


def from_dict(doc: dict) -> RunConfig:
    """Validate ``doc`` and build a :class:`RunConfig`."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}") from None
    spec = doc["manifold"]
    entry = None
    if isinstance(spec, str):
        try:
            entry = zoo.get(spec, doc.get("K_H"))
        except (KeyError, ValueError) as err:
            raise ConfigError(str(err)) from None
        manifold, manifold_id = entry.manifold, entry.id
    else:
        manifold, manifold_id = _custom_manifold(spec), spec.get("name", "custom")
    n = manifold.dim
    if "split" in doc:
        r = doc["split"]["r"]
        if not r < n:
            raise ConfigError(f"split.r must be below the dimension {n}, got {r}")
        split = SplitSpec.for_dim(n, r)
    else:
        split = entry.default_split if entry is not None else None
    if "f_values" in doc and "f_range" in doc:
        raise ConfigError("give either f_values or f_range, not both")
    if "f_range" in doc:
        fr = doc["f_range"]
        f_values = f_grid(fr["min"], fr["max"], fr["steps"])
    else:
        f_values = tuple(float(v) for v in doc.get("f_values", ()))
    eng = doc.get("engine", {})
    try:
        engine = DerivativeEngine(eng.get("mode", "ad"), eng.get("fd_step", 1e-5),
                                  eng.get("nested_step", 1e-4))
    except ValueError as err:
        raise ConfigError(f"engine: {err}") from None
    expected = dict(doc.get("expected", {}))
    if entry is not None and not expected:
        sc = entry.expected.get("scalar_curvature")
        if sc is not None:
            expected["scalar_curvature"] = sc.value
    samples = doc.get("samples", {})
    out = doc.get("output", {})
    return RunConfig(manifold, manifold_id, split, f_values,
                     samples.get("count", 16), samples.get("seed", 0), engine,
                     expected, out.get("format"), out.get("path"))


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from None
    return from_dict(doc)
