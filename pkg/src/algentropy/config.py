"""Job configuration: JSON file -> validated JobConfig."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import jsonschema

from .group_ring import RingElement
from .groups import Group, GroupError, QuotientChain, parse_group

METHODS = ("dense", "exact", "cheb", "mahler")

_word = {"type": "array", "items": {
    "type": "array", "minItems": 2, "maxItems": 2,
    "prefixItems": [{"type": "string"}, {"type": "integer"}],
    "items": False,
}}
_modulus = {"oneOf": [{"type": "integer", "minimum": 1},
                      {"type": "array", "items": {"type": "integer", "minimum": 1},
                       "minItems": 1}]}
_element = {"type": "array", "items": {"type": "integer"}}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["group", "f"],
    "properties": {
        "group": {"$ref": "#/$defs/group"},
        "f": {"type": "array", "minItems": 1, "items": {
            "type": "array", "minItems": 2, "maxItems": 2,
            "prefixItems": [_word, {"type": ["integer", "number"]}], "items": False}},
        "chain": {"type": "array", "items": _modulus, "minItems": 1},
        "levels": {"type": "array", "items": _modulus, "minItems": 1},
        "methods": {"type": "array", "items": {"enum": list(METHODS)}, "uniqueItems": True},
        "tolerances": {"type": "object", "properties": {
            "cauchy_tol": {"type": "number", "minimum": 0},
            "target_residual": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "tail_target": {"type": "number", "exclusiveMinimum": 0},
            "max_radius": {"type": "integer", "minimum": 1},
            "power_iters": {"type": "integer", "minimum": 1},
            "cheb_target": {"type": "number", "exclusiveMinimum": 0},
        }, "additionalProperties": False},
        "cheb": {"type": "object", "properties": {
            "degree": {"type": "integer", "minimum": 1},
            "max_degree": {"type": "integer", "minimum": 1},
            "direct_radius": {"type": "integer", "minimum": 1},
        }, "additionalProperties": False},
        "mahler": {"type": "object", "properties": {
            "grid": {"type": "integer", "minimum": 4}}, "additionalProperties": False},
        "decay": {"type": "object", "properties": {
            "tail_target": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False},
        "spec": {"type": "object", "required": ["eps", "C1", "C2"], "properties": {
            "eps": {"type": "number", "exclusiveMinimum": 0},
            "C1": {"type": "array", "items": _element, "minItems": 1},
            "C2": {"type": "array", "items": _element, "minItems": 1},
            "x1": {"$ref": "#/$defs/point"},
            "x2": {"$ref": "#/$defs/point"},
            "window_radius": {"type": "integer", "minimum": 1},
        }, "additionalProperties": False},
        "output": {"type": "object", "properties": {
            "format": {"enum": ["json", "csv"]},
            "path": {"type": "string"}}, "additionalProperties": False},
    },
    "additionalProperties": False,
    "$defs": {
        "group": {"type": "object", "required": ["kind"], "properties": {
            "kind": {"enum": ["FreeAbelian", "Heisenberg3", "DirectProduct",
                              "FiniteCyclicProduct"]},
            "d": {"type": "integer", "minimum": 1},
            "moduli": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "factors": {"type": "array", "items": {"$ref": "#/$defs/group"}, "minItems": 1},
        }, "additionalProperties": False},
        "point": {"oneOf": [
            {"enum": ["homoclinic", "zero"]},
            {"type": "object", "required": ["homoclinic_shift"],
             "properties": {"homoclinic_shift": _element}, "additionalProperties": False},
        ]},
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None, line=None):
        where = ""
        if field:
            where += f"{field}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)
        self.field = field
        self.line = line


@dataclass
class JobConfig:
    group: Group
    f: RingElement
    chain: Optional[QuotientChain] = None
    levels: List = field(default_factory=list)
    methods: List[str] = field(default_factory=lambda: ["dense"])
    tolerances: dict = field(default_factory=dict)
    cheb: dict = field(default_factory=dict)
    mahler: dict = field(default_factory=dict)
    decay: dict = field(default_factory=dict)
    spec: Optional[dict] = None
    output_format: str = "json"
    output_path: Optional[str] = None
    raw: dict = field(default_factory=dict)


def _field_path(err: jsonschema.ValidationError) -> str:
    out = ""
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def parse_config(data: dict) -> JobConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, field=_field_path(err))
    try:
        group = parse_group(data["group"])
    except (GroupError, TypeError) as exc:
        raise ConfigError(str(exc), field="group") from None
    gens = group.generators()
    terms = []
    for i, (word, coeff) in enumerate(data["f"]):
        for j, (name, _) in enumerate(word):
            if name not in gens:
                raise ConfigError(
                    f"undeclared generator {name!r} (declared: {', '.join(sorted(gens))})",
                    field=f"f[{i}][0][{j}]")
        terms.append((word, coeff))
    f = RingElement.from_words(group, terms)
    if f.is_zero():
        raise ConfigError("f is zero", field="f")
    chain = None
    if "chain" in data:
        try:
            chain = QuotientChain(group, data["chain"])
        except GroupError as exc:
            raise ConfigError(str(exc), field="chain") from None
    out = data.get("output", {})
    return JobConfig(
        group=group, f=f, chain=chain, levels=data.get("levels", []),
        methods=data.get("methods", ["dense"]), tolerances=data.get("tolerances", {}),
        cheb=data.get("cheb", {}), mahler=data.get("mahler", {}),
        decay=data.get("decay", {}), spec=data.get("spec"),
        output_format=out.get("format", "json"), output_path=out.get("path"), raw=data)


def load_config(path) -> JobConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    return parse_config(data)
