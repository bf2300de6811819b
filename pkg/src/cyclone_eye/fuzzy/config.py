"""JSON (de)serialisation of fuzzy systems.

The layout is described by ``data/fis.schema.json``; a minimal file::

    {
      "inputs": [{"name": "D", "range": [1, 100], "unit": "%",
                  "terms": [{"label": "Low", "shape": "trapezoidal", "points": [1, 1, 20, 50]}, ...]}],
      "output": {"name": "Eye", "range": [0, 1], "terms": [...]},
      "rules": [{"if": {"D": "Low"}, "then": {"Eye": "Absent"}}],
      "defuzzifier": "COA",
      "sample_count": 1001
    }
"""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from ..errors import ConfigurationError
from .inference import DEFAULT_SAMPLE_COUNT, FuzzySystem, Rule
from .membership import LinguisticVariable, MembershipFunction


@lru_cache(maxsize=None)
def schema() -> dict:
    return json.loads(resources.files("cyclone_eye.data").joinpath("fis.schema.json").read_text())


def validate(doc: dict) -> None:
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigurationError(f"invalid FIS definition at {where}: {exc.message}") from None


def _variable(doc: dict, require_coverage: bool = True) -> LinguisticVariable:
    terms = tuple(MembershipFunction(t["label"], t["shape"], tuple(t["points"])) for t in doc["terms"])
    return LinguisticVariable(
        name=doc["name"],
        universe=tuple(doc["range"]),
        terms=terms,
        unit=doc.get("unit", ""),
        description=doc.get("description", ""),
        require_coverage=require_coverage,
    )


def system_from_dict(doc: dict, check_schema: bool = True) -> FuzzySystem:
    if check_schema:
        validate(doc)
    rules = tuple(
        Rule(tuple(r["if"].items()), next(iter(r["then"].items())))
        for r in doc["rules"]
    )
    return FuzzySystem(
        inputs=tuple(_variable(v) for v in doc["inputs"]),
        output=_variable(doc["output"], require_coverage=False),
        rules=rules,
        defuzzifier=doc.get("defuzzifier", "COA"),
        sample_count=doc.get("sample_count", DEFAULT_SAMPLE_COUNT),
        clamp=doc.get("clamp", True),
        name=doc.get("name", ""),
    )


def _variable_dict(v: LinguisticVariable) -> dict:
    out = {"name": v.name, "description": v.description, "range": list(v.universe), "unit": v.unit}
    out["terms"] = [{"label": t.label, "shape": t.shape, "points": list(t.points)} for t in v.terms]
    return out


def system_to_dict(system: FuzzySystem) -> dict:
    doc = {}
    if system.name:
        doc["name"] = system.name
    doc["inputs"] = [_variable_dict(v) for v in system.inputs]
    doc["output"] = _variable_dict(system.output)
    doc["rules"] = [
        {"if": dict(r.antecedents), "then": dict([r.consequent])} for r in system.rules
    ]
    doc["defuzzifier"] = system.defuzzifier
    doc["sample_count"] = system.sample_count
    doc["clamp"] = system.clamp
    return doc


def dumps(system: FuzzySystem) -> str:
    return json.dumps(system_to_dict(system), indent=2) + "\n"


def load_system(path) -> FuzzySystem:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
    return system_from_dict(doc)


def save_system(system: FuzzySystem, path) -> None:
    Path(path).write_text(dumps(system))
