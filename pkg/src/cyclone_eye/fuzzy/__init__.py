"""Generic Mamdani fuzzy inference engine."""
from .config import dumps, load_system, save_system, system_from_dict, system_to_dict
from .inference import (
    DEFUZZIFIERS,
    AggregatedFuzzySet,
    FuzzySystem,
    Rule,
    clip,
    defuzzify,
    evaluate,
)
from .membership import LinguisticVariable, MembershipFunction, fuzzify

__all__ = [
    "AggregatedFuzzySet",
    "DEFUZZIFIERS",
    "FuzzySystem",
    "LinguisticVariable",
    "MembershipFunction",
    "Rule",
    "clip",
    "defuzzify",
    "dumps",
    "evaluate",
    "fuzzify",
    "load_system",
    "save_system",
    "system_from_dict",
    "system_to_dict",
]
