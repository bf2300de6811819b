"""The storm-eye rule base: four meteorological inputs, 16 rules, one output.

Inputs (short name, meaning, universe):

    D   moisture density            1-100 %
    W   wind speed                  20-130 kt
    PD  pressure drop at the center 1-80 hPa
    EP  estimated central pressure  900-1000 hPa

The output ``Eye`` lives on [0, 1] with terms Absent and Present. Membership
breakpoints come from JSON (``data/storm_fis.*.json``); only the rule base
and the expected term sets are fixed here.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, NoRuleFiredError, RangeError
from .fuzzy import FuzzySystem, Rule, system_from_dict

INPUT_NAMES = ("D", "W", "PD", "EP")
OUTPUT_NAME = "Eye"

TERM_SETS = {
    "D": ("Low", "High"),
    "W": ("Min", "Max", "Extreme"),
    "PD": ("Min", "Avg", "Max"),
    "EP": ("Avg", "Max"),
    "Eye": ("Absent", "Present"),
}

RANGES = {"D": (1.0, 100.0), "W": (20.0, 130.0), "PD": (1.0, 80.0), "EP": (900.0, 1000.0)}

# Rules 1, 2, 7 and 12 stop early, exactly as the decision tree does.
RULES = (
    ({"D": "Low"}, "Absent"),
    ({"D": "High", "W": "Min", "PD": "Min"}, "Absent"),
    ({"D": "High", "W": "Min", "PD": "Avg", "EP": "Avg"}, "Absent"),
    ({"D": "High", "W": "Min", "PD": "Avg", "EP": "Max"}, "Present"),
    ({"D": "High", "W": "Min", "PD": "Max", "EP": "Avg"}, "Present"),
    ({"D": "High", "W": "Min", "PD": "Max", "EP": "Max"}, "Absent"),
    ({"D": "High", "W": "Max", "PD": "Min"}, "Absent"),
    ({"D": "High", "W": "Max", "PD": "Avg", "EP": "Avg"}, "Present"),
    ({"D": "High", "W": "Max", "PD": "Avg", "EP": "Max"}, "Present"),
    ({"D": "High", "W": "Max", "PD": "Max", "EP": "Avg"}, "Present"),
    ({"D": "High", "W": "Max", "PD": "Max", "EP": "Max"}, "Absent"),
    ({"D": "High", "W": "Extreme", "PD": "Min"}, "Absent"),
    ({"D": "High", "W": "Extreme", "PD": "Avg", "EP": "Avg"}, "Present"),
    ({"D": "High", "W": "Extreme", "PD": "Avg", "EP": "Max"}, "Absent"),
    ({"D": "High", "W": "Extreme", "PD": "Max", "EP": "Avg"}, "Present"),
    ({"D": "High", "W": "Extreme", "PD": "Max", "EP": "Max"}, "Absent"),
)

DEFAULT_PRESENCE_THRESHOLD = 0.5

# Wind thresholds that disagree with each other; kept side by side on purpose.
GENESIS_WIND_MPS = 17.0
WIND_FLOOR_KT = 20.0
LIFE_PERIOD_KT = (20.0, 130.0)

# Observation hours as listed for the six-hourly cadence (stored verbatim).
OBSERVATION_HOURS_UTC = ("03", "09", "18", "24")

WORKED_EXAMPLE = {"D": 75.0, "W": 120.0, "PD": 37.5, "EP": 923.0}
WORKED_EXAMPLE_CRISP = 0.703


def canonical_rules() -> tuple[Rule, ...]:
    return tuple(Rule(tuple(a.items()), (OUTPUT_NAME, c)) for a, c in RULES)


def _data_path(name: str):
    return resources.files("cyclone_eye.data").joinpath(name)


def load_config(which="calibrated") -> dict:
    """Load a FIS definition document.

    ``which`` is ``"default"``, ``"calibrated"``, a path, or an already-parsed
    dict (returned as a deep copy).
    """
    if isinstance(which, Mapping):
        return copy.deepcopy(dict(which))
    if which in ("default", "calibrated"):
        return json.loads(_data_path(f"storm_fis.{which}.json").read_text())
    try:
        return json.loads(Path(which).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{which}: not valid JSON ({exc})") from None


def _term_set_problems(labels: Mapping[str, Sequence[str]]) -> list[str]:
    problems = []
    for name, expected in TERM_SETS.items():
        if name not in labels:
            problems.append(f"variable {name!r} missing")
            continue
        got = set(labels[name])
        for lab in sorted(set(expected) - got):
            problems.append(f"{name}: missing term {lab!r}")
        for lab in sorted(got - set(expected)):
            problems.append(f"{name}: unexpected term {lab!r}")
    extra = sorted(set(labels) - set(TERM_SETS))
    if extra:
        problems.append(f"unexpected variables {extra}")
    return problems


def _raise(problems: list[str]) -> None:
    if problems:
        raise ConfigurationError("storm FIS does not match the expected definition: " + "; ".join(problems))


def check_config_terms(doc: Mapping) -> None:
    """Term-set check on a raw config document, before any system is built."""
    try:
        labels = {v["name"]: [t["label"] for t in v["terms"]] for v in [*doc["inputs"], doc["output"]]}
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed storm FIS document ({exc!r})") from None
    _raise(_term_set_problems(labels))


def check_terms(system: FuzzySystem) -> None:
    problems = _term_set_problems({n: v.labels for n, v in system.variables.items()})
    if not problems and system.rules != canonical_rules():
        for k, (got, want) in enumerate(zip(system.rules, canonical_rules()), 1):
            if got != want:
                problems.append(f"rule {k} is {got}, expected {want}")
        if len(system.rules) != len(RULES):
            problems.append(f"expected {len(RULES)} rules, got {len(system.rules)}")
    _raise(problems)


@dataclass(frozen=True)
class CrispInputs:
    """Per-block crisp inputs, clamped to their universes on construction."""

    moisture_density: float
    wind_speed: float
    pressure_drop: float
    estimated_central_pressure: float

    def __post_init__(self):
        for fname, short in zip(
            ("moisture_density", "wind_speed", "pressure_drop", "estimated_central_pressure"), INPUT_NAMES
        ):
            v = float(getattr(self, fname))
            if not math.isfinite(v):
                raise RangeError(f"{short}: value {v} is not finite")
            lo, hi = RANGES[short]
            object.__setattr__(self, fname, min(max(v, lo), hi))

    @classmethod
    def strict(cls, D, W, PD, EP):
        """Like the constructor but out-of-range values raise instead of clamping."""
        for short, v in zip(INPUT_NAMES, (D, W, PD, EP)):
            lo, hi = RANGES[short]
            if not lo <= float(v) <= hi:
                raise RangeError(f"{short}: value {v} outside [{lo:g}, {hi:g}]")
        return cls(D, W, PD, EP)

    @classmethod
    def from_mapping(cls, m: Mapping[str, float]) -> "CrispInputs":
        missing = [k for k in INPUT_NAMES if k not in m]
        if missing:
            raise ConfigurationError(f"missing inputs {missing}")
        return cls(*(m[k] for k in INPUT_NAMES))

    def as_mapping(self) -> dict[str, float]:
        return dict(zip(INPUT_NAMES, self.as_tuple()))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.moisture_density, self.wind_speed, self.pressure_drop, self.estimated_central_pressure)


@dataclass(frozen=True)
class EyeVerdict:
    crisp: float
    present: bool
    fired_rules: tuple[tuple[int, float], ...]
    strengths: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "crisp": self.crisp,
            "present": self.present,
            "fired_rules": [{"rule": k, "strength": s} for k, s in self.fired_rules],
            "strengths": list(self.strengths),
        }


@dataclass(frozen=True)
class StormFIS:
    system: FuzzySystem
    presence_threshold: float = DEFAULT_PRESENCE_THRESHOLD

    def __post_init__(self):
        check_terms(self.system)
        lo, hi = self.system.output.universe
        if not lo <= self.presence_threshold <= hi:
            raise ConfigurationError(f"presence threshold {self.presence_threshold} outside output universe")

    def _verdict(self, crisp, strengths) -> EyeVerdict:
        strengths = tuple(float(s) for s in strengths)
        fired = tuple((k, s) for k, s in enumerate(strengths, 1) if s > 0.0)
        if not fired or not math.isfinite(crisp):
            return EyeVerdict(0.0, False, (), strengths)
        return EyeVerdict(float(crisp), bool(crisp >= self.presence_threshold), fired, strengths)

    def judge(self, inputs) -> EyeVerdict:
        if not isinstance(inputs, CrispInputs):
            inputs = CrispInputs.from_mapping(inputs)
        try:
            crisp, fset = self.system.infer(inputs.as_mapping(), "COA")
        except NoRuleFiredError:
            return EyeVerdict(0.0, False, (), (0.0,) * len(self.system.rules))
        return self._verdict(crisp, fset.strengths)

    def judge_many(self, values) -> list[EyeVerdict]:
        """Batch :meth:`judge` over an ``(N, 4)`` array ordered D, W, PD, EP."""
        crisp, strengths = self.system.infer_batch(np.asarray(values, dtype=np.float64))
        return [self._verdict(c, s) for c, s in zip(crisp, strengths)]


def build_storm_fis(config=None, presence_threshold: float = DEFAULT_PRESENCE_THRESHOLD,
                    sample_count: int | None = None) -> StormFIS:
    """Build the storm FIS; ``config`` defaults to the shipped calibrated definition."""
    doc = load_config("calibrated" if config is None else config)
    if sample_count is not None:
        doc["sample_count"] = int(sample_count)
    check_config_terms(doc)
    return StormFIS(system_from_dict(doc), presence_threshold)


def judge(inputs, fis: StormFIS | None = None) -> EyeVerdict:
    return (fis or build_storm_fis()).judge(inputs)


# --- calibration -----------------------------------------------------------

# (variable, term, breakpoint index, lower bound, upper bound). Order matters:
# it is the coordinate-descent sweep order when no seed is given.
CALIBRATION_PARAMETERS = (
    ("W", "Max", 1, 20.0, 130.0),
    ("W", "Max", 2, 20.0, 130.0),
    ("W", "Extreme", 0, 20.0, 130.0),
    ("W", "Extreme", 1, 20.0, 130.0),
    ("PD", "Avg", 0, 1.0, 80.0),
    ("PD", "Avg", 1, 1.0, 80.0),
    ("PD", "Avg", 2, 1.0, 80.0),
    ("PD", "Max", 0, 1.0, 80.0),
    ("PD", "Max", 1, 1.0, 80.0),
    ("EP", "Avg", 2, 900.0, 1000.0),
    ("EP", "Avg", 3, 900.0, 1000.0),
    ("EP", "Max", 0, 900.0, 1000.0),
    ("EP", "Max", 1, 900.0, 1000.0),
    ("Eye", "Absent", 2, 0.0, 0.5),
    ("Eye", "Absent", 3, 0.0, 0.5),
    ("Eye", "Present", 0, 0.5, 1.0),
    ("Eye", "Present", 1, 0.5, 1.0),
)

STOP_TOLERANCE = 5e-4
# Step multiples tried per coordinate; the long steps cross flat regions
# where the anchor fires no new rule.
STEP_LADDER = (1, 2, 4, 8)
ACCEPT_TOLERANCE = 0.05


@dataclass
class CalibrationResult:
    config: dict
    residual: float
    initial_residual: float
    crisp: float
    sweeps: int
    improvements: int
    converged: bool
    history: list = field(default_factory=list)

    def report(self) -> dict:
        return {
            "residual": self.residual,
            "initial_residual": self.initial_residual,
            "crisp": self.crisp,
            "sweeps": self.sweeps,
            "improvements": self.improvements,
            "converged": self.converged,
        }


def _term_points(doc: dict, var: str, term: str) -> list:
    for v in [*doc["inputs"], doc["output"]]:
        if v["name"] == var:
            for t in v["terms"]:
                if t["label"] == term:
                    return t["points"]
    raise ConfigurationError(f"calibration parameter {var}.{term} not in config")


def _anchor_crisp(doc: dict, inputs: Mapping[str, float]) -> float | None:
    """Crisp COA output for ``inputs``, or None if the document is not a valid system."""
    try:
        system = system_from_dict(doc, check_schema=False)
        crisp, _ = system.infer(inputs, "COA")
    except (ConfigurationError, NoRuleFiredError):
        return None
    return crisp


def calibrate(config="default", inputs: Mapping[str, float] = WORKED_EXAMPLE,
              target: float = WORKED_EXAMPLE_CRISP, max_sweeps: int = 200, seed: int | None = None,
              initial_step: float = 0.05, min_step: float = 1e-4,
              stop_tol: float = STOP_TOLERANCE, accept_tol: float = ACCEPT_TOLERANCE,
              parameters=CALIBRATION_PARAMETERS) -> CalibrationResult:
    """Coordinate descent on membership breakpoints minimising ``|crisp - target|``.

    Each parameter tries moves of ``m * step`` for ``m`` in :data:`STEP_LADDER`
    in both directions and keeps the best improving one; a sweep that
    improves nothing halves all steps. Moves that break the
    configuration (non-monotone breakpoints, coverage gaps) are rejected. With
    ``seed`` set, the sweep order is shuffled by a seeded generator, so runs
    stay reproducible.
    """
    doc = load_config(config)
    check_config_terms(doc)
    check_terms(system_from_dict(doc))
    crisp = _anchor_crisp(doc, inputs)
    if crisp is None:
        raise ConfigurationError("starting configuration cannot evaluate the anchor inputs")
    best = abs(crisp - target)
    initial = best
    rng = np.random.default_rng(seed) if seed is not None else None
    steps = [initial_step * (hi - lo) for *_, lo, hi in parameters]
    sweeps = improvements = 0
    history = [best]

    while best > stop_tol and sweeps < max_sweeps:
        sweeps += 1
        order = list(range(len(parameters)))
        if rng is not None:
            rng.shuffle(order)
        improved = False
        for k in order:
            var, term, idx, lo, hi = parameters[k]
            pts = _term_points(doc, var, term)
            old = pts[idx]
            best_move = None
            for mult in STEP_LADDER:
                for direction in (1.0, -1.0):
                    cand = round(min(max(old + direction * mult * steps[k], lo), hi), 10)
                    if cand == old:
                        continue
                    pts[idx] = cand
                    c = _anchor_crisp(doc, inputs)
                    if c is not None and abs(c - target) < (best_move or (best, None))[0]:
                        best_move = (abs(c - target), cand, c)
            if best_move is None:
                pts[idx] = old
            else:
                best, pts[idx], crisp = best_move
                improvements += 1
                improved = True
        history.append(best)
        if not improved:
            steps = [s / 2 for s in steps]
            if all(s < min_step * (hi - lo) for s, (*_, lo, hi) in zip(steps, parameters)):
                break

    return CalibrationResult(doc, best, initial, crisp, sweeps, improvements, best <= accept_tol, history)
