"""Mamdani inference: min-AND, min implication, max aggregation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .. import _kernels
from ..errors import ConfigurationError, NoRuleFiredError, RangeError
from .membership import LinguisticVariable, fuzzify

DEFUZZIFIERS = ("COA", "SOM", "LOM", "MOM")
DEFAULT_SAMPLE_COUNT = 1001
MAX_TIE_TOL = 1e-9


@dataclass(frozen=True)
class Rule:
    """``IF a1 AND a2 ... THEN consequent``; antecedents are (variable, term) pairs."""

    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]

    def __post_init__(self):
        ants = tuple((str(v), str(t)) for v, t in self.antecedents)
        object.__setattr__(self, "antecedents", ants)
        object.__setattr__(self, "consequent", (str(self.consequent[0]), str(self.consequent[1])))
        if not ants:
            raise ConfigurationError("rule has no antecedents")
        names = [v for v, _ in ants]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"rule repeats a variable in its antecedents: {names}")

    def __str__(self):
        cond = " and ".join(f"({v} is {t})" for v, t in self.antecedents)
        return f"If {cond} then ({self.consequent[0]} is {self.consequent[1]})"


@dataclass(frozen=True)
class AggregatedFuzzySet:
    """Output fuzzy set sampled uniformly over the output universe.

    ``strengths`` is the per-rule firing trace, in rule-base order.
    """

    universe: tuple[float, float]
    samples: np.ndarray
    strengths: tuple[float, ...] = ()

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size < 2:
            raise ConfigurationError("an aggregated set needs at least 2 samples")
        if np.any(s < 0.0) or np.any(s > 1.0):
            raise RangeError("membership samples must lie in [0, 1]")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def sample_count(self) -> int:
        return int(self.samples.size)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.universe[0], self.universe[1], self.sample_count)

    @property
    def height(self) -> float:
        return float(self.samples.max())


def defuzzify(fset: AggregatedFuzzySet, method: str = "COA") -> float:
    """Crisp value of ``fset``.

    COA is the weighted mean of the sample positions, with the two end
    samples at half weight (trapezoid rule) so that sets saturated at a
    universe edge converge at second order in the sample spacing. SOM, LOM
    and MOM take the smallest, largest and mean position whose sample is
    within ``MAX_TIE_TOL`` of the maximum.
    """
    method = method.upper()
    if method not in DEFUZZIFIERS:
        raise ConfigurationError(f"unknown defuzzifier {method!r}, expected one of {DEFUZZIFIERS}")
    mu = fset.samples
    peak = float(mu.max())
    if peak <= 0.0:
        raise NoRuleFiredError("aggregated output set is empty: no rule fired")
    xs = fset.xs
    if method == "COA":
        value = _kernels.coa(xs, mu)
    else:
        at_max = xs[mu >= peak - MAX_TIE_TOL]
        if method == "SOM":
            value = at_max[0]
        elif method == "LOM":
            value = at_max[-1]
        else:
            value = at_max.mean()
    lo, hi = fset.universe
    return float(min(max(value, lo), hi))


@dataclass(frozen=True)
class FuzzySystem:
    """An immutable Mamdani rule base over named input variables and one output."""

    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    rules: tuple[Rule, ...]
    defuzzifier: str = "COA"
    sample_count: int = DEFAULT_SAMPLE_COUNT
    clamp: bool = True
    name: str = ""
    _vars: dict = field(init=False, repr=False, compare=False)
    _xs: np.ndarray = field(init=False, repr=False, compare=False)
    _term_samples: np.ndarray = field(init=False, repr=False, compare=False)
    _rule_term: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "defuzzifier", self.defuzzifier.upper())
        if self.defuzzifier not in DEFUZZIFIERS:
            raise ConfigurationError(f"unknown defuzzifier {self.defuzzifier!r}")
        if int(self.sample_count) < 2:
            raise ConfigurationError("sample_count must be at least 2")
        object.__setattr__(self, "sample_count", int(self.sample_count))
        if not self.rules:
            raise ConfigurationError("rule base is empty")
        names = [v.name for v in self.inputs] + [self.output.name]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate variable names: {names}")
        variables = {v.name: v for v in self.inputs}
        for k, rule in enumerate(self.rules, 1):
            for vname, label in rule.antecedents:
                if vname not in variables:
                    raise ConfigurationError(f"rule {k}: unknown input variable {vname!r}")
                variables[vname].term(label)
            if rule.consequent[0] != self.output.name:
                raise ConfigurationError(f"rule {k}: consequent must use output {self.output.name!r}")
            self.output.term(rule.consequent[1])
        object.__setattr__(self, "_vars", variables)

        xs = np.linspace(*self.output.universe, self.sample_count)
        terms = np.ascontiguousarray([t.degrees(xs) for t in self.output.terms])
        labels = self.output.labels
        rule_term = np.array([labels.index(r.consequent[1]) for r in self.rules])
        for arr in (xs, terms, rule_term):
            arr.setflags(write=False)
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_term_samples", terms)
        object.__setattr__(self, "_rule_term", rule_term)

    @property
    def variables(self) -> dict[str, LinguisticVariable]:
        return {**self._vars, self.output.name: self.output}

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    def variable(self, name: str) -> LinguisticVariable:
        try:
            return self.variables[name]
        except KeyError:
            raise ConfigurationError(f"no variable named {name!r}") from None

    def fuzzify(self, name: str, x: float) -> dict[str, float]:
        return fuzzify(self.variable(name), x, clamp=self.clamp)

    def _needed(self) -> list[str]:
        used = {v for r in self.rules for v, _ in r.antecedents}
        return [n for n in self.input_names if n in used]

    def rule_strengths(self, crisp: Mapping[str, float]) -> tuple[float, ...]:
        missing = [n for n in self._needed() if n not in crisp]
        if missing:
            raise ConfigurationError(f"missing crisp inputs: {missing}")
        degrees = {n: self.fuzzify(n, crisp[n]) for n in self._needed()}
        return tuple(min(degrees[v][t] for v, t in r.antecedents) for r in self.rules)

    def _term_strengths(self, strengths) -> np.ndarray:
        out = np.zeros(len(self.output.terms), dtype=np.float64)
        np.maximum.at(out, self._rule_term, np.asarray(strengths, dtype=np.float64))
        return out

    def evaluate(self, crisp: Mapping[str, float]) -> AggregatedFuzzySet:
        strengths = self.rule_strengths(crisp)
        samples = _kernels.aggregate(self._term_samples, self._term_strengths(strengths))
        return AggregatedFuzzySet(self.output.universe, samples, strengths)

    def infer(self, crisp: Mapping[str, float], method: str | None = None) -> tuple[float, AggregatedFuzzySet]:
        fset = self.evaluate(crisp)
        return defuzzify(fset, method or self.defuzzifier), fset

    def rule_strengths_batch(self, values: np.ndarray) -> np.ndarray:
        """Firing strengths for an ``(N, len(inputs))`` array in input order."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.inputs):
            raise ConfigurationError(
                f"batch inputs need shape (N, {len(self.inputs)}) ordered as {self.input_names}"
            )
        if not np.all(np.isfinite(values)):
            raise RangeError("batch inputs must be finite")
        degrees = {}
        for k, var in enumerate(self.inputs):
            col = values[:, k]
            lo, hi = var.universe
            if self.clamp:
                col = np.clip(col, lo, hi)
            elif np.any((col < lo) | (col > hi)):
                raise RangeError(f"{var.name}: batch values outside universe [{lo:g}, {hi:g}]")
            for t in var.terms:
                degrees[var.name, t.label] = t.degrees(col)
        out = np.empty((values.shape[0], len(self.rules)))
        for j, rule in enumerate(self.rules):
            out[:, j] = np.minimum.reduce([degrees[a] for a in rule.antecedents])
        return out

    def infer_batch(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """COA crisp outputs (NaN where no rule fired) and the strength matrix."""
        strengths = self.rule_strengths_batch(values)
        per_term = np.zeros((strengths.shape[0], len(self.output.terms)))
        for t in range(per_term.shape[1]):
            cols = strengths[:, self._rule_term == t]
            if cols.size:
                per_term[:, t] = cols.max(axis=1)
        crisp = _kernels.aggregate_coa_batch(self._term_samples, self._xs, np.ascontiguousarray(per_term))
        return crisp, strengths


def evaluate(system: FuzzySystem, crisp: Mapping[str, float]) -> AggregatedFuzzySet:
    return system.evaluate(crisp)


def clip(term_samples: Sequence[float], strength: float) -> np.ndarray:
    """Min-implication of one consequent at ``strength``."""
    return np.minimum(np.asarray(term_samples, dtype=np.float64), strength)
