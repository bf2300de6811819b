"""Piecewise-linear membership functions and linguistic variables."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, RangeError

SHAPES = {"triangular": 3, "trapezoidal": 4}


@dataclass(frozen=True)
class MembershipFunction:
    """A labelled triangular or trapezoidal fuzzy term.

    ``points`` holds the breakpoints in universe units: ``(a, b, c)`` for a
    triangle peaking at ``b``, ``(a, b, c, d)`` for a trapezoid with plateau
    ``[b, c]``. Setting ``a == b`` (or ``c == d``) gives a shoulder that is
    saturated at the edge.
    """

    label: str
    shape: str
    points: tuple[float, ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigurationError(
                f"term {self.label!r}: unknown shape {self.shape!r}, expected one of {sorted(SHAPES)}"
            )
        pts = tuple(float(p) for p in self.points)
        if len(pts) != SHAPES[self.shape]:
            raise ConfigurationError(
                f"term {self.label!r}: {self.shape} needs {SHAPES[self.shape]} breakpoints, got {len(pts)}"
            )
        if any(not np.isfinite(p) for p in pts):
            raise ConfigurationError(f"term {self.label!r}: breakpoints must be finite")
        if any(q < p for p, q in zip(pts, pts[1:])):
            raise ConfigurationError(f"term {self.label!r}: breakpoints must be non-decreasing, got {pts}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def triangular(cls, label, a, b, c):
        return cls(label, "triangular", (a, b, c))

    @classmethod
    def trapezoidal(cls, label, a, b, c, d):
        return cls(label, "trapezoidal", (a, b, c, d))

    @property
    def corners(self) -> tuple[float, float, float, float]:
        """Breakpoints as a trapezoid ``(a, b, c, d)``."""
        p = self.points
        if len(p) == 3:
            return p[0], p[1], p[1], p[2]
        return p

    def degree(self, x: float) -> float:
        a, b, c, d = self.corners
        if x < a or x > d:
            return 0.0
        if b <= x <= c:
            return 1.0
        if x < b:
            return (x - a) / (b - a)
        return (d - x) / (d - c)

    def degrees(self, xs) -> np.ndarray:
        """Vectorised :meth:`degree`; same arithmetic, so results agree bitwise."""
        xs = np.asarray(xs, dtype=np.float64)
        a, b, c, d = self.corners
        mu = np.zeros_like(xs)
        inside = (xs >= a) & (xs <= d)
        rise = inside & (xs < b)
        fall = inside & (xs > c)
        mu[inside & (xs >= b) & (xs <= c)] = 1.0
        mu[rise] = (xs[rise] - a) / (b - a)
        mu[fall] = (d - xs[fall]) / (d - c)
        return mu


@dataclass(frozen=True)
class LinguisticVariable:
    """A named universe with ordered fuzzy terms.

    Terms must be continuous on the universe: a zero-width ramp is only
    allowed at a universe edge (a shoulder). Input variables must cover
    their whole universe, otherwise some crisp
    value would fuzzify to all zeros. Output variables may opt out with
    ``require_coverage=False``: a point no consequent reaches is harmless
    there.
    """

    name: str
    universe: tuple[float, float]
    terms: tuple[MembershipFunction, ...]
    unit: str = ""
    description: str = ""
    require_coverage: bool = True
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo, hi = (float(v) for v in self.universe)
        object.__setattr__(self, "universe", (lo, hi))
        object.__setattr__(self, "terms", tuple(self.terms))
        if not lo < hi:
            raise ConfigurationError(f"variable {self.name!r}: universe needs lo < hi, got {self.universe}")
        if not self.terms:
            raise ConfigurationError(f"variable {self.name!r}: no terms")
        labels = [t.label for t in self.terms]
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        if dupes:
            raise ConfigurationError(f"variable {self.name!r}: duplicate term labels {dupes}")
        for t in self.terms:
            if t.points[0] < lo or t.points[-1] > hi:
                raise ConfigurationError(
                    f"variable {self.name!r}: term {t.label!r} breakpoints {t.points} leave universe [{lo}, {hi}]"
                )
            a, b, c, d = t.corners
            if (a == b and a != lo) or (c == d and d != hi):
                raise ConfigurationError(
                    f"variable {self.name!r}: term {t.label!r} has a vertical edge inside the universe {t.points}"
                )
        object.__setattr__(self, "_index", {t.label: t for t in self.terms})
        gap = self.coverage_gap() if self.require_coverage else None
        if gap is not None:
            raise ConfigurationError(f"variable {self.name!r}: no term covers x={gap:g}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.terms)

    def term(self, label: str) -> MembershipFunction:
        try:
            return self._index[label]
        except KeyError:
            raise ConfigurationError(f"variable {self.name!r} has no term {label!r}") from None

    def coverage_gap(self):
        """Return some uncovered x in the universe, or None if coverage is complete.

        Every term is linear between consecutive breakpoints, so probing the
        breakpoints and the midpoints between them is exhaustive.
        """
        lo, hi = self.universe
        knots = sorted({lo, hi, *(p for t in self.terms for p in t.points if lo <= p <= hi)})
        probes = knots + [(p + q) / 2 for p, q in zip(knots, knots[1:])]
        for x in sorted(probes):
            if max(t.degree(x) for t in self.terms) <= 0.0:
                return x
        return None

    def clamp(self, x: float) -> float:
        lo, hi = self.universe
        return min(max(float(x), lo), hi)

    def fuzzify(self, x: float, clamp: bool = True) -> dict[str, float]:
        return fuzzify(self, x, clamp=clamp)


def fuzzify(variable: LinguisticVariable, x: float, clamp: bool = True) -> dict[str, float]:
    """Degree of ``x`` in every term of ``variable``, keyed by term label."""
    x = float(x)
    lo, hi = variable.universe
    if not np.isfinite(x):
        raise RangeError(f"{variable.name}: value {x} is not finite")
    if clamp:
        x = min(max(x, lo), hi)
    elif x < lo or x > hi:
        raise RangeError(f"{variable.name}: value {x:g} outside universe [{lo:g}, {hi:g}]")
    return {t.label: t.degree(x) for t in variable.terms}
