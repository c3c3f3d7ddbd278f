"""Seeded rational sample points for generic-position evaluation.

Base symbols receive random rationals with numerator and denominator bounded
by 997.  The sin/cos pair of an angle receives a rational point on the unit
circle through the tangent half-angle parameterization, so the circle relation
holds exactly while staying independent of the angle's own base value.
Opaque generators receive independent nonzero rationals; decisions that rely
on them carry declared-confidence semantics rather than field-theoretic
exactness.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import PoleError, SampleExhaustedError, StaleSamplePointError
from .expr import Chart, Expr, eval_at

_BOUND = 997


def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-_BOUND, _BOUND), rng.randint(1, _BOUND))


def _nonzero_rational(rng: random.Random) -> Fraction:
    while True:
        q = random_rational(rng)
        if q != 0:
            return q


def _circle_point(rng: random.Random) -> tuple[Fraction, Fraction]:
    """A rational (sin, cos) with both coordinates nonzero."""
    while True:
        t = random_rational(rng)
        if t in (0, 1, -1):
            continue
        den = 1 + t * t
        return Fraction(2) * t / den, (1 - t * t) / den


@dataclass(frozen=True)
class SamplePoint:
    """A total assignment of rationals to every generator known at draw time."""

    chart: Chart
    values: tuple[Fraction, ...]

    def value(self, index: int) -> Fraction:
        if index >= len(self.values):
            raise StaleSamplePointError(
                f"generator {self.chart.gen_info(index).name} registered after draw"
            )
        return self.values[index]

    def base_values(self) -> dict[str, Fraction]:
        out = {}
        for i, v in enumerate(self.values):
            info = self.chart.gen_info(i)
            if info.kind == "base":
                out[info.name] = v
        return out


def draw_point(chart: Chart, rng: random.Random) -> SamplePoint:
    gens = chart.gens()
    values: list[Fraction] = []
    circle: dict[str, tuple[Fraction, Fraction]] = {}
    for info in gens:
        if info.kind == "base":
            values.append(random_rational(rng))
        elif info.kind in ("sin", "cos"):
            if info.base not in circle:
                circle[info.base] = _circle_point(rng)
            s, c = circle[info.base]
            values.append(s if info.kind == "sin" else c)
        else:
            values.append(_nonzero_rational(rng))
    return SamplePoint(chart, tuple(values))


def draw_admissible(
    chart: Chart,
    rng: random.Random,
    exprs: list[Expr],
    constraints: tuple[Expr, ...] = (),
    tries: int = 60,
) -> SamplePoint:
    """A point where every expression evaluates and every constraint is nonzero."""
    for _ in range(tries):
        point = draw_point(chart, rng)
        try:
            for g in constraints:
                if eval_at(g, point) == 0:
                    raise PoleError(g.render())
            for e in exprs:
                eval_at(e, point)
        except (PoleError, StaleSamplePointError):
            continue
        return point
    raise SampleExhaustedError(
        f"no admissible sample point within {tries} tries on chart "
        f"({', '.join(chart.coordinates)})"
    )
