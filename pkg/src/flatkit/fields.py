"""Vector fields, covector fields, and Lie operations on a chart.

Components are indexed by the chart's coordinates; parameters never carry
components and are treated as constants by every derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ChartMismatchError
from .expr import Chart, Expr, differentiate, transfer


def _check_components(chart: Chart, components: Sequence[Expr]) -> tuple[Expr, ...]:
    comps = tuple(components)
    if len(comps) != chart.dim:
        raise ValueError(
            f"expected {chart.dim} components, got {len(comps)}"
        )
    for c in comps:
        if c.chart is not chart:
            raise ChartMismatchError("component on a different chart")
    return comps


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple[Expr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "components", _check_components(self.chart, self.components)
        )

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.chart is not self.chart:
            raise ChartMismatchError("vector fields on different charts")
        return VectorField(
            self.chart,
            tuple(a + b for a, b in zip(self.components, other.components)),
        )

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-c for c in self.components))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, factor: Expr) -> "VectorField":
        return VectorField(self.chart, tuple(factor * c for c in self.components))

    def render(self) -> str:
        parts = []
        for name, c in zip(self.chart.coordinates, self.components):
            if not c.is_zero():
                parts.append(f"({c.render()})*d/d{name}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class CovectorField:
    chart: Chart
    components: tuple[Expr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "components", _check_components(self.chart, self.components)
        )

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def render(self) -> str:
        parts = []
        for name, c in zip(self.chart.coordinates, self.components):
            if not c.is_zero():
                r = c.render()
                parts.append(f"d{name}" if r == "1" else f"({r})*d{name}")
        return " + ".join(parts) if parts else "0"


def zero_field(chart: Chart) -> VectorField:
    return VectorField(chart, tuple(chart.zero for _ in chart.coordinates))


def coordinate_field(chart: Chart, name: str) -> VectorField:
    """The unit field d/d(name)."""
    idx = chart.coordinates.index(name)
    comps = [chart.zero] * chart.dim
    comps[idx] = chart.one
    return VectorField(chart, tuple(comps))


def coordinate_covector(chart: Chart, name: str) -> CovectorField:
    """The coordinate differential d(name)."""
    idx = chart.coordinates.index(name)
    comps = [chart.zero] * chart.dim
    comps[idx] = chart.one
    return CovectorField(chart, tuple(comps))


def field_from_dict(chart: Chart, entries: dict[str, Expr | str | int]) -> VectorField:
    comps = [chart.zero] * chart.dim
    for name, value in entries.items():
        idx = chart.coordinates.index(name)
        if isinstance(value, str):
            comps[idx] = chart.parse(value)
        elif isinstance(value, Expr):
            comps[idx] = value
        else:
            comps[idx] = chart.const(value)
    return VectorField(chart, tuple(comps))


def pair(omega: CovectorField, v: VectorField) -> Expr:
    """The pointwise pairing <omega, v>."""
    if omega.chart is not v.chart:
        raise ChartMismatchError("pairing across charts")
    total = omega.chart.zero
    for a, b in zip(omega.components, v.components):
        if not (a.is_zero() or b.is_zero()):
            total = total + a * b
    return total


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v, w]^i = v^j d_j w^i - w^j d_j v^i."""
    if v.chart is not w.chart:
        raise ChartMismatchError("bracket across charts")
    chart = v.chart
    names = chart.coordinates
    out = [chart.zero] * chart.dim
    for j, name_j in enumerate(names):
        vj = v.components[j]
        wj = w.components[j]
        if not vj.is_zero():
            for i in range(chart.dim):
                wi = w.components[i]
                if not wi.is_zero():
                    d = differentiate(wi, name_j)
                    if not d.is_zero():
                        out[i] = out[i] + vj * d
        if not wj.is_zero():
            for i in range(chart.dim):
                vi = v.components[i]
                if not vi.is_zero():
                    d = differentiate(vi, name_j)
                    if not d.is_zero():
                        out[i] = out[i] - wj * d
    return VectorField(chart, tuple(out))


def lie_derivative(h: Expr, v: VectorField, order: int = 1) -> Expr:
    """Iterated Lie derivative of a function along a field."""
    if h.chart is not v.chart:
        raise ChartMismatchError("derivative across charts")
    out = h
    for _ in range(order):
        total = v.chart.zero
        for name, comp in zip(v.chart.coordinates, v.components):
            if not comp.is_zero():
                d = differentiate(out, name)
                if not d.is_zero():
                    total = total + comp * d
        out = total
    return out


def differential(h: Expr) -> CovectorField:
    """The coordinate differential dh of a function."""
    chart = h.chart
    return CovectorField(
        chart, tuple(differentiate(h, name) for name in chart.coordinates)
    )


def transfer_field(v: VectorField, target: Chart) -> VectorField:
    """Move a field to a chart whose coordinates extend the source's.

    New coordinates receive zero components.
    """
    pos = {name: i for i, name in enumerate(v.chart.coordinates)}
    comps = []
    for name in target.coordinates:
        i = pos.get(name)
        comps.append(target.zero if i is None else transfer(v.components[i], target))
    return VectorField(target, tuple(comps))


def fields_matrix(fields: Iterable[VectorField]) -> list[list[Expr]]:
    return [list(f.components) for f in fields]


def covectors_matrix(covs: Iterable[CovectorField]) -> list[list[Expr]]:
    return [list(w.components) for w in covs]
