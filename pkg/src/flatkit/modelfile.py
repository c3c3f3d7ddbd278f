"""JSON model files describing two-input control-affine systems.

A model file is a flat JSON object: `name`, ordered `states`, exactly two
`inputs`, optional `parameters`, and per-state component lists `drift`, `g1`,
`g2` written in the expression grammar.  `flat_output` optionally names a
candidate output pair and `constraints` lists expressions that must stay
nonzero at sample points (e.g. a nonvanishing arm length).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .errors import ModelFileError, ParseError, UnknownSymbolError
from .expr import Chart, Expr
from .fields import VectorField
from .linalg import RankEngine
from .system import ControlAffineSystem, prolong

__all__ = [
    "ModelFile",
    "build_system",
    "load_model",
    "model_from_dict",
    "model_output",
    "prolonged_model",
    "save_model",
]

_REQUIRED = ("name", "states", "inputs", "drift", "g1", "g2")
_OPTIONAL = ("parameters", "flat_output", "constraints")


@dataclass(frozen=True)
class ModelFile:
    name: str
    states: tuple[str, ...]
    inputs: tuple[str, str]
    parameters: tuple[str, ...]
    drift: tuple[str, ...]
    g1: tuple[str, ...]
    g2: tuple[str, ...]
    flat_output: Optional[tuple[str, str]]
    constraints: tuple[str, ...]

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "states": list(self.states),
            "inputs": list(self.inputs),
            "drift": list(self.drift),
            "g1": list(self.g1),
            "g2": list(self.g2),
        }
        if self.parameters:
            data["parameters"] = list(self.parameters)
        if self.flat_output is not None:
            data["flat_output"] = list(self.flat_output)
        if self.constraints:
            data["constraints"] = list(self.constraints)
        return data


def _string_list(data: dict, key: str, source: str) -> list[str]:
    value = data[key]
    if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
        raise ModelFileError(f"{source}: '{key}' must be a list of strings")
    return value


def model_from_dict(data: object, source: str = "<dict>") -> ModelFile:
    if not isinstance(data, dict):
        raise ModelFileError(f"{source}: top level must be a JSON object")
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise ModelFileError(f"{source}: missing keys {missing}")
    unknown = [k for k in data if k not in _REQUIRED + _OPTIONAL]
    if unknown:
        raise ModelFileError(f"{source}: unknown keys {unknown}")
    name = data["name"]
    if not isinstance(name, str) or not name:
        raise ModelFileError(f"{source}: 'name' must be a non-empty string")
    states = _string_list(data, "states", source)
    if not states or len(set(states)) != len(states):
        raise ModelFileError(f"{source}: 'states' must be non-empty and unique")
    inputs = _string_list(data, "inputs", source)
    if len(inputs) != 2 or inputs[0] == inputs[1]:
        raise ModelFileError(f"{source}: exactly two distinct inputs required")
    parameters = _string_list(data, "parameters", source) if "parameters" in data else []
    components = {}
    for key in ("drift", "g1", "g2"):
        comp = _string_list(data, key, source)
        if len(comp) != len(states):
            raise ModelFileError(
                f"{source}: '{key}' has {len(comp)} components for {len(states)} states"
            )
        components[key] = comp
    flat_output = None
    if data.get("flat_output") is not None:
        flat_output = _string_list(data, "flat_output", source)
        if len(flat_output) != 2:
            raise ModelFileError(f"{source}: 'flat_output' must list two expressions")
        flat_output = (flat_output[0], flat_output[1])
    constraints = (
        _string_list(data, "constraints", source) if "constraints" in data else []
    )
    model = ModelFile(
        name,
        tuple(states),
        (inputs[0], inputs[1]),
        tuple(parameters),
        tuple(components["drift"]),
        tuple(components["g1"]),
        tuple(components["g2"]),
        flat_output,
        tuple(constraints),
    )
    _parse_all(model, source)  # fail at load time, not first use
    return model


def load_model(path: str | Path) -> ModelFile:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as err:
        raise ModelFileError(f"{p}: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFileError(f"{p}: invalid JSON ({err})") from err
    return model_from_dict(data, source=str(p))


def save_model(model: ModelFile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def _chart(model: ModelFile) -> Chart:
    return Chart(list(model.states), parameters=list(model.parameters))


def _parse_field(
    chart: Chart, names: tuple[str, ...], comps: tuple[str, ...], label: str, source: str
) -> VectorField:
    out = []
    for name, text in zip(names, comps):
        try:
            out.append(chart.parse(text))
        except (ParseError, UnknownSymbolError) as err:
            raise ModelFileError(
                f"{source}: {label} component for '{name}': {err}"
            ) from err
    return VectorField(chart, tuple(out))


def _parse_all(model: ModelFile, source: str) -> tuple[Chart, VectorField, VectorField, VectorField, tuple[Expr, ...]]:
    try:
        chart = _chart(model)
    except ValueError as err:
        raise ModelFileError(f"{source}: {err}") from err
    f = _parse_field(chart, model.states, model.drift, "drift", source)
    g1 = _parse_field(chart, model.states, model.g1, "g1", source)
    g2 = _parse_field(chart, model.states, model.g2, "g2", source)
    cons = []
    for text in model.constraints:
        try:
            cons.append(chart.parse(text))
        except (ParseError, UnknownSymbolError) as err:
            raise ModelFileError(f"{source}: constraint '{text}': {err}") from err
    if model.flat_output is not None:
        for text in model.flat_output:
            try:
                chart.parse(text)
            except (ParseError, UnknownSymbolError) as err:
                raise ModelFileError(
                    f"{source}: flat_output '{text}': {err}"
                ) from err
    return chart, f, g1, g2, tuple(cons)


def build_system(model: ModelFile, seed: int = 0) -> ControlAffineSystem:
    chart, f, g1, g2, cons = _parse_all(model, model.name)
    engine = RankEngine(seed=seed, constraints=cons)
    try:
        return ControlAffineSystem(
            chart, model.inputs, f, g1, g2, engine, model.name
        )
    except ValueError as err:
        raise ModelFileError(f"{model.name}: {err}") from err


def model_output(model: ModelFile, sys: ControlAffineSystem) -> Optional[tuple[Expr, Expr]]:
    """The declared candidate pair parsed on the system chart, if any."""
    if model.flat_output is None:
        return None
    return sys.chart.parse(model.flat_output[0]), sys.chart.parse(model.flat_output[1])


def prolonged_model(model: ModelFile, p1: int, p2: int, seed: int = 0) -> ModelFile:
    """Model file for the input-prolonged system; the original states keep
    their names, so a declared flat output carries over verbatim."""
    pro = prolong(build_system(model, seed), p1, p2)
    ext = pro.extended
    return replace(
        model,
        name=f"{model.name}-prolonged-{p1}-{p2}",
        states=ext.states,
        inputs=ext.inputs,
        drift=tuple(c.render() for c in ext.f.components),
        g1=tuple(c.render() for c in ext.g1.components),
        g2=tuple(c.render() for c in ext.g2.components),
    )
