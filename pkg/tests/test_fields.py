"""Vector/covector fields and Lie operations."""

from __future__ import annotations

import random

import pytest

from flatkit import (
    Chart,
    coordinate_covector,
    coordinate_field,
    differential,
    eval_float,
    field_from_dict,
    lie_bracket,
    lie_derivative,
    pair,
    transfer_field,
    zero_field,
)
from flatkit.errors import ChartMismatchError
from flatkit.fields import VectorField

from conftest import random_field, random_polynomial


def numeric_bracket(v, w, values, h=1e-5):
    """Finite-difference Jacobian bracket, independent of the symbolic code."""
    names = list(v.chart.coordinates)
    out = []
    for i in range(len(names)):
        total = 0.0
        for j, nj in enumerate(names):
            up = dict(values)
            dn = dict(values)
            up[nj] += h
            dn[nj] -= h
            dw = (eval_float(w.components[i], up) - eval_float(w.components[i], dn)) / (2 * h)
            dv = (eval_float(v.components[i], up) - eval_float(v.components[i], dn)) / (2 * h)
            total += eval_float(v.components[j], values) * dw
            total -= eval_float(w.components[j], values) * dv
        out.append(total)
    return out


def test_bracket_of_field_with_itself_vanishes(vtol):
    assert lie_bracket(vtol.f, vtol.f).is_zero()
    assert lie_bracket(vtol.g1, vtol.g1).is_zero()


def test_vtol_input_fields_commute(vtol):
    assert lie_bracket(vtol.g1, vtol.g2).is_zero()


def test_vtol_drift_brackets(vtol):
    chart = vtol.chart
    fg1 = lie_bracket(vtol.f, vtol.g1)
    assert fg1 == field_from_dict(
        chart,
        {
            "x": "sin(theta)",
            "z": "-cos(theta)",
            "vx": "-omega*cos(theta)",
            "vz": "-omega*sin(theta)",
        },
    )
    fg2 = lie_bracket(vtol.f, vtol.g2)
    assert fg2 == field_from_dict(
        chart,
        {
            "x": "-eps*cos(theta)",
            "z": "-eps*sin(theta)",
            "theta": "-1",
            "vx": "-eps*omega*sin(theta)",
            "vz": "eps*omega*cos(theta)",
        },
    )


def test_seven_state_bracket_against_finite_differences(seven_state, rng):
    sym = lie_bracket(seven_state.f, seven_state.g1)
    assert sym == field_from_dict(
        seven_state.chart,
        {"z1": "-1", "z3": "-z5", "z4": "z6 - z2"},
    )
    values = {name: rng.uniform(-2, 2) for name in seven_state.chart.coordinates}
    approx = numeric_bracket(seven_state.f, seven_state.g1, values)
    for comp, num in zip(sym.components, approx):
        assert abs(eval_float(comp, values) - num) < 1e-4


def test_drift_bracket_with_last_coordinate_direction(seven_state):
    e7 = coordinate_field(seven_state.chart, "z7")
    got = lie_bracket(seven_state.f, e7)
    e6 = coordinate_field(seven_state.chart, "z6")
    assert got == -e6


def test_antisymmetry_on_random_fields(rng):
    for _ in range(100):
        dim = rng.randint(2, 6)
        chart = Chart([f"y{i}" for i in range(dim)])
        v = random_field(chart, rng, degree=3)
        w = random_field(chart, rng, degree=3)
        assert (lie_bracket(v, w) + lie_bracket(w, v)).is_zero()


def test_jacobi_identity_on_random_triples(rng):
    for _ in range(50):
        dim = rng.randint(2, 4)
        chart = Chart([f"y{i}" for i in range(dim)])
        u = random_field(chart, rng, degree=2)
        v = random_field(chart, rng, degree=2)
        w = random_field(chart, rng, degree=2)
        total = (
            lie_bracket(u, lie_bracket(v, w))
            + lie_bracket(v, lie_bracket(w, u))
            + lie_bracket(w, lie_bracket(u, v))
        )
        assert total.is_zero()


def test_leibniz_rule_on_random_fields(rng):
    for _ in range(50):
        dim = rng.randint(2, 4)
        chart = Chart([f"y{i}" for i in range(dim)])
        v = random_field(chart, rng, degree=2)
        w = random_field(chart, rng, degree=2)
        h = random_polynomial(chart, rng, degree=2)
        lhs = lie_bracket(v, w.scale(h))
        rhs = w.scale(lie_derivative(h, v)) + lie_bracket(v, w).scale(h)
        assert (lhs - rhs).is_zero()


def test_lie_derivative_orders(seven_state):
    chart = seven_state.chart
    h = chart.sym("z1") * chart.sym("z2")
    assert lie_derivative(h, seven_state.f, order=0) == h
    assert lie_derivative(h, seven_state.f) == chart.sym("z2") ** 2


def test_differential_pairs_like_lie_derivative(rng):
    for _ in range(30):
        dim = rng.randint(2, 5)
        chart = Chart([f"y{i}" for i in range(dim)])
        h = random_polynomial(chart, rng, degree=2)
        v = random_field(chart, rng, degree=2)
        assert pair(differential(h), v) == lie_derivative(h, v)


def test_coordinate_frame_pairings():
    chart = Chart(["a", "b", "c"])
    for name in chart.coordinates:
        for other in chart.coordinates:
            val = pair(coordinate_covector(chart, name), coordinate_field(chart, other))
            assert val == (chart.one if name == other else chart.zero)


def test_field_arithmetic():
    chart = Chart(["a", "b"])
    v = field_from_dict(chart, {"a": "b"})
    w = field_from_dict(chart, {"a": "1", "b": "a"})
    assert (v + w) == field_from_dict(chart, {"a": "b + 1", "b": "a"})
    assert (v - v).is_zero()
    assert (-v) == field_from_dict(chart, {"a": "-b"})
    assert v.scale(chart.sym("a")) == field_from_dict(chart, {"a": "a*b"})
    assert zero_field(chart).is_zero()


def test_transfer_commutes_with_bracket(seven_state):
    bigger = seven_state.chart.extend(["w1", "w2"])
    tv = transfer_field(seven_state.f, bigger)
    tw = transfer_field(seven_state.g1, bigger)
    direct = transfer_field(lie_bracket(seven_state.f, seven_state.g1), bigger)
    assert lie_bracket(tv, tw) == direct


def test_chart_mismatch_is_rejected(seven_state, vtol):
    with pytest.raises(ChartMismatchError):
        lie_bracket(seven_state.f, vtol.f)
    with pytest.raises(ChartMismatchError):
        pair(differential(vtol.chart.sym("x")), seven_state.g1)


def test_component_count_is_validated():
    chart = Chart(["a", "b"])
    with pytest.raises(ValueError):
        VectorField(chart, (chart.zero,))
