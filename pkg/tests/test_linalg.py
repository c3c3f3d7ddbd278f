"""Fraction-free elimination, nullspaces, and the sampling rank engine."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from flatkit import Chart, RankEngine, exact_rank, rank_at_point, right_nullspace
from flatkit.linalg import echelon, left_nullspace, normalize_vector
from flatkit.sample import draw_admissible, draw_point

from conftest import random_polynomial


def random_matrix_of_rank(chart, rng, rows, cols, rank):
    """Product of random integer factor matrices; generic rank = `rank`."""
    left = [[rng.randint(-4, 4) for _ in range(rank)] for _ in range(rows)]
    right = [
        [random_polynomial(chart, rng, degree=1) for _ in range(cols)]
        for _ in range(rank)
    ]
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = chart.zero
            for k in range(rank):
                acc = acc + right[k][j] * left[i][k]
            row.append(acc)
        out.append(row)
    return out


def test_exact_rank_matches_sampled_rank_on_random_matrices(rng):
    chart = Chart(["a", "b", "c"])
    for _ in range(25):
        rows, cols = rng.randint(1, 4), rng.randint(1, 4)
        r = rng.randint(0, min(rows, cols))
        m = random_matrix_of_rank(chart, rng, rows, cols, r)
        er = exact_rank(m, chart)
        assert er <= r
        flat = [e for row in m for e in row if not e.is_zero()]
        sampled = 0
        for _ in range(4):
            point = draw_admissible(chart, rng, flat, ())
            sampled = max(sampled, rank_at_point(m, point))
        assert sampled == er


def test_echelon_reports_pivot_columns():
    chart = Chart(["a", "b"])
    m = [
        [chart.zero, chart.one],
        [chart.sym("a"), chart.sym("b")],
        [chart.sym("a"), chart.sym("b") + chart.one],
    ]
    res = echelon(m, chart)
    assert res.rank == 2
    assert sorted(res.pivot_cols) == [0, 1]


def test_right_nullspace_solves_exactly(rng):
    chart = Chart(["a", "b", "c"])
    for _ in range(20):
        rows, cols = rng.randint(1, 4), rng.randint(2, 5)
        r = rng.randint(0, min(rows, cols))
        m = random_matrix_of_rank(chart, rng, rows, cols, r)
        null = right_nullspace(m, chart, ncols=cols)
        assert len(null) == cols - exact_rank(m, chart)
        for vec in null:
            for row in m:
                acc = chart.zero
                for e, x in zip(row, vec):
                    acc = acc + e * x
                assert acc.is_zero()
        # solutions are independent
        if null:
            assert exact_rank(null, chart) == len(null)


def test_left_nullspace_annihilates_rows():
    chart = Chart(["a", "b", "c"])
    m = [
        [chart.one, chart.sym("a"), chart.zero],
        [chart.sym("b"), chart.sym("a") * chart.sym("b"), chart.zero],
    ]
    combos = left_nullspace(m, chart)
    assert len(combos) == 1
    for j in range(3):
        acc = chart.zero
        for c, row in zip(combos[0], m):
            acc = acc + c * row[j]
        assert acc.is_zero()


def test_nullspace_of_full_rank_matrix_is_empty():
    chart = Chart(["a", "b"])
    m = [[chart.one, chart.zero], [chart.zero, chart.sym("a")]]
    assert right_nullspace(m, chart) == []


def test_dead_columns_yield_unit_solutions():
    chart = Chart(["a", "b", "c"])
    m = [[chart.sym("a"), chart.zero, chart.one]]
    null = right_nullspace(m, chart)
    # the all-zero middle column must appear as a pure unit direction
    assert any(
        vec[1] == chart.one and vec[0].is_zero() and vec[2].is_zero() for vec in null
    )


def test_normalize_vector_scaling_invariance():
    chart = Chart(["a", "b"])
    a = chart.sym("a")
    b = chart.sym("b")
    vec = [a / b, chart.one + a]
    scaled = [(a / b) * (a * b + 2), (chart.one + a) * (a * b + 2)]
    left = normalize_vector(vec, chart)
    right_ = normalize_vector(scaled, chart)
    assert left == right_
    # denominator-free output
    again = normalize_vector(left, chart)
    assert again == left


def test_normalize_vector_sign_convention():
    chart = Chart(["a"])
    plus = normalize_vector([chart.sym("a")], chart)
    minus = normalize_vector([-chart.sym("a")], chart)
    assert plus == minus


def test_identity_frame_has_full_rank():
    chart = Chart([f"y{i}" for i in range(5)])
    eye = [
        [chart.one if i == j else chart.zero for j in range(5)] for i in range(5)
    ]
    engine = RankEngine(seed=1)
    assert engine.rank(eye, chart) == 5


def test_rank_engine_is_deterministic():
    chart = Chart(["a", "b", "c"])
    m = [
        [chart.sym("a"), chart.sym("b"), chart.zero],
        [chart.sym("a") * chart.sym("c"), chart.sym("b") * chart.sym("c"), chart.zero],
    ]
    r1 = RankEngine(seed=42).rank(m, chart)
    r2 = RankEngine(seed=42).rank(m, chart)
    assert r1 == r2 == 1


def test_rank_engine_respects_constraints():
    chart = Chart(["a"], parameters=["p"])
    engine = RankEngine(seed=5, constraints=(chart.sym("p"),))
    for _ in range(10):
        point = engine.draw(chart, [chart.sym("p")])
        from flatkit import eval_at

        assert eval_at(chart.sym("p"), point) != 0


def test_rank_of_zero_and_empty_matrices():
    chart = Chart(["a"])
    engine = RankEngine(seed=0)
    assert engine.rank([], chart) == 0
    assert engine.rank([[chart.zero]], chart) == 0


def test_rank_with_trig_entries(vtol):
    chart = vtol.chart
    rows = [list(vtol.g1.components), list(vtol.g2.components)]
    assert vtol.engine.rank(rows, chart) == 2
    assert exact_rank(rows, chart) == 2


def test_rank_at_point_on_rational_entries():
    chart = Chart(["a", "b"])
    m = [[chart.sym("a") / chart.sym("b"), chart.one]]
    rng = random.Random(9)
    point = draw_admissible(chart, rng, [e for row in m for e in row], ())
    assert rank_at_point(m, point) == 1
