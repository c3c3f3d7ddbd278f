"""Exact linear algebra over the rational-function field, plus sampled ranks.

Rank decisions feed integrability verdicts, so they are never left to chance
alone: nullspaces are always exact, and each `RankEngine` cross-checks its
first sampled rank against an exact elimination and aborts on disagreement.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ChartMismatchError, RankDisagreementError
from .expr import Chart, Expr, eval_at, transfer
from .sample import SamplePoint, draw_admissible
from . import sympoly

Matrix = list[list[Expr]]


def _clear_row_denominators(row: list[Expr], chart: Chart) -> list[Expr]:
    """Scale a row to polynomial entries (denominator 1)."""
    den = sympoly.p_const(Fraction(1))
    for e in row:
        if not e.is_zero():
            den = sympoly.p_lcm(den, e.den)
    if sympoly.p_is_const(den):
        scale = sympoly.p_const_value(den)
        if scale == 1:
            return list(row)
    factor = Expr(chart, den, sympoly.p_const(Fraction(1)))
    return [e * factor for e in row]


@dataclass
class EchelonResult:
    rank: int
    rows: Matrix            # eliminated rows, pivot rows first in pivot order
    pivot_cols: list[int]   # pivot column of rows[k]
    ncols: int


def echelon(matrix: Matrix, chart: Chart) -> EchelonResult:
    """Fraction-free forward elimination with degree-minimizing pivoting.

    Pivots are chosen among the remaining entries by least total degree,
    tie-broken by lowest row then lowest column index, which keeps the
    intermediate polynomials small in the sparse, low-degree matrices
    produced by bracket computations.
    """
    rows: Matrix = [_clear_row_denominators(list(r), chart) for r in matrix]
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    for r in rows:
        if len(r) != ncols:
            raise ValueError("ragged matrix")
    pivot_cols: list[int] = []
    prev_pivot: Optional[Expr] = None
    k = 0
    used_cols: set[int] = set()
    while k < m:
        best: Optional[tuple[int, int, int]] = None  # (degree, row, col)
        for i in range(k, m):
            for j in range(ncols):
                if j in used_cols:
                    continue
                e = rows[i][j]
                if e.is_zero():
                    continue
                deg = e.total_degree()
                cand = (deg, i, j)
                if best is None or cand < best:
                    best = cand
        if best is None:
            break
        _, pi, pj = best
        rows[k], rows[pi] = rows[pi], rows[k]
        pivot = rows[k][pj]
        for i in range(k + 1, m):
            head = rows[i][pj]
            if head.is_zero():
                # Field arithmetic: skipping the Bareiss rescale of zero-head
                # rows only changes row scaling, never rank or nullspace.
                continue
            new_row = []
            for j in range(ncols):
                if j == pj:
                    new_row.append(chart.zero)
                    continue
                val = pivot * rows[i][j] - head * rows[k][j]
                if prev_pivot is not None and not val.is_zero():
                    val = val / prev_pivot
                new_row.append(val)
            rows[i] = new_row
        prev_pivot = pivot
        pivot_cols.append(pj)
        used_cols.add(pj)
        k += 1
    return EchelonResult(rank=len(pivot_cols), rows=rows, pivot_cols=pivot_cols, ncols=ncols)


def exact_rank(matrix: Matrix, chart: Chart) -> int:
    if not matrix:
        return 0
    return echelon(matrix, chart).rank


def normalize_vector(vec: Sequence[Expr], chart: Chart) -> list[Expr]:
    """Scale a vector to primitive polynomial entries with a positive lead."""
    den = sympoly.p_const(Fraction(1))
    for e in vec:
        if not e.is_zero():
            den = sympoly.p_lcm(den, e.den)
    one = sympoly.p_const(Fraction(1))
    factor = Expr(chart, den, one)
    cleared = [e * factor for e in vec]
    g: Optional[sympoly.Poly] = None
    for e in cleared:
        if not e.is_zero():
            g = e.num if g is None else sympoly.p_gcd(g, e.num)
    if g is None:
        return list(vec)
    out = []
    for e in cleared:
        if e.is_zero():
            out.append(chart.zero)
        else:
            q = sympoly.p_div_exact(e.num, g)
            assert q is not None
            out.append(Expr(chart, q, one))
    for e in out:
        if not e.is_zero():
            _, lead = sympoly.p_lead(e.num)
            if lead < 0:
                out = [-x for x in out]
            break
    return out


def right_nullspace(matrix: Matrix, chart: Chart, ncols: Optional[int] = None) -> list[list[Expr]]:
    """Exact basis of {x : M x = 0}, entries normalized to primitive polynomials.

    Columns that are zero in every row produce unit solutions directly; the
    elimination then runs on the remaining block only.  On the wide, mostly
    empty matrices coming from jet-space annihilators this removes nearly all
    of the work.
    """
    if ncols is None:
        if not matrix:
            raise ValueError("need ncols for an empty matrix")
        ncols = len(matrix[0])
    if not matrix:
        return [_unit(chart, ncols, j) for j in range(ncols)]
    live = [
        j for j in range(ncols) if any(not row[j].is_zero() for row in matrix)
    ]
    dead = [j for j in range(ncols) if j not in set(live)]
    out = [_unit(chart, ncols, j) for j in dead]
    if not live:
        return out
    sub = [[row[j] for j in live] for row in matrix]
    res = echelon(sub, chart)
    piv = set(res.pivot_cols)
    free = [j for j in range(len(live)) if j not in piv]
    for f in free:
        x: list[Expr] = [chart.zero] * len(live)
        x[f] = chart.one
        for k in range(res.rank - 1, -1, -1):
            pj = res.pivot_cols[k]
            acc = chart.zero
            row = res.rows[k]
            for j in range(len(live)):
                if j != pj and not row[j].is_zero() and not x[j].is_zero():
                    acc = acc + row[j] * x[j]
            x[pj] = -acc / row[pj]
        full = [chart.zero] * ncols
        for j, col in enumerate(live):
            full[col] = x[j]
        out.append(normalize_vector(full, chart))
    return out


def left_nullspace(matrix: Matrix, chart: Chart) -> list[list[Expr]]:
    """Exact basis of {c : c M = 0}."""
    if not matrix:
        return []
    transpose = [[matrix[i][j] for i in range(len(matrix))] for j in range(len(matrix[0]))]
    return right_nullspace(transpose, chart, ncols=len(matrix))


def _unit(chart: Chart, n: int, j: int) -> list[Expr]:
    v = [chart.zero] * n
    v[j] = chart.one
    return v


def rank_at_point(matrix: Matrix, point: SamplePoint) -> int:
    """Rank of the matrix evaluated at one admissible point (exact rationals)."""
    rows = [[eval_at(e, point) for e in row] for row in matrix]
    m = len(rows)
    if m == 0:
        return 0
    n = len(rows[0])
    rank = 0
    col = 0
    while rank < m and col < n:
        sel = None
        for i in range(rank, m):
            if rows[i][col] != 0:
                sel = i
                break
        if sel is None:
            col += 1
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        pivot = rows[rank][col]
        for i in range(rank + 1, m):
            if rows[i][col] != 0:
                factor = rows[i][col] / pivot
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


class RankEngine:
    """Generic (maximal) rank of symbolic matrices via seeded sampling.

    The generic rank is realized at almost every point, so the maximum over a
    few admissible random points equals it with overwhelming probability.  The
    first sampled verdict per engine is cross-checked against an exact
    elimination; a mismatch means the sampling scheme itself is broken for
    this problem and the analysis must not continue on silent guesses.
    """

    def __init__(
        self,
        seed: int = 0,
        constraints: Sequence[Expr] = (),
        points: int = 5,
        crosscheck: bool = True,
    ) -> None:
        self.seed = seed
        self.rng = random.Random(seed)
        self.points = points
        self.constraints = tuple(constraints)
        self._crosschecked = not crosscheck
        self._constraint_cache: dict[int, tuple[Expr, ...]] = {}

    def constraints_on(self, chart: Chart) -> tuple[Expr, ...]:
        key = id(chart)
        got = self._constraint_cache.get(key)
        if got is None:
            got = tuple(transfer(c, chart) for c in self.constraints)
            self._constraint_cache[key] = got
        return got

    def draw(self, chart: Chart, exprs: Sequence[Expr]) -> SamplePoint:
        return draw_admissible(chart, self.rng, exprs, self.constraints_on(chart))

    def rank(self, matrix: Matrix, chart: Chart) -> int:
        if not matrix:
            return 0
        if all(e.is_zero() for row in matrix for e in row):
            return 0
        flat = [e for row in matrix for e in row if not e.is_zero()]
        best = 0
        for _ in range(self.points):
            point = self.draw(chart, flat)
            r = rank_at_point(matrix, point)
            if r > best:
                best = r
        if not self._crosschecked:
            self._crosschecked = True
            exact = exact_rank(matrix, chart)
            if exact != best:
                raise RankDisagreementError(
                    f"sampled rank {best} != exact rank {exact}"
                )
        return best
