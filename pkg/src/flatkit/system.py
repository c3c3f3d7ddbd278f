"""Two-input control-affine systems and their flatness-related analyses.

Everything here works on the closed chain

    candidate output -> relative degrees -> index pair (R, d)
    -> codistribution sequence Q on the input-jet chart
    -> triangular-form equivalence / flat-output verification,

plus the structural operations feeding it: input normalization, static
feedback, input prolongation, and recognition of the triangular normal form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .distributions import Codistribution, generic_rank, intersect_with_coordinates
from .errors import (
    ChartMismatchError,
    DependentDifferentialsError,
    InputTransformError,
    InvalidIndicesError,
    UnboundedRelativeDegreeError,
)
from .expr import Chart, Expr, differentiate, transfer
from .fields import (
    VectorField,
    covectors_matrix,
    differential,
    lie_derivative,
    transfer_field,
)
from .linalg import RankEngine

PhiPair = Sequence[Expr]


@dataclass(frozen=True)
class ControlAffineSystem:
    """x' = f(x) + g1(x) u1 + g2(x) u2 with two named scalar inputs."""

    chart: Chart
    inputs: tuple[str, str]
    f: VectorField
    g1: VectorField
    g2: VectorField
    engine: RankEngine
    name: str = ""

    def __post_init__(self) -> None:
        for v in (self.f, self.g1, self.g2):
            if v.chart is not self.chart:
                raise ChartMismatchError("system fields on a different chart")
        if len(self.inputs) != 2 or self.inputs[0] == self.inputs[1]:
            raise ValueError("exactly two distinct input names are required")
        for u in self.inputs:
            if self.chart.has_symbol(u):
                raise ValueError(f"input name '{u}' collides with a chart symbol")
        if generic_rank([self.g1, self.g2], self.chart, self.engine) != 2:
            raise ValueError("input fields g1, g2 must have generic rank 2")

    @property
    def n(self) -> int:
        return self.chart.dim

    @property
    def states(self) -> tuple[str, ...]:
        return self.chart.coordinates


@dataclass(frozen=True)
class FlatCandidate:
    """A candidate output pair with its degrees and index data."""

    phi1: Expr
    phi2: Expr
    K: tuple[int, int]
    R: tuple[int, int]
    d: int


@dataclass(frozen=True)
class ProlongedSystem:
    base: ControlAffineSystem
    orders: tuple[int, int]
    extended: ControlAffineSystem


# --- jet charts -------------------------------------------------------------

_DERIV_RE = re.compile(r"^(.*)_d([0-9]+)$")


def _next_name(name: str) -> str:
    m = _DERIV_RE.match(name)
    if m:
        return f"{m.group(1)}_d{int(m.group(2)) + 1}"
    return f"{name}_d1"


def _chain(name: str, length: int) -> list[str]:
    out = []
    for _ in range(length):
        out.append(name)
        name = _next_name(name)
    return out


def jet_chart(sys: ControlAffineSystem, jet_order: int) -> Chart:
    """The state chart extended by input derivatives up to the given order."""
    if jet_order < 0:
        raise ValueError("jet order must be nonnegative")
    extra: list[str] = []
    for u in sys.inputs:
        extra.extend(_chain(u, jet_order + 1))
    return sys.chart.extend(extra)


def f_u(sys: ControlAffineSystem, jet_order: int) -> VectorField:
    """Total-derivative field on the jet chart.

    State components are f + g1 u1 + g2 u2; each input derivative coordinate
    is shifted to the next one, and the top level (never differentiated by
    construction of the callers) gets a zero component.
    """
    ch = jet_chart(sys, jet_order)
    pos = {name: i for i, name in enumerate(ch.coordinates)}
    u1 = ch.sym(sys.inputs[0])
    u2 = ch.sym(sys.inputs[1])
    total = (
        transfer_field(sys.f, ch)
        + transfer_field(sys.g1, ch).scale(u1)
        + transfer_field(sys.g2, ch).scale(u2)
    )
    comps = list(total.components)
    for u in sys.inputs:
        chain = _chain(u, jet_order + 1)
        for lower, upper in zip(chain, chain[1:]):
            comps[pos[lower]] = ch.sym(upper)
    return VectorField(ch, tuple(comps))


# --- degrees and indices ------------------------------------------------------


def _single_relative_degree(sys: ControlAffineSystem, h: Expr, which: int) -> int:
    if h.chart is not sys.chart:
        raise ChartMismatchError("candidate output on a different chart")
    cur = h
    for t in range(1, sys.n + 1):
        if not lie_derivative(cur, sys.g1).is_zero():
            return t
        if not lie_derivative(cur, sys.g2).is_zero():
            return t
        cur = lie_derivative(cur, sys.f)
    raise UnboundedRelativeDegreeError(which, sys.n)


def relative_degree(sys: ControlAffineSystem, phi: PhiPair) -> tuple[int, int]:
    """Smallest derivative orders of the outputs that see an input."""
    phi1, phi2 = phi
    return (
        _single_relative_degree(sys, phi1, 1),
        _single_relative_degree(sys, phi2, 2),
    )


def flat_indices(n: int, K: tuple[int, int]) -> tuple[tuple[int, int], int]:
    """(R, d) with r1 = n - k2, r2 = n - k1, d = n - k1 - k2."""
    k1, k2 = K
    if k1 < 1 or k2 < 1:
        raise InvalidIndicesError(f"relative degrees must be positive, got {K}")
    if k1 + k2 > n:
        raise InvalidIndicesError(
            f"relative degrees {K} exceed the state dimension {n}"
        )
    return (n - k2, n - k1), n - k1 - k2


def candidate(sys: ControlAffineSystem, phi: PhiPair) -> FlatCandidate:
    """Degrees plus indices for an output pair, with the independence check."""
    phi1, phi2 = phi
    if generic_rank([differential(phi1), differential(phi2)], sys.chart, sys.engine) < 2:
        raise DependentDifferentialsError(
            "candidate output differentials are dependent"
        )
    K = relative_degree(sys, phi)
    R, d = flat_indices(sys.n, K)
    return FlatCandidate(phi1, phi2, K, R, d)


# --- input normalization and static feedback ---------------------------------


def normalize_input(sys: ControlAffineSystem, phi: PhiPair) -> ControlAffineSystem:
    """Static feedback making the k1-th derivative of the first output the
    first input; inputs are permuted when only the second one appears."""
    phi1 = phi[0]
    k1 = _single_relative_degree(sys, phi1, 1)
    below = lie_derivative(phi1, sys.f, k1 - 1)
    a = lie_derivative(below, sys.f)
    b1 = lie_derivative(below, sys.g1)
    b2 = lie_derivative(below, sys.g2)
    if not b1.is_zero():
        f = sys.f - sys.g1.scale(a / b1)
        g1 = sys.g1.scale(sys.chart.one / b1)
        g2 = sys.g2 - sys.g1.scale(b2 / b1)
    elif not b2.is_zero():
        f = sys.f - sys.g2.scale(a / b2)
        g1 = sys.g2.scale(sys.chart.one / b2)
        g2 = sys.g1
    else:
        raise InputTransformError(
            "derivative of the first output is input-independent at its degree"
        )
    return ControlAffineSystem(
        sys.chart, sys.inputs, f, g1, g2, sys.engine, sys.name
    )


def apply_static_feedback(
    sys: ControlAffineSystem,
    alpha: Sequence[Expr],
    beta: Sequence[Sequence[Expr]],
) -> ControlAffineSystem:
    """Replace u by alpha(x) + beta(x) v for an invertible matrix beta."""
    det = beta[0][0] * beta[1][1] - beta[0][1] * beta[1][0]
    if det.is_zero():
        raise InputTransformError("feedback matrix is singular")
    f = sys.f + sys.g1.scale(alpha[0]) + sys.g2.scale(alpha[1])
    g1 = sys.g1.scale(beta[0][0]) + sys.g2.scale(beta[1][0])
    g2 = sys.g1.scale(beta[0][1]) + sys.g2.scale(beta[1][1])
    return ControlAffineSystem(
        sys.chart, sys.inputs, f, g1, g2, sys.engine, sys.name
    )


# --- the codistribution sequence ---------------------------------------------


def _derivative_ladder(
    ch: Chart, total: VectorField, h: Expr, orders: int
) -> list[Expr]:
    """h and its first `orders` total derivatives on the jet chart."""
    out = [transfer(h, ch)]
    for _ in range(orders):
        out.append(lie_derivative(out[-1], total))
    return out


def q_sequence(sys: ControlAffineSystem, phi: PhiPair) -> list[Codistribution]:
    """Q_j = span{d phi_[0,j]} ^ span{dx} for j = K-1, ..., R-1.

    Computed after input normalization; the jet chart carries max(R)
    derivative levels per input so every needed total derivative exists.
    """
    cand = candidate(sys, phi)
    k1, k2 = cand.K
    nsys = normalize_input(sys, phi)
    total = f_u(nsys, max(cand.R) - 1)
    ch = total.chart
    lad1 = _derivative_ladder(ch, total, cand.phi1, cand.R[0] - 1)
    lad2 = _derivative_ladder(ch, total, cand.phi2, cand.R[1] - 1)
    out: list[Codistribution] = []
    for i in range(cand.d + 1):
        covs = [differential(e) for e in lad1[: k1 + i]]
        covs += [differential(e) for e in lad2[: k2 + i]]
        q = Codistribution(ch, covs, sys.engine)
        out.append(intersect_with_coordinates(q, sys.states))
    return out


@dataclass(frozen=True)
class QReport:
    index: tuple[int, int]
    rank: int
    integrable: bool


@dataclass(frozen=True)
class SfeGtfResult:
    """Outcome of the triangular-form equivalence test with per-Q detail."""

    passed: bool
    candidate: FlatCandidate
    reports: tuple[QReport, ...]
    codistributions: tuple[Codistribution, ...]

    def __bool__(self) -> bool:
        return self.passed


def sfe_gtf_test(sys: ControlAffineSystem, phi: PhiPair) -> SfeGtfResult:
    """Equivalent to the triangular form under static feedback iff every Q_j
    in the sequence is integrable."""
    cand = candidate(sys, phi)
    k1, k2 = cand.K
    qs = q_sequence(sys, phi)
    reports = []
    passed = True
    for i, q in enumerate(qs):
        ok = q.is_integrable()
        passed = passed and ok
        reports.append(QReport((k1 - 1 + i, k2 - 1 + i), q.rank, ok))
    return SfeGtfResult(passed, cand, tuple(reports), tuple(qs))


# --- prolongation -------------------------------------------------------------


def prolong(sys: ControlAffineSystem, p1: int, p2: int) -> ProlongedSystem:
    """Integrate input j through p_j extra states; old inputs become states."""
    if p1 < 0 or p2 < 0:
        raise ValueError("prolongation orders must be nonnegative")
    if p1 == 0 and p2 == 0:
        return ProlongedSystem(sys, (0, 0), sys)
    chains = (_chain(sys.inputs[0], p1), _chain(sys.inputs[1], p2))
    ch = sys.chart.extend(chains[0] + chains[1])
    dim = ch.dim
    pos = {name: i for i, name in enumerate(ch.coordinates)}
    f = transfer_field(sys.f, ch)
    comps = list(f.components)
    gs = []
    for g, chain, p in zip((sys.g1, sys.g2), chains, (p1, p2)):
        gt = transfer_field(g, ch)
        if p == 0:
            gs.append(gt)
            continue
        # the lowest chain state multiplies the old input field ...
        u0 = ch.sym(chain[0])
        for i in range(dim):
            c = gt.components[i]
            if not c.is_zero():
                comps[i] = comps[i] + u0 * c
        # ... intermediate states shift, and the new input drives the top
        for lower, upper in zip(chain, chain[1:]):
            comps[pos[lower]] = ch.sym(upper)
        top = [ch.zero] * dim
        top[pos[chain[-1]]] = ch.one
        gs.append(VectorField(ch, tuple(top)))
    new_inputs = (
        _next_name(chains[0][-1]) if p1 else sys.inputs[0],
        _next_name(chains[1][-1]) if p2 else sys.inputs[1],
    )
    extended = ControlAffineSystem(
        ch, new_inputs, VectorField(ch, tuple(comps)), gs[0], gs[1],
        sys.engine, sys.name,
    )
    return ProlongedSystem(sys, (p1, p2), extended)


# --- flat-output verification --------------------------------------------------


@dataclass(frozen=True)
class FlatVerdict:
    """Result of the reconstruction test for a candidate output pair."""

    passed: bool
    candidate: FlatCandidate
    spans_states: bool
    stacked_rank: int
    required_rank: int

    def __bool__(self) -> bool:
        return self.passed


def verify_flat_output(sys: ControlAffineSystem, phi: PhiPair) -> FlatVerdict:
    """Pass iff span{dx} lies in span{d phi_[0,R-1]} and the stacked
    differentials have rank n + d (so the candidate really has n + d
    independent functions through order R - 1)."""
    cand = candidate(sys, phi)
    total = f_u(sys, max(cand.R) - 1)
    ch = total.chart
    lad1 = _derivative_ladder(ch, total, cand.phi1, cand.R[0] - 1)
    lad2 = _derivative_ladder(ch, total, cand.phi2, cand.R[1] - 1)
    covs = [differential(e) for e in lad1 + lad2]
    stacked_rank = sys.engine.rank(covectors_matrix(covs), ch)
    state_covs = [differential(ch.sym(name)) for name in sys.states]
    joint_rank = sys.engine.rank(covectors_matrix(covs + state_covs), ch)
    spans_states = joint_rank == stacked_rank
    required = sys.n + cand.d
    return FlatVerdict(
        spans_states and stacked_rank == required,
        cand,
        spans_states,
        stacked_rank,
        required,
    )


# --- triangular-form structure recognition -------------------------------------


@dataclass(frozen=True)
class GtfStructureReport:
    matches: bool
    label: Optional[str]
    violation: Optional[str]

    def __bool__(self) -> bool:
        return self.matches


def gtf_structure_check(
    sys: ControlAffineSystem, order: Sequence[str], K: tuple[int, int]
) -> GtfStructureReport:
    """Structural match against the triangular normal form in the given
    coordinate order: two integrator chains, a triangular bottom block whose
    rows each depend on (and actually use) the next coordinate, and the last
    state driven directly by the second input."""
    if sorted(order) != sorted(sys.chart.coordinates):
        raise ValueError("state order must be a permutation of the chart")
    n = sys.n
    k1, k2 = K
    _, d = flat_indices(n, K)

    idx = {name: i for i, name in enumerate(sys.chart.coordinates)}
    rows = [
        (sys.f.components[idx[name]], sys.g1.components[idx[name]],
         sys.g2.components[idx[name]])
        for name in order
    ]
    allowed_syms = [set(sys.chart.parameters)]
    for name in order:
        allowed_syms.append(allowed_syms[-1] | {name})
    # allowed_syms[l] = parameters plus the first l ordered coordinates

    def fail(l: int, what: str) -> GtfStructureReport:
        return GtfStructureReport(False, None, f"row {l} ({order[l - 1]}): {what}")

    def expect_chain_row(l: int) -> Optional[GtfStructureReport]:
        fc, g1c, g2c = rows[l - 1]
        nxt = sys.chart.sym(order[l])
        if not (fc - nxt).is_zero():
            return fail(l, f"drift component is not {order[l]}")
        if not g1c.is_zero() or not g2c.is_zero():
            return fail(l, "inputs enter an integrator row")
        return None

    for l in range(1, k1):
        bad = expect_chain_row(l)
        if bad:
            return bad
    fc, g1c, g2c = rows[k1 - 1]
    if not fc.is_zero() or not (g1c - sys.chart.one).is_zero() or not g2c.is_zero():
        return fail(k1, "chain must end with the first input alone")
    for l in range(k1 + 1, k1 + k2):
        bad = expect_chain_row(l)
        if bad:
            return bad

    fc, g1c, g2c = rows[n - 1]
    if not fc.is_zero() or not g1c.is_zero() or not (g2c - sys.chart.one).is_zero():
        return fail(n, "last row must be the second input alone")

    pure_chained = True
    if d > 0:
        for l in range(k1 + k2, n):
            fc, g1c, g2c = rows[l - 1]
            if not g2c.is_zero():
                return fail(l, "second input enters above the last row")
            used = fc.free_symbols() | g1c.free_symbols()
            beyond = used - allowed_syms[l + 1]
            if beyond:
                return fail(l, f"depends on later coordinates {sorted(beyond)}")
            nxt = order[l]
            if l == k1 + k2:
                if g1c.is_zero():
                    return fail(l, "first input must enter the pivot row")
            else:
                df = differentiate(fc, nxt)
                dg = differentiate(g1c, nxt)
                if df.is_zero() and dg.is_zero():
                    return fail(l, f"row does not use {nxt}")
            if not (fc.is_zero() and (g1c - sys.chart.sym(nxt)).is_zero()):
                pure_chained = False

    if d == 0:
        label = "brunovsky"
    elif pure_chained:
        label = "chained" if k1 == 1 and k2 == 1 else "extended-chained"
    else:
        label = "general"
    return GtfStructureReport(True, label, None)
