"""Distribution-sequence construction, branch bookkeeping, the candidate
direction selection, and flat-output extraction from terminal data."""

from __future__ import annotations

import random

import pytest

from flatkit import (
    Chart,
    Codistribution,
    ControlAffineSystem,
    RankEngine,
    apply_static_feedback,
    differential,
    extract_candidates,
    field_from_dict,
    lemma1_candidates,
    lie_bracket,
    run_algorithm1,
    run_algorithm2,
    span,
    sum_spans,
)
from flatkit.algorithms import _solve_membership
from flatkit.errors import AssumptionViolationError
from flatkit.fields import CovectorField, coordinate_field, zero_field

from conftest import as_system


def _covspan(sys: ControlAffineSystem, names: list[str]) -> Codistribution:
    """Codistribution spanned by the differentials of the named coordinates."""
    return Codistribution(
        sys.chart, [differential(sys.chart.sym(n)) for n in names], sys.engine
    )


@pytest.fixture
def drift_free3() -> ControlAffineSystem:
    """Zero drift on a three-state chart: every drift bracket vanishes, so the
    sequence can never grow past span{g1, g2}."""
    chart = Chart(["z1", "z2", "z3"])
    g1 = field_from_dict(chart, {"z1": "1"})
    g2 = field_from_dict(chart, {"z2": "1"})
    return ControlAffineSystem(
        chart, ("u1", "u2"), zero_field(chart), g1, g2, RankEngine(seed=2), "df3"
    )


# --- basic sequence ---------------------------------------------------------------


def test_basic_sequence_vtol(vtol):
    tree = run_algorithm1(as_system(vtol, "vtol"))
    assert tree.algorithm == 1
    (branch,) = tree.branches
    assert branch.status == "reached-tangent-space"
    assert branch.ranks == (2, 4, 6)
    assert branch.tags == ("A", "B")
    # the drift step lands on a non-involutive member whose characteristic
    # directions vanish, so the terminal data degenerates to the whole chart
    assert branch.records[1].involutive is False
    assert branch.F is not None and branch.F.rank == 0
    assert branch.F_perp.rank == 6


def test_basic_sequence_chained(chained5):
    sys = as_system(chained5, "chained5")
    tree = run_algorithm1(sys)
    (branch,) = tree.branches
    assert branch.ranks == (2, 3, 4, 5)
    assert branch.tags == ("B", "B", "B")
    assert branch.F.rank == 2
    assert branch.F_perp.span_equal(_covspan(sys, ["z1", "z2", "z3"]))


def test_basic_sequence_single_step(brunovsky4):
    tree = run_algorithm1(brunovsky4)
    (branch,) = tree.branches
    assert branch.ranks == (2, 4)
    assert branch.tags == ("A",)
    assert branch.F.span_equal(branch.sequence[0])
    assert branch.F_perp.span_equal(_covspan(brunovsky4, ["z1", "z3"]))


def test_basic_sequence_stalls_without_drift(drift_free3):
    tree = run_algorithm1(drift_free3)
    (branch,) = tree.branches
    assert branch.status == "stalled"
    assert branch.ranks == (2,)
    assert branch.F is None and branch.F_perp is None
    assert extract_candidates(tree) == ()


# --- refined sequence -------------------------------------------------------------


def test_refined_forks_two_branches_vtol(vtol):
    sys = as_system(vtol, "vtol")
    tree = run_algorithm2(sys)
    assert tree.algorithm == 2
    assert [b.path for b in tree.branches] == [(0,), (1,)]
    for branch in tree.branches:
        assert branch.status == "reached-tangent-space"
        assert branch.tags == ("A", "C-i", "A")
        assert branch.ranks == (2, 3, 4, 6)
        assert branch.coranks == (1, 1, 2)
        step = branch.records[1]
        assert step.replaced is not None and step.replaced.rank == 3
        assert step.cauchy.rank == 0
        # membership condition degenerates to a1 * a2 = 0
        assert all(c.is_zero() for c in step.quad.c11)
        assert all(c.is_zero() for c in step.quad.c22)
        assert any(not c.is_zero() for c in step.quad.c12)
        sols = step.quad.solutions
        assert [(a.render(), b.render()) for a, b in sols] == [("1", "0"), ("0", "1")]
    # the admissible directions are the input fields themselves, in order
    assert tree.branches[0].records[1].vc == sys.g1
    assert tree.branches[1].records[1].vc == sys.g2


def test_refined_vtol_terminal_spans(vtol):
    sys = as_system(vtol, "vtol")
    ch = sys.chart
    first, second = run_algorithm2(sys).branches
    heading = CovectorField(
        ch,
        (ch.parse("cos(theta)"), ch.parse("sin(theta)"))
        + (ch.zero,) * 4,
    )
    span_a = Codistribution(
        ch, [differential(ch.sym("theta")), heading], sys.engine
    )
    span_b = Codistribution(
        ch,
        [
            differential(ch.parse("x - eps*sin(theta)")),
            differential(ch.parse("z + eps*cos(theta)")),
        ],
        sys.engine,
    )
    assert first.F_perp.span_equal(span_a)
    assert second.F_perp.span_equal(span_b)


def test_refined_single_branch_seven_state(seven_state):
    sys = as_system(seven_state, "seven")
    tree = run_algorithm2(sys)
    (branch,) = tree.branches
    assert branch.path == ()
    assert branch.status == "reached-tangent-space"
    assert branch.tags == ("A", "C-i", "C-i", "A")
    assert branch.ranks == (2, 3, 4, 5, 7)
    assert branch.coranks == (1, 1, 1, 2)
    first_c = branch.records[1]
    assert first_c.cauchy.rank == 1
    assert first_c.cauchy.contains_field(coordinate_field(sys.chart, "z7"))
    # both replacement steps admit exactly the second direction
    for rec in branch.records[1:3]:
        assert [(a.render(), b.render()) for a, b in rec.quad.solutions] == [("0", "1")]
    assert branch.F_perp.span_equal(_covspan(sys, ["z1", "z3"]))


def test_refined_closure_on_chained(chained5):
    sys = as_system(chained5, "chained5")
    tree = run_algorithm2(sys)
    (branch,) = tree.branches
    # the first member is already non-involutive with empty characteristic,
    # so one full closure jumps straight to the tangent space
    assert branch.tags == ("B",)
    assert branch.ranks == (2, 5)
    assert branch.F.rank == 0
    basic = run_algorithm1(sys).branches[0]
    stacked = Codistribution(
        sys.chart,
        list(branch.F_perp.covectors) + list(basic.F_perp.covectors),
        sys.engine,
    )
    # the basic sequence can only refine the refined one: F1-perp c F2-perp
    assert stacked.rank == branch.F_perp.rank


def test_refined_matches_basic_when_no_replacement_needed(brunovsky4):
    basic = run_algorithm1(brunovsky4).branches[0]
    refined = run_algorithm2(brunovsky4).branches[0]
    assert basic.tags == refined.tags == ("A",)
    assert basic.ranks == refined.ranks
    assert basic.F_perp.span_equal(refined.F_perp)


def test_refined_finds_chain_outputs_ecf8(ecf8):
    sys = as_system(ecf8, "ecf8")
    tree = run_algorithm2(sys)
    (branch,) = tree.branches
    assert branch.tags == ("A", "A", "C-i", "A")
    assert branch.ranks == (2, 4, 5, 6, 8)
    assert branch.F_perp.span_equal(_covspan(sys, ["z11", "z12"]))
    (leaf,) = extract_candidates(tree)
    (pair,) = leaf.pairs
    assert pair.passed
    assert [h.render() for h in pair.functions] == ["z11", "z12"]
    assert pair.verdict.candidate.K == (3, 3)


def test_refined_stalls_without_drift(drift_free3):
    tree = run_algorithm2(drift_free3)
    (branch,) = tree.branches
    assert branch.status == "stalled"
    assert branch.ranks == (2,)


def test_refined_closure_fork_adds_exploratory_branch(vtol):
    sys = as_system(vtol, "vtol")
    tree = run_algorithm2(sys, fork_closure=True)
    assert [b.path for b in tree.branches] == [(0,), (1,), (2,)]
    extra = tree.branches[2]
    assert extra.tags == ("A", "C-ii")
    assert extra.ranks == (2, 4, 6)


# --- extraction -------------------------------------------------------------------


def test_extract_vtol_pairs(vtol):
    sys = as_system(vtol, "vtol")
    leaves = extract_candidates(run_algorithm2(sys))
    assert [leaf.branch.path for leaf in leaves] == [(0,), (1,)]
    verdicts = {}
    for leaf in leaves:
        assert leaf.shortfall == 0
        (pair,) = leaf.pairs
        verdicts[leaf.branch.path] = pair
    assert not verdicts[(0,)].passed
    assert verdicts[(0,)].verdict.spans_states is False
    good = verdicts[(1,)]
    assert good.passed
    assert [h.render() for h in good.functions] == [
        "-eps*sin(theta) + x",
        "eps*cos(theta) + z",
    ]
    assert good.verdict.candidate.K == (2, 2)


def test_extract_seven_state_pair(seven_state):
    sys = as_system(seven_state, "seven")
    (leaf,) = extract_candidates(run_algorithm2(sys))
    (pair,) = leaf.pairs
    assert pair.passed
    assert [h.render() for h in pair.functions] == ["z1", "z3"]
    assert pair.verdict.candidate.K == (2, 2)
    assert pair.verdict.candidate.d == 3


def test_extract_functions_only_above_corank_two(chained5):
    sys = as_system(chained5, "chained5")
    (leaf,) = extract_candidates(run_algorithm1(sys))
    assert leaf.pairs == ()
    assert leaf.shortfall == 0
    assert [h.render() for h in leaf.functions] == ["z1", "z2", "z3"]
    assert len(leaf.basis) == 3


# --- candidate direction selection ------------------------------------------------


def test_lemma_candidates_vtol_window(vtol):
    sys = as_system(vtol, "vtol")
    d1 = span(sys.chart, (sys.g1, sys.g2), sys.engine)
    d2 = sum_spans(
        d1, [lie_bracket(sys.f, sys.g1), lie_bracket(sys.f, sys.g2)]
    )
    d0 = span(sys.chart, (), sys.engine)
    cands = lemma1_candidates(sys.f, d0, d1, d2, sys.g1, sys.g2)
    assert cands == [sys.g1, sys.g2]


def test_lemma_candidates_cap(seven_state):
    sys = as_system(seven_state, "seven")
    d1 = span(sys.chart, (sys.g1, sys.g2), sys.engine)
    d2 = sum_spans(
        d1, [lie_bracket(sys.f, sys.g1), lie_bracket(sys.f, sys.g2)]
    )
    d0 = span(sys.chart, (), sys.engine)
    cands = lemma1_candidates(sys.f, d0, d1, d2, sys.g1, sys.g2)
    assert len(cands) == 1
    assert cands[0] == sys.g2


def test_lemma_candidates_rejects_bad_corank(vtol):
    sys = as_system(vtol, "vtol")
    d1 = span(sys.chart, (sys.g1, sys.g2), sys.engine)
    d0 = span(sys.chart, (), sys.engine)
    with pytest.raises(AssumptionViolationError, match="corank-two chain"):
        lemma1_candidates(sys.f, d0, d1, d1, sys.g1, sys.g2)


def test_lemma_candidates_rejects_bad_generators(vtol):
    sys = as_system(vtol, "vtol")
    d1 = span(sys.chart, (sys.g1, sys.g2), sys.engine)
    d2 = sum_spans(
        d1, [lie_bracket(sys.f, sys.g1), lie_bracket(sys.f, sys.g2)]
    )
    d0 = span(sys.chart, (), sys.engine)
    doubled = sys.g1.scale(sys.chart.const(2))
    with pytest.raises(AssumptionViolationError, match="span"):
        lemma1_candidates(sys.f, d0, d1, d2, sys.g1, doubled)


def test_lemma_candidates_rejects_non_involutive_middle():
    chart = Chart(["z1", "z2", "z3", "z4"])
    engine = RankEngine(seed=6)
    g1 = field_from_dict(chart, {"z1": "1", "z2": "z3"})
    g2 = field_from_dict(chart, {"z3": "1"})
    d1 = span(chart, (g1, g2), engine)
    d2 = sum_spans(d1, [coordinate_field(chart, "z2"), coordinate_field(chart, "z4")])
    d0 = span(chart, (), engine)
    with pytest.raises(AssumptionViolationError, match="involutive"):
        lemma1_candidates(zero_field(chart), d0, d1, d2, g1, g2)


def test_membership_solver_paths():
    chart = Chart(["z1", "z2"])
    one, zero = chart.one, chart.zero
    z1 = chart.sym("z1")

    with pytest.raises(AssumptionViolationError, match="nondegenerate"):
        _solve_membership(chart, [(zero, zero, zero)])

    # 1 + t^2 has no admissible root and the second direction is blocked
    assert _solve_membership(chart, [(one, zero, one)]) == []

    # t^2 = z1^2 factors exactly; both signs survive, second direction blocked
    sols = _solve_membership(chart, [(-(z1 * z1), zero, one)])
    assert [(a.render(), b.render()) for a, b in sols] == [("1", "z1"), ("1", "-z1")]

    # a pure cross term admits t = 0 and the second direction
    sols = _solve_membership(chart, [(zero, one, zero)])
    assert [(a.render(), b.render()) for a, b in sols] == [("1", "0"), ("0", "1")]

    # rows with different roots only share the second direction
    sols = _solve_membership(chart, [(zero, one, zero), (one, one, zero)])
    assert [(a.render(), b.render()) for a, b in sols] == [("0", "1")]


# --- the characteristic direction in triangular coordinates ------------------------


def _random_triangular(trial: int, rng: random.Random):
    """A triangular-form instance (two 3-chains over a two-row coupled block)
    with the last two rows depending on their successor coordinate."""
    chart = Chart([f"z{i}" for i in range(1, 9)])
    names = chart.coordinates

    def rand_poly(pool):
        terms = ["%d" % rng.randint(1, 3)]
        for _ in range(rng.randint(1, 2)):
            a, b = rng.choice(pool), rng.choice(pool)
            terms.append("%d*%s*%s" % (rng.randint(1, 2), a, b))
        return " + ".join(terms)

    deep = trial % 2 == 0
    a6 = rand_poly(names[:6]) + " + %d*z7" % rng.randint(1, 2)
    a7 = rand_poly(names[:7]) + " + %d*z8" % rng.randint(1, 2)
    b7 = rand_poly(names[:7])
    if deep:
        a7 += " + %d*z7*z7" % rng.randint(1, 2)
    else:
        a7 += " + %d*z8*z8" % rng.randint(1, 2)
        if rng.random() < 0.4:
            b7 += " + z8"
    f = field_from_dict(
        chart,
        {"z1": "z2", "z2": "z3", "z4": "z5", "z5": "z6", "z6": a6, "z7": a7},
    )
    g1 = field_from_dict(chart, {"z3": "1", "z6": "1", "z7": b7})
    g2 = field_from_dict(chart, {"z8": "1"})
    return chart, f, g1, g2, RankEngine(seed=1000 + trial)


def test_characteristic_direction_in_triangular_coordinates():
    """In triangular coordinates, once D_1 .. D_p are involutive and D_{p+1}
    is not, the coordinate direction d/dz^{n-(p-1)} has its double drift
    bracket inside D_{p+1} -- it is always an admissible candidate."""
    rng = random.Random(99)
    found = 0
    deep_cases = 0
    nonzero_brackets = 0
    trial = 0
    while found < 10 and trial < 80:
        trial += 1
        chart, f, g1, g2, engine = _random_triangular(trial, rng)
        seq = [span(chart, (g1, g2), engine)]
        p = None
        for i in range(1, 8):
            cur = seq[-1]
            if not cur.is_involutive():
                p = i - 1
                break
            grown = sum_spans(cur, [lie_bracket(f, b) for b in cur.basis()])
            if grown.rank == cur.rank or grown.rank == 8:
                break
            seq.append(grown)
        if p is None or not 1 <= p <= 2:
            continue
        found += 1
        deep_cases += p == 2
        candidate_dir = coordinate_field(chart, f"z{8 - (p - 1)}")
        double = lie_bracket(candidate_dir, lie_bracket(candidate_dir, f))
        nonzero_brackets += not double.is_zero()
        assert seq[-1].contains_field(double)
    assert found == 10
    assert deep_cases >= 2
    assert nonzero_brackets >= 2


# --- feedback invariance ----------------------------------------------------------


def _random_feedback(sys: ControlAffineSystem, rng: random.Random, pool):
    ch = sys.chart

    def poly():
        terms = ["%d" % rng.randint(-2, 2)]
        for _ in range(rng.randint(0, 2)):
            terms.append("%d*%s" % (rng.randint(-2, 2), rng.choice(pool)))
        return ch.parse(" + ".join(terms))

    alpha = (poly(), poly())
    if rng.random() < 0.5:
        beta = ((ch.one, poly()), (ch.zero, ch.one))
    else:
        beta = ((poly(), ch.one), (ch.one, ch.zero))
    return apply_static_feedback(sys, alpha, beta)


@pytest.mark.parametrize("trial", range(3))
def test_refined_tree_is_feedback_invariant(vtol, trial):
    sys = as_system(vtol, "vtol")
    base = run_algorithm2(sys)
    rng = random.Random(300 + trial)
    fed = run_algorithm2(_random_feedback(sys, rng, ["x", "z", "vx", "vz"]))
    assert len(fed.branches) == len(base.branches)
    assert sorted(b.tags for b in fed.branches) == sorted(b.tags for b in base.branches)
    # branches may trade places; terminal spans must match one-for-one
    remaining = list(fed.branches)
    for b in base.branches:
        hits = [i for i, c in enumerate(remaining) if b.F_perp.span_equal(c.F_perp)]
        assert hits, f"no feedback branch matches {b.path}"
        remaining.pop(hits[0])


@pytest.mark.parametrize("trial", range(3))
def test_basic_sequence_is_feedback_invariant(seven_state, trial):
    sys = as_system(seven_state, "seven")
    base = run_algorithm1(sys).branches[0]
    rng = random.Random(500 + trial)
    fed = run_algorithm1(
        _random_feedback(sys, rng, list(sys.states[:5]))
    ).branches[0]
    assert fed.ranks == base.ranks
    assert fed.status == base.status
    for mine, theirs in zip(base.sequence, fed.sequence):
        assert mine.span_equal(theirs)
