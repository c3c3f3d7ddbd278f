import sys as _s, random
_s.path.insert(0, "src")
from flatkit import *  # noqa
from flatkit.expr import Chart
from flatkit.linalg import RankEngine
from flatkit.fields import field_from_dict, lie_bracket, coordinate_field
from flatkit.distributions import span, sum_spans, cauchy_characteristic
from flatkit.algorithms import lemma1_candidates, run_algorithm2, extract_candidates
from flatkit.errors import AssumptionViolationError


def _fields(chart, fd, g1d, g2d):
    return (
        field_from_dict(chart, {k: chart.parse(v) for k, v in fd.items()}),
        field_from_dict(chart, {k: chart.parse(v) for k, v in g1d.items()}),
        field_from_dict(chart, {k: chart.parse(v) for k, v in g2d.items()}),
    )


def vtol():
    chart = Chart(["x", "z", "theta", "vx", "vz", "omega"], parameters=["eps"])
    f, g1, g2 = _fields(chart,
        {"x": "vx", "z": "vz", "theta": "omega", "vz": "-1"},
        {"vx": "-sin(theta)", "vz": "cos(theta)"},
        {"vx": "eps*cos(theta)", "vz": "eps*sin(theta)", "omega": "1"})
    eng = RankEngine(seed=7, constraints=(chart.parse("eps"),))
    return ControlAffineSystem(chart, ("u1", "u2"), f, g1, g2, eng, "vtol")


# --- public lemma1_candidates on the VTOL window ---
v = vtol()
ch, eng = v.chart, v.engine
d1 = span(ch, (v.g1, v.g2), eng)
d2 = sum_spans(d1, [lie_bracket(v.f, v.g1), lie_bracket(v.f, v.g2)])
d0 = span(ch, (), eng)
cands = lemma1_candidates(v.f, d0, d1, d2, v.g1, v.g2)
print("vtol candidates:", [c.render() for c in cands])

# violation: d1 not involutive (use chained-like window)
try:
    lemma1_candidates(v.f, d0, d2, d2, v.g1, v.g2)
except AssumptionViolationError as e:
    print("violation:", e)

# violation: wrong v1,v2 span
try:
    lemma1_candidates(v.f, d0, d1, d2, v.g1, v.g1.scale(ch.parse("2")))
except AssumptionViolationError as e:
    print("violation2:", e)

# --- fork_closure on VTOL ---
t = run_algorithm2(v, fork_closure=True)
for b in t.branches:
    print("fork_closure branch", b.path, b.status, b.ranks, b.tags)

# --- Lemma-2 oracle: random triangular-form instances n=8, k1=k2=3 ---
rng = random.Random(99)

def rand_poly(chart, names, rng, deg=2):
    # small random polynomial in the given coordinates
    terms = ["%d" % rng.randint(1, 3)]
    for _ in range(rng.randint(1, 2)):
        a, b = rng.choice(names), rng.choice(names)
        terms.append("%d*%s*%s" % (rng.randint(1, 2), a, b))
    return " + ".join(terms)

found = 0
trial = 0
while found < 10 and trial < 60:
    trial += 1
    chart = Chart([f"z{i}" for i in range(1, 9)])
    names = chart.coordinates
    # chain rows: z1..z3 first chain (v1 at z3), z4..z6,z7 tail, z8 driven by v2
    a6 = rand_poly(chart, names[:6], rng) + " + %d*z7" % rng.randint(1, 2)
    if rng.random() < 0.7:
        a6 += " + %d*z7*%s" % (rng.randint(1, 2), rng.choice(names[:7]))
    a7 = rand_poly(chart, names[:7], rng) + " + %d*z8" % rng.randint(1, 2)
    if rng.random() < 0.7:
        a7 += " + %d*z8*%s" % (rng.randint(1, 2), rng.choice(names[:8]))
    b7 = rand_poly(chart, names[:7], rng)
    if rng.random() < 0.4:
        b7 += " + z8"
    f, g1, g2 = _fields(chart,
        {"z1": "z2", "z2": "z3", "z4": "z5", "z5": "z6", "z6": a6, "z7": a7},
        {"z3": "1", "z6": "1", "z7": b7},
        {"z8": "1"})
    sys2 = ControlAffineSystem(chart, ("u1", "u2"), f, g1, g2, RankEngine(seed=1000 + trial), f"gtf{trial}")
    # iterate D_{i+1} = D_i + [f, D_i] until non-involutive
    seq = [span(chart, (g1, g2), RankEngine(seed=1000 + trial))]
    p = None
    for i in range(1, 8):
        cur = seq[-1]
        if not cur.is_involutive():
            p = i - 1
            break
        nxt = sum_spans(cur, [lie_bracket(f, bb) for bb in cur.basis()])
        if nxt.rank == cur.rank or nxt.rank == 8:
            break
        seq.append(nxt)
    if p is None or p < 1 or p > 2:
        continue
    found += 1
    dp1 = seq[-1]
    vc = coordinate_field(chart, f"z{8 - (p - 1)}")
    dbl = lie_bracket(vc, lie_bracket(vc, f))
    ok = dp1.contains_field(dbl)
    print(f"trial {trial}: p={p} ranks={[d.rank for d in seq]} vc=d/dz{8-(p-1)} contained={ok} dbl_zero={dbl.is_zero()}")

print("found", found, "in", trial, "trials")
