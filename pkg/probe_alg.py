import sys as _s
_s.path.insert(0, "src")
_s.path.insert(0, "tests")
from conftest import *  # noqa
from flatkit import *  # noqa
from flatkit.expr import Chart
from flatkit.linalg import RankEngine
from flatkit.fields import field_from_dict

import conftest as C


def mk(fix_fn, name):
    plant = fix_fn()
    return C.as_system(plant, name)


def _fields(chart, fd, g1d, g2d):
    return (
        field_from_dict(chart, {k: chart.parse(v) for k, v in fd.items()}),
        field_from_dict(chart, {k: chart.parse(v) for k, v in g1d.items()}),
        field_from_dict(chart, {k: chart.parse(v) for k, v in g2d.items()}),
    )


# --- rebuild fixtures by hand (conftest fixtures are pytest-bound) ---
def vtol():
    chart = Chart(["x", "z", "theta", "vx", "vz", "omega"], parameters=["eps"])
    f, g1, g2 = _fields(chart,
        {"x": "vx", "z": "vz", "theta": "omega", "vz": "-1"},
        {"vx": "-sin(theta)", "vz": "cos(theta)"},
        {"vx": "eps*cos(theta)", "vz": "eps*sin(theta)", "omega": "1"})
    eng = RankEngine(seed=7, constraints=(chart.parse("eps"),))
    return ControlAffineSystem(chart, ("u1", "u2"), f, g1, g2, eng, "vtol")


def seven_state():
    chart = Chart([f"z{i}" for i in range(1, 8)])
    f, g1, g2 = _fields(chart,
        {"z1": "z2", "z3": "z4", "z4": "z5", "z5": "z6", "z6": "z7"},
        {"z2": "1", "z4": "z5", "z5": "z2"},
        {"z7": "1"})
    return ControlAffineSystem(chart, ("u1", "u2"), f, g1, g2, RankEngine(seed=11), "seven")


def chained5():
    chart = Chart([f"z{i}" for i in range(1, 6)])
    f, g1, g2 = _fields(chart, {},
        {"z1": "1", "z2": "z3", "z3": "z4", "z4": "z5"},
        {"z5": "1"})
    return ControlAffineSystem(chart, ("u1", "u2"), f, g1, g2, RankEngine(seed=3), "chained5")


def brunovsky4():
    chart = Chart(["z1", "z2", "z3", "z4"])
    f, g1, g2 = _fields(chart, {"z1": "z2", "z3": "z4"}, {"z2": "1"}, {"z4": "1"})
    return ControlAffineSystem(chart, ("u1", "u2"), f, g1, g2, RankEngine(seed=5), "bru4")


def show(tree, label):
    print(f"== {label} (alg {tree.algorithm}) ==")
    for b in tree.branches:
        print(f"  path={b.path} status={b.status} ranks={b.ranks} coranks={b.coranks} tags={b.tags}")
        if b.F is not None:
            print(f"    F rank={b.F.rank}  F_perp rank={b.F_perp.rank}")
            print(f"    F_perp covs: {[w.render() for w in b.F_perp.covectors]}")
        for rec in b.records:
            extra = ""
            if rec.quad is not None:
                extra = f" sols={[(a.render(), bb.render()) for a, bb in rec.quad.solutions]}"
            if rec.vc is not None:
                extra += f" vc={rec.vc.render()}"
            if rec.cauchy is not None:
                extra += f" cauchy_rank={rec.cauchy.rank}"
            print(f"    step {rec.index} {rec.tag} examined_rank={rec.examined.rank} produced_rank={rec.produced.rank}"
                  + (f" replaced_rank={rec.replaced.rank}" if rec.replaced is not None else "") + extra)


v = vtol()
t1 = run_algorithm1(v)
show(t1, "vtol alg1")
t2 = run_algorithm2(v)
show(t2, "vtol alg2")
for lc in extract_candidates(t2):
    print("  leaf", lc.branch.path, "functions:", [h.render() for h in lc.functions], "shortfall:", lc.shortfall)
    for p in lc.pairs:
        print("    pair:", [h.render() for h in p.functions], "passed:", p.passed, "reason:", p.reason)

s7 = seven_state()
t7 = run_algorithm2(s7)
show(t7, "seven alg2")
for lc in extract_candidates(t7):
    print("  leaf", lc.branch.path, "functions:", [h.render() for h in lc.functions], "shortfall:", lc.shortfall)
    for p in lc.pairs:
        print("    pair:", [h.render() for h in p.functions], "passed:", p.passed, "reason:", p.reason)

c5 = chained5()
tc1 = run_algorithm1(c5)
show(tc1, "chained5 alg1")
tc2 = run_algorithm2(c5)
show(tc2, "chained5 alg2")

b4 = brunovsky4()
tb1 = run_algorithm1(b4)
show(tb1, "bru4 alg1")
tb2 = run_algorithm2(b4)
show(tb2, "bru4 alg2")
for lc in extract_candidates(tb2):
    print("  leaf functions:", [h.render() for h in lc.functions])
    for p in lc.pairs:
        print("    pair:", [h.render() for h in p.functions], "passed:", p.passed)
