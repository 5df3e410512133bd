"""Regression run over the bundled example corpus.

Every record compares an expected outcome transcribed from the source
examples with what the library computes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .exact import box, eq, fmt_vec, vec
from .kkt import ConstrainedProblem, check_slater, kkt_certify_associated, solve_constrained
from .opt import (
    Classification,
    Problem,
    associate,
    check_regularity,
    classify_point,
    fermat_check,
    local_global_check,
    solve_associated,
    solve_original,
)
from .oracle import FoundWitness, GridSpec, grid_min, ho_witness_test
from .serialize import dec_oracle, load_problem, parse_vec
from .sets import Polyhedron

F = Fraction
CORPUS = "corpus"


def corpus_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__package__).joinpath(CORPUS).iterdir() if p.name.endswith(".json"))


def corpus_text(name: str) -> str:
    return resources.files(__package__).joinpath(CORPUS).joinpath(f"{name}.json").read_text(encoding="utf-8")


def load_example(name: str) -> Problem | ConstrainedProblem:
    return load_problem(corpus_text(name))


def ho_examples() -> list[dict]:
    out = []
    for d in json.loads(corpus_text("ho_examples")):
        out.append({"name": d["name"], "set": dec_oracle(d["set"]), "x": parse_vec(d["x"]), "y": parse_vec(d["y"])})
    return out


@dataclass
class Record:
    name: str
    expected: str
    computed: str
    match: bool


@dataclass
class ReproReport:
    records: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.match for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def add(self, name, expected, computed, match):
        self.records.append(Record(name, str(expected), str(computed), bool(match)))


def _fmt_points(pts):
    return "{" + ", ".join("(" + ",".join(str(t) for t in p) + ")" for p in pts) + "}"


def _membership(report: ReproReport, name: str, S, truth: dict):
    got = {p: S.contains(p) for p in truth}
    bad = [p for p in truth if got[p] != truth[p]]
    inside = [p for p in truth if truth[p]]
    report.add(name, f"S holds exactly {_fmt_points(inside)} of the probes", f"mismatches at {_fmt_points(bad)}" if bad else "all probes agree", not bad)


def _ho(report: ReproReport):
    expected = {"ex2_1": None, "ex2_2": None, "ex2_3": F(1, 2), "ex2_4": F(1, 8), "ex2_5": F(1, 8)}
    for ex in ho_examples():
        r = ho_witness_test(ex["set"], ex["x"], ex["y"], 30)
        want = expected[ex["name"]]
        want_s = "NoneUpTo(30)" if want is None else f"FoundWitness({want})"
        got_s = f"FoundWitness({r.t})" if isinstance(r, FoundWitness) else f"NoneUpTo({r.K})"
        report.add(f"{ex['name']} Ho verdict", want_s, got_s, want_s == got_s)


def _ex3_1(report: ReproReport):
    p = load_example("ex3_1")
    r = solve_original(p)
    report.add("ex3_1 v", 0, r.value, r.value == 0)
    probes = [(0, 0), (0, F(1, 4)), (0, F(1, 5)), (0, F(3, 4)), (0, F(4, 5)), (0, 1), (F(1, 2), 0), (0, F(1, 2)), (1, 1)]
    truth = {vec(x): x[0] == 0 and (x[1] < F(1, 4) or x[1] > F(3, 4)) for x in probes}
    _membership(report, "ex3_1 S", r.S, truth)


def _ex3_2(report: ReproReport):
    p = load_example("ex3_2")
    r = solve_original(p)
    report.add("ex3_2 v", 0, r.value, r.value == 0)
    probes = [(0, 1), (0, -1), (0, 2), (0, -2), (0, 0), (0, F(1, 2))]
    truth = {vec(x): abs(x[1]) >= 1 for x in probes}
    _membership(report, "ex3_2 S", r.S, truth)
    S1 = Polyhedron(2, [eq((1, 0), 0)])
    report.add("ex3_2 S1", "{0} x R", r.S1, r.S1.equivalent(S1))


def _opt_vals(report: ReproReport):
    p = load_example("opt_vals")
    reg = check_regularity(p)
    report.add("opt_vals regularity", False, reg.holds, not reg.holds)
    g = grid_min(p.objective, p.feasible_set, GridSpec(((0, 1), (0, 1)), F(1, 128)))
    b = g.bracket
    report.add("opt_vals v (grid)", "1/6 in bracket, width <= 1/100", f"[{b.lo}, {b.hi}]", F(1, 6) in b and b.width <= F(1, 100))
    sol = solve_associated(associate(p))
    ok = sol.value == 0 and sol.solutions.contains((0, F(1, 2)))
    report.add("opt_vals vbar", "0 with (0,1/2) in S1", f"{sol.value}", ok)


def _ex3_4(report: ReproReport):
    p = load_example("ex3_4")
    c = classify_point(p, (0, 0))
    report.add("ex3_4 classify (0,0)", "AssociatedOnly", c.kind.value, c.kind is Classification.ASSOCIATED_ONLY)
    r = solve_original(p)
    report.add("ex4_2 S1", "[0,1]^2", r.S1, r.S1.equivalent(p.feasible_set.hull))
    probes = [(0, 1), (1, 0), (1, 1), (F(1, 2), F(1, 2)), (0, F(1, 3))]
    ok = all(fermat_check(p, x).holds for x in probes) and not fermat_check(p, (0, 0)).holds
    report.add("ex4_1 Fermat", "holds on D \\ {(0,0)}, fails at (0,0)", "agrees" if ok else "disagrees", ok)
    truth = {vec(x): True for x in probes}
    truth[vec((0, 0))] = False
    _membership(report, "ex4_1 S", r.S, truth)


def _local_global(report: ReproReport):
    p = load_example("opt_vals")
    rep = local_global_check(p, GridSpec(((0, 1), (0, 1)), F(1, 64)))
    want = [F(1, 6), F(1, 4)]
    ok = len(rep.clusters) == 2 and all(c.lo <= w <= c.hi for c, w in zip(rep.clusters, want))
    got = ", ".join(f"[{c.lo}, {c.hi}] near {_fmt_points([c.representative])}" for c in rep.clusters)
    report.add("local_global_sols clusters", "two, bracketing 1/6 and 1/4", got, ok)

    p2 = load_example("local_global_2")
    r = solve_original(p2)
    report.add("local_global_2 v", 0, r.value, r.value == 0)
    probes = {vec(x): x[0] > 0 for x in [(1, F(1, 2)), (F(1, 100), F(1, 2)), (0, F(1, 2))]}
    _membership(report, "local_global_2 S", r.S, probes)
    rep2 = local_global_check(p2, GridSpec(((0, 1), (0, 1)), F(1, 32)))
    ok = rep2.consistent and rep2.infinite_minima > 0
    report.add(
        "local_global_2 local minima",
        "finite ones global; +inf ones exist",
        f"{len(rep2.clusters)} finite clusters, {rep2.infinite_minima} +inf points",
        ok,
    )


def _worked(report: ReproReport):
    cp = load_example("worked_example")
    w = check_slater(cp)
    report.add("worked Slater", "witness (1/2,1/2)", fmt_vec(w.x0) if w else w.reason, bool(w) and w.x0 == (F(1, 2), F(1, 2)))
    lam_ok = []
    for x in [(F(1, 2), 0), (F(1, 2), F(1, 2)), (F(1, 2), 1)]:
        c = kkt_certify_associated(cp, x)
        lam_ok.append(bool(c) and all(l == 0 for l in c.lambdas) and c.verify(cp))
    fails = [not kkt_certify_associated(cp, x) for x in [(0, 0), (1, 1)]]
    report.add("worked KKT", "lambda=0 on {1/2}x{0,1/2,1}; fails at (0,0),(1,1)", f"{lam_ok} {fails}", all(lam_ok) and all(fails))
    r = solve_constrained(cp)
    report.add("worked vbar", F(-1, 4), r.value, r.value == F(-1, 4))
    S1 = Polyhedron(2, [eq((1, 0), F(1, 2))] + box([(0, 1), (0, 1)]))
    report.add("worked S1", "{1/2} x [0,1]", r.S1, r.S1.equivalent(S1))
    truth = {vec((F(1, 2), 0)): False, vec((F(1, 2), F(1, 100))): True, vec((F(1, 2), 1)): True}
    _membership(report, "worked S", r.S, truth)


STEPS = (_ho, _ex3_1, _ex3_2, _opt_vals, _ex3_4, _local_global, _worked)


def cmd_repro() -> ReproReport:
    report = ReproReport()
    for step in STEPS:
        step(report)
    return report


__all__ = ["Record", "ReproReport", "cmd_repro", "corpus_names", "corpus_text", "ho_examples", "load_example"]
