"""``nearcvx`` command line.

Exit codes: 0 success, 1 refutation or mismatch, 2 usage or parse error,
3 a required hypothesis does not hold.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DimensionMismatch, HypothesisViolated, NearCvxError, ParseError, UnsupportedShape
from .exact import AffineForm, Status, fmt, fmt_vec, lp_solve
from .functions import INF, lsc_hull, subdiff, subdiff_lsc, validate_function
from .kkt import (
    ConstrainedProblem,
    assemble_feasible_set,
    check_slater,
    kkt_certify_associated,
    kkt_transfer_original,
    solve_constrained,
)
from .opt import (
    Problem,
    associate,
    check_regularity,
    classify_point,
    fermat_check,
    fermat_check_associated,
    solve_associated,
    solve_original,
)
from .oracle import GridSpec, grid_liminf, grid_local_minima, grid_min, local_minimum_clusters
from .plot import render
from .repro import cmd_repro
from .serialize import enc_fgset, enc_rows, load_problem, parse_rat, rat_str
from .sets import normal_cone, validate_carved

# ---------------------------------------------------------------------------
# argument helpers


def parse_point(text: str, dim: int | None = None):
    parts = [t.strip() for t in text.split(",")] if text.strip() else []
    x = tuple(parse_rat(t, "point") for t in parts)
    if dim is not None and len(x) != dim:
        raise DimensionMismatch(f"point has {len(x)} coordinates, the problem has {dim}")
    return x


def parse_box(text: str):
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ParseError(f"grid box: expected lo:hi per coordinate, got {part!r}")
        out.append((parse_rat(lo.strip(), "grid box"), parse_rat(hi.strip(), "grid box")))
    return tuple(out)


def read_problem(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror}") from None
    return load_problem(text)


def as_plain(p) -> Problem:
    """A constrained file with max-affine constraints folds into a plain problem."""
    if isinstance(p, ConstrainedProblem):
        if p.constraints:
            return Problem(p.objective, assemble_feasible_set(p))
        return Problem(p.objective, p.geometric_set)
    return p


def as_constrained(p) -> ConstrainedProblem:
    if isinstance(p, ConstrainedProblem):
        return p
    return ConstrainedProblem(p.objective, p.feasible_set, ())


def _hull_box(p, dim):
    hull = p.feasible_set.hull if isinstance(p, Problem) else p.geometric_set.hull
    out = []
    for i in range(dim):
        e = AffineForm.coordinate(dim, i)
        lo, hi = lp_solve(e, hull.constraints, "min"), lp_solve(e, hull.constraints, "max")
        if not (lo.optimal and hi.optimal):
            raise UnsupportedShape("the feasible set is unbounded; pass --grid-box")
        out.append((lo.value, hi.value))
    return tuple(out)


def grid_spec(args, p) -> GridSpec:
    bx = parse_box(args.grid_box) if args.grid_box else _hull_box(p, p.dim)
    if len(bx) != p.dim:
        raise DimensionMismatch("grid box dimension differs from the problem")
    step = parse_rat(args.grid_step, "grid step") if args.grid_step else (max(hi - lo for lo, hi in bx) or 1) / 32
    try:
        return GridSpec(bx, step, args.levels, args.reach)
    except ValueError as e:
        raise ParseError(str(e)) from None


# ---------------------------------------------------------------------------
# output


class Out:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.data = {}
        self.lines = []

    def put(self, key, value, text=None):
        self.data[key] = value
        if text is not None:
            self.lines.append(text)

    def say(self, text):
        self.lines.append(text)

    def flush(self):
        if self.as_json:
            sys.stdout.write(json.dumps(self.data, indent=2) + "\n")
        else:
            sys.stdout.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _vec(v):
    return None if v is None else [rat_str(t) for t in v]


def _diffset(S):
    return {"base": enc_rows(S.base.constraints), "removed": [enc_rows(c.constraints) for c in S.removed]}


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, out: Out) -> int:
    p = read_problem(args.file)
    ok = True
    parts = [("objective", validate_function(p.objective))]
    if isinstance(p, ConstrainedProblem):
        parts.append(("geometric_set", validate_carved(p.geometric_set)))
        parts += [(f"g{i + 1}", validate_function(g)) for i, g in enumerate(p.constraints)]
    else:
        parts.append(("feasible_set", validate_carved(p.feasible_set)))
    report = {}
    for name, rep in parts:
        issues = [{"kind": i.kind, "message": i.message, "warning": i.is_warning} for i in rep.issues]
        report[name] = {"valid": rep.valid, "issues": issues}
        ok &= rep.valid
        out.say(f"{name}: {'valid' if rep.valid else 'INVALID'}")
        for i in issues:
            out.say(f"  {'warning' if i['warning'] else 'error'} [{i['kind']}] {i['message']}")
    out.put("valid", ok)
    out.put("parts", report)
    return 0 if ok else 1


def _report_solve(r, out: Out):
    out.put("status", r.status.value, f"status: {r.status.value}")
    if r.status is not Status.OPTIMAL:
        return 1
    out.put("value", rat_str(r.value), f"v = {fmt(r.value)}")
    out.put("associated_value", rat_str(r.associated_value), f"vbar = {fmt(r.associated_value)}")
    out.put("S1", enc_rows(r.S1.constraints), f"S1 = {r.S1}")
    out.put("S", _diffset(r.S), f"S = {r.S}")
    out.put("regularity", {"holds": r.regularity.holds, "witness": _vec(r.regularity.witness)})
    return 0


def cmd_solve(args, out: Out) -> int:
    p = read_problem(args.file)
    if isinstance(p, ConstrainedProblem):
        hint = parse_point(args.hint, p.dim) if args.hint else None
        r = solve_constrained(p, hint, args.max_active_sets)
    else:
        r = solve_original(p, args.max_active_sets)
    return _report_solve(r, out)


def cmd_solve_associated(args, out: Out) -> int:
    p = as_plain(read_problem(args.file))
    sol = solve_associated(associate(p), args.max_active_sets)
    out.put("status", sol.status.value, f"status: {sol.status.value}")
    if sol.status is not Status.OPTIMAL:
        return 1
    out.put("value", rat_str(sol.value), f"vbar = {fmt(sol.value)}")
    out.put("S1", enc_rows(sol.solutions.constraints), f"S1 = {sol.solutions}")
    out.put("minimizer", _vec(sol.minimizer), f"minimizer: {fmt_vec(sol.minimizer)}")
    return 0


def _report_fermat(cert, out: Out):
    out.put("holds", cert.holds, f"0 in subdifferential + normal cone: {'yes' if cert.holds else 'no'}")
    out.put("point", _vec(cert.point))
    if cert.holds:
        out.put("subgradient", _vec(cert.subgradient), f"subgradient: {fmt_vec(cert.subgradient)}")
        out.put("normal", _vec(cert.normal), f"normal: {fmt_vec(cert.normal)}")
    return 0 if cert.holds else 1


def cmd_fermat(args, out: Out) -> int:
    p = as_plain(read_problem(args.file))
    x = parse_point(args.point, p.dim)
    if args.associated:
        return _report_fermat(fermat_check_associated(associate(p), x), out)
    code = _report_fermat(fermat_check(p, x), out)
    c = classify_point(p, x)
    out.put("classification", c.kind.value, f"classification: {c.kind.value}")
    return code


def _report_kkt(c, out: Out):
    out.put("holds", c.holds, f"KKT: {'certified' if c.holds else 'refuted'}")
    out.put("point", _vec(c.point))
    out.put("active", list(c.active), f"active set: {[i + 1 for i in c.active]}")
    if not c.holds:
        out.put("reason", c.reason, f"reason: {c.reason}")
        return 1
    out.put("lambdas", _vec(c.lambdas), f"lambda = {fmt_vec(c.lambdas)}")
    out.put("objective_subgradient", _vec(c.objective_subgradient), f"objective subgradient: {fmt_vec(c.objective_subgradient)}")
    out.put("objective_weights", _vec(c.objective_weights))
    out.put("selections", {str(i + 1): _vec(w) for i, w in c.selections.items()})
    out.put("normal", _vec(c.normal), f"normal: {fmt_vec(c.normal)}")
    return 0


def cmd_kkt(args, out: Out) -> int:
    cp = as_constrained(read_problem(args.file))
    x = parse_point(args.point, cp.dim)
    hint = parse_point(args.hint, cp.dim) if args.hint else None
    if args.original:
        t = kkt_transfer_original(cp, x, hint)
        code = _report_kkt(t.outcome, out)
        out.put("sufficiency_applies", t.sufficiency_applies)
        verdict = {True: "yes", False: "no", None: "undecided"}[t.in_S]
        out.put("in_S", t.in_S, f"solution of the original problem: {verdict}")
        return code
    return _report_kkt(kkt_certify_associated(cp, x, hint), out)


def cmd_slater(args, out: Out) -> int:
    cp = as_constrained(read_problem(args.file))
    hint = parse_point(args.hint, cp.dim) if args.hint else None
    w = check_slater(cp, hint)
    out.put("holds", w.holds, f"Slater: {'holds' if w.holds else 'FAILED'}")
    if not w.holds:
        out.put("reason", w.reason, f"reason: {w.reason}")
        return 1
    out.put("x0", _vec(w.x0), f"x0 = {fmt_vec(w.x0)}")
    out.put("margins", _vec(w.margins), f"margins: {fmt_vec(w.margins)}")
    out.put("x0_in_ri_dom_f", w.in_ri_dom_f, f"x0 in ri(dom f): {'yes' if w.in_ri_dom_f else 'no'}")
    return 0


def cmd_regularity(args, out: Out) -> int:
    p = as_plain(read_problem(args.file))
    r = check_regularity(p)
    out.put("holds", r.holds, f"regularity: {'holds' if r.holds else 'FAILED'}")
    if r.holds:
        out.put("witness", _vec(r.witness), f"witness in ri D and ri(dom f): {fmt_vec(r.witness)}")
        return 0
    out.put("refutation", "ri D and ri(dom f) are disjoint", "refutation: ri D and ri(dom f) are disjoint (strict LP infeasible)")
    return 1


def cmd_lsc_hull(args, out: Out) -> int:
    p = read_problem(args.file)
    x = parse_point(args.point, p.dim)
    fbar = lsc_hull(p.objective)
    v, fx = fbar(x), p.objective(x)
    out.put("value", rat_str(v), f"fbar(x) = {fmt(v)}")
    out.put("f_value", rat_str(fx), f"f(x) = {fmt(fx)}")
    out.put("domain", enc_rows(fbar.domain.constraints), f"dom fbar = {fbar.domain}")
    return 0


def cmd_normal_cone(args, out: Out) -> int:
    p = as_plain(read_problem(args.file))
    x = parse_point(args.point, p.dim)
    N = normal_cone(p.feasible_set, x)
    out.put("normal_cone", enc_fgset(N), f"N(x; D) = {N}")
    return 0 if not N.is_empty else 1


def cmd_subdiff(args, out: Out) -> int:
    p = read_problem(args.file)
    x = parse_point(args.point, p.dim)
    S = subdiff_lsc(lsc_hull(p.objective), x) if args.lsc else subdiff(p.objective, x)
    out.put("subdifferential", enc_fgset(S), f"{'dfbar' if args.lsc else 'df'}(x) = {S}")
    return 0


def cmd_oracle(args, out: Out) -> int:
    p = as_plain(read_problem(args.file))
    spec = grid_spec(args, p)
    f, D = p.objective, p.feasible_set
    if args.mode == "min":
        r = grid_min(f, D, spec)
        out.put("bracket", [rat_str(r.bracket.lo), rat_str(r.bracket.hi)], f"min f over D in [{fmt(r.bracket.lo)}, {fmt(r.bracket.hi)}]")
        out.put("candidates", [_vec(c) for c in r.candidates], "argmin candidates: " + ", ".join(fmt_vec(c) for c in r.candidates))
    elif args.mode == "local-minima":
        minima = grid_local_minima(f, D, spec)
        finite = [m for m in minima if m.value != INF]
        clusters = local_minimum_clusters(finite, spec, f)
        out.put("clusters", [{"point": _vec(c.representative), "bracket": [rat_str(c.lo), rat_str(c.hi)], "size": len(c.points)} for c in clusters])
        for c in clusters:
            out.say(f"local minimum near {fmt_vec(c.representative)}: value in [{fmt(c.lo)}, {fmt(c.hi)}] ({len(c.points)} grid points)")
        out.put("infinite_minima", len(minima) - len(finite), f"+inf grid-local minima: {len(minima) - len(finite)}")
    else:
        if not args.point:
            raise ParseError("oracle liminf needs --point")
        y = parse_point(args.point, p.dim)
        r = grid_liminf(f, y, spec)
        b = r.bracket
        out.put("bracket", [rat_str(b.lo), rat_str(b.hi)], f"liminf f at {fmt_vec(y)} in [{fmt(b.lo)}, {fmt(b.hi)}]")
    return 0


def cmd_plot(args, out: Out) -> int:
    p = read_problem(args.file)
    if p.dim != 2:
        raise UnsupportedShape(f"unsupported-dimension: plots need n = 2, got {p.dim}")
    if isinstance(p, ConstrainedProblem):
        omega = assemble_feasible_set(p) if p.polyhedral else p.geometric_set
    else:
        omega = p.feasible_set
    try:
        if isinstance(p, ConstrainedProblem):
            S1 = solve_constrained(p).S1
        else:
            S1 = solve_associated(associate(p)).solutions
    except NearCvxError:
        S1 = None
    points = [parse_point(t, 2) for t in args.points or []]
    view = parse_box(args.grid_box) if args.grid_box else None
    Path(args.out).write_text(render(omega, S1, points, view, caption=Path(args.file).name), encoding="utf-8")
    out.put("written", args.out, f"wrote {args.out}")
    return 0


def cmd_repro_cli(args, out: Out) -> int:
    r = cmd_repro()
    rows = [{"name": x.name, "expected": x.expected, "computed": x.computed, "match": x.match} for x in r.records]
    out.put("records", rows)
    out.put("ok", r.ok)
    w = max(len(x.name) for x in r.records)
    for x in r.records:
        out.say(f"{'ok  ' if x.match else 'FAIL'} {x.name:<{w}}  expected: {x.expected}  computed: {x.computed}")
    out.say(f"{sum(x.match for x in r.records)}/{len(r.records)} examples match")
    return r.exit_code


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--grid-step", help="grid spacing, e.g. 1/64")
    common.add_argument("--grid-box", help="grid box lo:hi per coordinate, e.g. 0:1,0:1")
    common.add_argument("--levels", type=int, default=1, help="grid refinement levels")
    common.add_argument("--reach", type=int, default=1, help="neighbourhood radius in grid steps for local minima")
    common.add_argument("--hint", help="Slater point to verify, e.g. 1/2,1/2")
    common.add_argument("--max-active-sets", type=int, default=2**20, help="cap on active-set enumeration")

    ap = argparse.ArgumentParser(prog="nearcvx", description="Exact solver and certifier for nearly convex problems.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help, point=False):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        if name != "repro":
            sp.add_argument("file")
        if point:
            sp.add_argument("point", help="rational point, e.g. 1/2,0")
        return sp

    add("validate", cmd_validate, "check the structural invariants of a problem file")
    add("solve", cmd_solve, "solve the problem exactly (needs regularity)")
    add("solve-associated", cmd_solve_associated, "solve the associated convex problem")
    add("fermat", cmd_fermat, "Fermat rule at a point", point=True).add_argument(
        "--associated", action="store_true", help="use the associated problem"
    )
    add("kkt", cmd_kkt, "KKT certificate at a point", point=True).add_argument(
        "--original", action="store_true", help="transfer to the original problem"
    )
    add("slater", cmd_slater, "generalized Slater condition")
    add("regularity", cmd_regularity, "regularity condition ri D meets ri(dom f)")
    add("lsc-hull", cmd_lsc_hull, "value of the lsc hull at a point", point=True)
    add("normal-cone", cmd_normal_cone, "normal cone to the feasible set", point=True)
    add("subdiff", cmd_subdiff, "subdifferential of the objective", point=True).add_argument(
        "--lsc", action="store_true", help="subdifferential of the lsc hull"
    )
    o = add("oracle", cmd_oracle, "grid oracles")
    o.add_argument("mode", choices=["min", "local-minima", "liminf"])
    o.add_argument("--point", help="point for liminf")
    pl = add("plot", cmd_plot, "SVG picture of a planar problem")
    pl.add_argument("out")
    pl.add_argument("--points", nargs="*", help="points to mark")
    add("repro", cmd_repro_cli, "rerun every bundled example")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Out(args.json)
    try:
        code = args.fn(args, out)
    except NearCvxError as e:
        kind = e.name if isinstance(e, HypothesisViolated) else type(e).__name__
        if args.json:
            sys.stdout.write(json.dumps({"error": kind, "message": str(e)}, indent=2) + "\n")
        else:
            sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
