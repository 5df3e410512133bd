"""JSON encoding with rationals as ``"p/q"`` strings.

:func:`dumps` output is canonical: parsing it and dumping again gives the
same bytes.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .errors import ParseError
from .exact import AffineForm, LinearConstraint, Rel
from .functions import INF, MaxAffine, NCFunction, Override, Quadratic
from .sets import CarvedPolyhedron, Cell, FGSet, Polyhedron, as_carved
from . import oracle as orc

_RAT = re.compile(r"-?\d+(/\d+)?")


def rat_str(q) -> str:
    return "inf" if q == INF else str(Fraction(q))


def parse_rat(s, where="value", allow_inf=False):
    if isinstance(s, bool):
        raise ParseError(f"{where}: expected a rational, got {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        if allow_inf and s == "inf":
            return INF
        if _RAT.fullmatch(s):
            try:
                return Fraction(s)
            except ZeroDivisionError:
                raise ParseError(f"{where}: zero denominator in {s!r}") from None
        raise ParseError(f"{where}: {s!r} is not a rational of the form p or p/q")
    raise ParseError(f"{where}: expected a rational string, got {type(s).__name__}")


def parse_vec(v, where="vector", dim=None):
    if not isinstance(v, list):
        raise ParseError(f"{where}: expected a list")
    out = tuple(parse_rat(t, f"{where}[{i}]") for i, t in enumerate(v))
    if dim is not None and len(out) != dim:
        raise ParseError(f"{where}: expected {dim} entries, got {len(out)}")
    return out


def _get(d, key, where):
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in d:
        raise ParseError(f"{where}: missing key {key!r}")
    return d[key]


# ---------------------------------------------------------------------------
# encoding


def enc_vec(v):
    return [rat_str(t) for t in v]


def enc_constraint(c: LinearConstraint):
    return {"a": enc_vec(c.form.coeffs), "b": rat_str(-c.form.const), "rel": c.rel.value}


def enc_rows(rows):
    return [enc_constraint(c) for c in rows]


def enc_set(s):
    s = as_carved(s)
    return {"hull": enc_rows(s.hull.constraints), "removed": [enc_rows(c.constraints) for c in s.removed]}


def enc_base(base):
    if isinstance(base, MaxAffine):
        return {"kind": "maxaffine", "pieces": [{"a": enc_vec(p.coeffs), "b": rat_str(p.const)} for p in base.pieces]}
    return {"kind": "quadratic", "Q": [enc_vec(r) for r in base.Q], "b": enc_vec(base.b), "c": rat_str(base.c)}


def enc_function(f: NCFunction):
    return {
        "base": enc_base(f.base),
        "domain": "full" if f.domain.is_full else enc_set(f.domain),
        "overrides": [{"cell": enc_rows(o.cell.constraints), "value": rat_str(o.value)} for o in f.overrides],
    }


def enc_fgset(S: FGSet):
    return {"points": [enc_vec(p) for p in S.points], "rays": [enc_vec(r) for r in S.rays]}


def enc_problem(p):
    from .kkt import ConstrainedProblem

    if isinstance(p, ConstrainedProblem):
        d = {
            "dimension": p.dim,
            "objective": enc_function(p.objective),
            "geometric_set": enc_set(p.geometric_set),
            "functional_constraints": [enc_function(g) for g in p.constraints],
        }
        if p.slater_hint is not None:
            d["slater_hint"] = enc_vec(p.slater_hint)
        return d
    return {"dimension": p.dim, "objective": enc_function(p.objective), "feasible_set": enc_set(p.feasible_set)}


def enc_oracle(s: orc.OracleSet):
    if isinstance(s, orc.HalfSpace):
        return {"kind": "halfspace", "a": enc_vec(s.a), "b": rat_str(s.b)}
    if isinstance(s, orc.Ball):
        return {"kind": "ball", "c": enc_vec(s.center), "r2": rat_str(s.r2), "closed": s.closed}
    if isinstance(s, orc.Rationals):
        return {"kind": "rationals", "dim": s.dim}
    if isinstance(s, orc.IntervalProduct):
        return {"kind": "intervals", "bounds": [[None if t is None else rat_str(t) for t in b] for b in s.bounds]}
    if isinstance(s, orc.Complement):
        return {"kind": "complement", "of": enc_oracle(s.inner)}
    if isinstance(s, orc.Union):
        return {"kind": "union", "parts": [enc_oracle(p) for p in s.parts]}
    if isinstance(s, orc.Intersection):
        return {"kind": "intersection", "parts": [enc_oracle(p) for p in s.parts]}
    if isinstance(s, orc.Product):
        return {"kind": "product", "parts": [enc_oracle(s.first), enc_oracle(s.second)]}
    if isinstance(s, orc.CarvedOracle):
        return {"kind": "carved", "dim": s.dim, "set": enc_set(s.omega)}
    raise TypeError(f"cannot encode {type(s).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------------------
# decoding

_RELS = {r.value: r for r in Rel}


def dec_constraint(d, dim, where="constraint"):
    a = parse_vec(_get(d, "a", where), f"{where}.a", dim)
    b = parse_rat(_get(d, "b", where), f"{where}.b")
    rel = _get(d, "rel", where)
    if rel not in _RELS:
        raise ParseError(f"{where}.rel: expected one of {sorted(_RELS)}, got {rel!r}")
    return LinearConstraint(AffineForm(a, -b), _RELS[rel])


def dec_rows(rows, dim, where):
    if not isinstance(rows, list):
        raise ParseError(f"{where}: expected a list of constraints")
    return [dec_constraint(r, dim, f"{where}[{i}]") for i, r in enumerate(rows)]


def dec_set(d, dim, where="set") -> CarvedPolyhedron:
    hull = [c for c in dec_rows(_get(d, "hull", where), dim, f"{where}.hull")]
    if any(c.rel is Rel.LT for c in hull):
        raise ParseError(f"{where}.hull: strict rows belong in removed cells")
    removed = d.get("removed", [])
    if not isinstance(removed, list):
        raise ParseError(f"{where}.removed: expected a list of cells")
    cells = tuple(Cell(dim, dec_rows(c, dim, f"{where}.removed[{i}]")) for i, c in enumerate(removed))
    return CarvedPolyhedron(Polyhedron(dim, hull), cells)


def dec_base(d, dim, where="base"):
    kind = _get(d, "kind", where)
    if kind == "maxaffine":
        pieces = _get(d, "pieces", where)
        if not isinstance(pieces, list) or not pieces:
            raise ParseError(f"{where}.pieces: expected a nonempty list")
        return MaxAffine(
            tuple(
                AffineForm(parse_vec(_get(p, "a", f"{where}.pieces[{i}]"), f"{where}.pieces[{i}].a", dim), parse_rat(_get(p, "b", f"{where}.pieces[{i}]")))
                for i, p in enumerate(pieces)
            )
        )
    if kind == "quadratic":
        Q = _get(d, "Q", where)
        if not isinstance(Q, list) or len(Q) != dim:
            raise ParseError(f"{where}.Q: expected {dim} rows")
        rows = [parse_vec(r, f"{where}.Q[{i}]", dim) for i, r in enumerate(Q)]
        try:
            return Quadratic(rows, parse_vec(_get(d, "b", where), f"{where}.b", dim), parse_rat(d.get("c", "0"), f"{where}.c"))
        except ValueError as e:
            raise ParseError(f"{where}: {e}") from None
    raise ParseError(f"{where}.kind: expected 'maxaffine' or 'quadratic', got {kind!r}")


def dec_function(d, dim, where="function") -> NCFunction:
    base = dec_base(_get(d, "base", where), dim, f"{where}.base")
    dom = d.get("domain", "full")
    domain = CarvedPolyhedron.full(dim) if dom == "full" else dec_set(dom, dim, f"{where}.domain")
    ovs = []
    for i, o in enumerate(d.get("overrides", [])):
        w = f"{where}.overrides[{i}]"
        ovs.append(Override(Cell(dim, dec_rows(_get(o, "cell", w), dim, f"{w}.cell")), parse_rat(_get(o, "value", w), f"{w}.value", allow_inf=True)))
    return NCFunction(base, domain, tuple(ovs))


def _dimension(d):
    n = _get(d, "dimension", "problem")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("problem.dimension: expected a positive integer")
    return n


def dec_problem(d):
    """A :class:`Problem` or, when ``geometric_set`` is present, a ``ConstrainedProblem``."""
    from .kkt import ConstrainedProblem
    from .opt import Problem

    n = _dimension(d)
    f = dec_function(_get(d, "objective", "problem"), n, "objective")
    if "geometric_set" in d:
        gs = d.get("functional_constraints", [])
        if not isinstance(gs, list):
            raise ParseError("functional_constraints: expected a list")
        g = [dec_function(x, n, f"functional_constraints[{i}]") for i, x in enumerate(gs)]
        hint = parse_vec(d["slater_hint"], "slater_hint", n) if d.get("slater_hint") is not None else None
        return ConstrainedProblem(f, dec_set(d["geometric_set"], n, "geometric_set"), tuple(g), hint)
    return Problem(f, dec_set(_get(d, "feasible_set", "problem"), n, "feasible_set"))


def dec_oracle(d, where="set") -> orc.OracleSet:
    kind = _get(d, "kind", where)
    if kind == "halfspace":
        return orc.HalfSpace(parse_vec(_get(d, "a", where), f"{where}.a"), parse_rat(_get(d, "b", where), f"{where}.b"))
    if kind == "ball":
        return orc.Ball(parse_vec(_get(d, "c", where), f"{where}.c"), parse_rat(_get(d, "r2", where), f"{where}.r2"), bool(d.get("closed", True)))
    if kind == "rationals":
        return orc.Rationals(int(d.get("dim", 1)))
    if kind == "intervals":
        return orc.IntervalProduct(tuple(tuple(None if t is None else parse_rat(t, f"{where}.bounds") for t in b) for b in _get(d, "bounds", where)))
    if kind == "complement":
        return orc.Complement(dec_oracle(_get(d, "of", where), f"{where}.of"))
    if kind in ("union", "intersection", "product"):
        parts = [dec_oracle(p, f"{where}.parts[{i}]") for i, p in enumerate(_get(d, "parts", where))]
        if kind == "product":
            if len(parts) != 2:
                raise ParseError(f"{where}.parts: a product takes two factors")
            return orc.Product(*parts)
        return (orc.Union if kind == "union" else orc.Intersection)(*parts)
    if kind == "carved":
        return orc.CarvedOracle(dec_set(_get(d, "set", where), int(_get(d, "dim", where)), f"{where}.set"))
    raise ParseError(f"{where}.kind: unknown oracle kind {kind!r}")


def loads(text: str):
    """Parse JSON, reporting syntax errors with line and column."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None


def load_problem(text: str):
    return dec_problem(loads(text))


def dump_problem(p) -> str:
    return dumps(enc_problem(p))


__all__ = [
    "dec_function",
    "dec_oracle",
    "dec_problem",
    "dec_set",
    "dump_problem",
    "dumps",
    "enc_fgset",
    "enc_function",
    "enc_oracle",
    "enc_problem",
    "enc_set",
    "load_problem",
    "loads",
    "parse_rat",
    "parse_vec",
    "rat_str",
]
