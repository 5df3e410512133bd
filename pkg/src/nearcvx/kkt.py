"""Problems with a geometric set and functional constraints ``g_i <= 0``.

Covers the generalized Slater condition, the closure of the constraint set,
normal cones of sublevel sets and KKT certificates for the associated
problem and, under value equalities, for the original one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DimensionMismatch,
    HypothesisViolated,
    InfeasiblePoint,
    PointNotInDomain,
    QuadraticConstraintError,
    UnsupportedShape,
)
from .exact import LinearConstraint, Rel, Status, fmt_vec, lp_strict_feasible, vec
from .functions import INF, LscFunction, MaxAffine, NCFunction, evaluate, is_in_ri_dom, lsc_hull, subdiff_lsc
from .opt import (
    DEFAULT_MAX_ACTIVE_SETS,
    AssociatedProblem,
    Problem,
    Regularity,
    SolveReport,
    solution_diffset,
    solve_associated,
    solve_original,
)
from .sets import (
    CarvedPolyhedron,
    FGSet,
    Polyhedron,
    as_carved,
    fg_cone,
    fg_sum,
    intersect_carved,
    member,
    minkowski_member,
    normal_cone,
    vertices,
)


@dataclass(frozen=True)
class ConstrainedProblem:
    """``min f(x)`` over ``x in omega0`` with ``g_i(x) <= 0`` for every ``i``."""

    objective: NCFunction
    geometric_set: CarvedPolyhedron
    constraints: tuple[NCFunction, ...] = ()
    slater_hint: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "geometric_set", as_carved(self.geometric_set))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.slater_hint is not None:
            object.__setattr__(self, "slater_hint", vec(self.slater_hint))
        n = self.objective.dim
        if self.geometric_set.dim != n or any(g.dim != n for g in self.constraints):
            raise DimensionMismatch("objective, geometric set and constraints must share a dimension")

    @property
    def dim(self) -> int:
        return self.objective.dim

    @property
    def polyhedral(self) -> bool:
        return all(isinstance(g.base, MaxAffine) for g in self.constraints)

    def closures(self) -> list[LscFunction]:
        return [lsc_hull(g) for g in self.constraints]


@dataclass(frozen=True)
class SlaterWitness:
    """``x0`` in ``ri omega0`` and every ``ri dom g_i`` with ``g_i(x0) < 0``."""

    x0: tuple[Fraction, ...]
    margins: tuple[Fraction, ...]
    in_ri_dom_f: bool
    holds: bool = True

    def __bool__(self):
        return True


@dataclass(frozen=True)
class SlaterRefutation:
    reason: str
    holds: bool = False

    def __bool__(self):
        return False


def _verify_slater_point(cp: ConstrainedProblem, x0, with_omega0: bool = True) -> SlaterWitness | SlaterRefutation:
    x0 = vec(x0)
    if len(x0) != cp.dim:
        raise DimensionMismatch("Slater hint has the wrong dimension")
    if with_omega0 and not cp.geometric_set.hull.ri_member(x0):
        return SlaterRefutation("hint is not in ri of the geometric set")
    margins = []
    for i, g in enumerate(cp.constraints):
        if not g.hull.ri_member(x0):
            return SlaterRefutation(f"hint is not in ri(dom g{i + 1})")
        v = evaluate(g, x0)
        if v == INF or v >= 0:
            return SlaterRefutation(f"g{i + 1}(hint) = {v} is not negative")
        margins.append(-v)
    return SlaterWitness(x0, tuple(margins), is_in_ri_dom(cp.objective, x0))


def _slater_rows(cp: ConstrainedProblem, with_omega0: bool) -> list[LinearConstraint]:
    rows = cp.geometric_set.hull.ri_constraints() if with_omega0 else []
    for g in cp.constraints:
        rows += g.hull.ri_constraints()
        rows += [LinearConstraint(p, Rel.LT) for p in g.base.pieces]
    return rows


def _slater(cp: ConstrainedProblem, hint, with_omega0: bool) -> SlaterWitness | SlaterRefutation:
    hint = cp.slater_hint if hint is None else hint
    checked = None
    if hint is not None:
        checked = _verify_slater_point(cp, hint, with_omega0)
        if checked or not cp.polyhedral:
            return checked
    if not cp.polyhedral:
        raise UnsupportedShape("quadratic-without-hint: Slater points of quadratic constraints must be supplied")
    rows = _slater_rows(cp, with_omega0)
    # prefer a witness that also lies in ri(dom f)
    for extra in (cp.objective.hull.ri_constraints(), []):
        res = lp_strict_feasible(rows + extra, cp.dim)
        if res.feasible:
            return _verify_slater_point(cp, res.witness, with_omega0)
    return checked or SlaterRefutation("no point of ri(omega0) is strictly feasible for every constraint")


def check_slater(cp: ConstrainedProblem, hint=None) -> SlaterWitness | SlaterRefutation:
    """Decide the generalized Slater condition.

    For max-affine constraints one strict-feasibility LP decides it.  With a
    quadratic constraint only a supplied hint is verified.  The witness
    reports separately whether ``x0`` also lies in ``ri dom f``, which the
    KKT theorem needs on top of the condition itself.
    """
    return _slater(cp, hint, with_omega0=True)


def _require_slater(cp: ConstrainedProblem, hint, with_omega0=True, need_f=False) -> SlaterWitness:
    w = _slater(cp, hint, with_omega0)
    if not w:
        raise HypothesisViolated("slater", w.reason)
    if need_f and not w.in_ri_dom_f:
        raise HypothesisViolated("slater", "no Slater point lies in ri(dom f)")
    return w


@dataclass(frozen=True)
class SublevelDescription:
    """``{x : gbar_i(x) <= 0 for all i}`` kept symbolic; membership only."""

    functions: tuple[LscFunction, ...]

    @property
    def dim(self) -> int:
        return self.functions[0].dim

    def contains(self, x) -> bool:
        x = vec(x)
        return all(g(x) <= 0 for g in self.functions)

    __contains__ = contains


def _omega1_rows(cp: ConstrainedProblem) -> list[LinearConstraint]:
    rows = []
    for g in cp.constraints:
        rows += [LinearConstraint(p, Rel.LE) for p in g.base.pieces]
        rows += list(g.hull.constraints)
    return rows


def closure_omega1(cp: ConstrainedProblem, hint=None) -> Polyhedron | SublevelDescription:
    """Closure of the constraint set, i.e. the sublevel set of the lsc hulls."""
    _require_slater(cp, hint, with_omega0=False)
    if not cp.constraints:
        return Polyhedron.full(cp.dim)
    if cp.polyhedral:
        return Polyhedron(cp.dim, _omega1_rows(cp))
    return SublevelDescription(tuple(cp.closures()))


def active_set(cp: ConstrainedProblem, x) -> tuple[int, ...]:
    x = vec(x)
    return tuple(i for i, g in enumerate(cp.closures()) if g(x) == 0)


def _check_continuity(cp: ConstrainedProblem, x) -> None:
    for i, g in enumerate(cp.constraints):
        if not (g.hull.is_full or g.hull.is_interior(x)):
            raise HypothesisViolated("continuity", f"gbar{i + 1} is not continuous at {fmt_vec(x)}")


def _closure_member(cp: ConstrainedProblem, x) -> bool:
    return all(g(x) <= 0 for g in cp.closures())


def normal_cone_sublevel(cp: ConstrainedProblem, x, hint=None) -> FGSet:
    """Normal cone to the closed constraint set: the sum of ``cone dgbar_i`` over active ``i``."""
    x = vec(x)
    if not _closure_member(cp, x):
        raise InfeasiblePoint(f"{fmt_vec(x)} violates a closed functional constraint")
    _check_continuity(cp, x)
    _require_slater(cp, hint, with_omega0=False)
    out = FGSet.zero(cp.dim)
    gbars = cp.closures()
    for i in active_set(cp, x):
        out = fg_sum(out, fg_cone(subdiff_lsc(gbars[i], x)))
    return out


@dataclass(frozen=True)
class KKTCertificate:
    """Exact multipliers with ``u + sum lambda_i s_i + n = 0``.

    ``u`` is a subgradient of the objective, ``s_i`` a subgradient of the
    ``i``-th constraint built from ``selections[i]`` (convex weights over
    the generators of its subdifferential) and ``n`` a normal vector to the
    geometric set.  ``lambdas`` has one entry per constraint and vanishes
    off the active set.
    """

    point: tuple[Fraction, ...]
    lambdas: tuple[Fraction, ...]
    active: tuple[int, ...]
    objective_subgradient: tuple[Fraction, ...]
    objective_weights: tuple[Fraction, ...]
    selections: dict = field(default_factory=dict)
    subgradients: dict = field(default_factory=dict)
    normal: tuple[Fraction, ...] = ()
    holds: bool = True

    def __bool__(self):
        return True

    def residual(self) -> tuple[Fraction, ...]:
        r = list(self.objective_subgradient)
        for i, s in self.subgradients.items():
            r = [a + self.lambdas[i] * b for a, b in zip(r, s)]
        return tuple(a + b for a, b in zip(r, self.normal))

    def verify(self, cp: ConstrainedProblem) -> bool:
        """Recheck every claim of the certificate with exact arithmetic."""
        x = self.point
        if any(l < 0 for l in self.lambdas):
            return False
        if any(self.lambdas[i] != 0 for i in range(len(self.lambdas)) if i not in self.active):
            return False
        gbars = cp.closures()
        if any(gbars[i](x) != 0 for i in self.active):
            return False
        for i, w in self.selections.items():
            gens = subdiff_lsc(gbars[i], x).points
            if any(t < 0 for t in w) or sum(w) != 1 or len(w) != len(gens):
                return False
            s = tuple(sum((t * g[d] for t, g in zip(w, gens)), Fraction(0)) for d in range(cp.dim))
            if s != self.subgradients[i]:
                return False
        if self.objective_subgradient not in subdiff_lsc(lsc_hull(cp.objective), x):
            return False
        if self.normal not in normal_cone(cp.geometric_set.hull, x):
            return False
        return all(r == 0 for r in self.residual())


@dataclass(frozen=True)
class KKTRefutation:
    point: tuple[Fraction, ...]
    active: tuple[int, ...]
    reason: str
    holds: bool = False

    def __bool__(self):
        return False


def kkt_certify_associated(cp: ConstrainedProblem, x, hint=None) -> KKTCertificate | KKTRefutation:
    """Search for KKT multipliers of the associated problem at ``x``.

    Under the Slater condition with a point of ``ri dom f`` and continuity
    of the constraint hulls at ``x``, a certificate exists iff ``x`` solves
    the associated problem.  The LP minimises the multipliers, so inactive
    structure never inflates them.
    """
    x = vec(x)
    if not cp.geometric_set.hull.contains(x) or not _closure_member(cp, x):
        raise InfeasiblePoint(f"{fmt_vec(x)} is not in the closure of the feasible set")
    _require_slater(cp, hint, need_f=True)
    _check_continuity(cp, x)
    fbar = lsc_hull(cp.objective)
    if fbar(x) == INF:
        raise PointNotInDomain(f"the lsc hull of f is +inf at {fmt_vec(x)}")
    gbars = cp.closures()
    I = active_set(cp, x)
    fsd = subdiff_lsc(fbar, x)
    gsd = {i: subdiff_lsc(gbars[i], x) for i in I}
    cones = [FGSet.cone(cp.dim, gsd[i].points) for i in I]
    N = normal_cone(cp.geometric_set.hull, x)
    sets = [fsd] + cones + [N]
    dec = minkowski_member(sets, (0,) * cp.dim, [False] + [True] * len(I) + [False])
    if dec is None:
        return KKTRefutation(x, I, "0 is not in df(x) + sum cone dg_i(x) + N(x)")
    lambdas = [Fraction(0)] * len(cp.constraints)
    selections, subgradients = {}, {}
    for k, i in enumerate(I):
        # cone generators of FGSet.cone drop zero vectors; map weights back
        gens = gsd[i].points
        rays = cones[k].rays
        raw = [dec.ray_weights[k + 1][rays.index(g)] if g in rays else Fraction(0) for g in gens]
        lam = sum(raw, Fraction(0))
        lambdas[i] = lam
        if lam:
            w = tuple(t / lam for t in raw)
        else:
            w = tuple(Fraction(int(j == 0)) for j in range(len(gens)))
        selections[i] = w
        subgradients[i] = tuple(sum((t * g[d] for t, g in zip(w, gens)), Fraction(0)) for d in range(cp.dim))
    return KKTCertificate(
        x,
        tuple(lambdas),
        I,
        dec.elements[0],
        dec.point_weights[0],
        selections,
        subgradients,
        dec.elements[-1],
    )


@dataclass(frozen=True)
class TransferReport:
    """KKT at a point of the original problem.

    ``necessary`` is the direction "solution implies multipliers": a
    refutation proves ``x`` is not a solution.  ``in_S`` is only decided
    when ``x`` lies in ``ri dom f``, where the converse direction applies.
    """

    outcome: KKTCertificate | KKTRefutation
    sufficiency_applies: bool
    in_S: bool | None


def kkt_transfer_original(cp: ConstrainedProblem, x, hint=None) -> TransferReport:
    """Lagrange multiplier rule for the original problem at ``x``.

    The rule is read as "if ``x`` is a solution then multipliers exist";
    the converse is reported only when ``x`` is in ``ri dom f``.
    """
    x = vec(x)
    if not member(cp.geometric_set, x):
        raise InfeasiblePoint(f"{fmt_vec(x)} is not in the geometric set")
    for i, g in enumerate(cp.constraints):
        v = evaluate(g, x)
        if v == INF or v > 0:
            raise InfeasiblePoint(f"{fmt_vec(x)} violates constraint g{i + 1}")
    fx = evaluate(cp.objective, x)
    if fx == INF:
        raise PointNotInDomain(f"f is +inf at {fmt_vec(x)}")
    if lsc_hull(cp.objective)(x) != fx:
        raise HypothesisViolated("f-closure-equality", f"fbar(x) != f(x) at {fmt_vec(x)}")
    for i, (g, gb) in enumerate(zip(cp.constraints, cp.closures())):
        if gb(x) != evaluate(g, x):
            raise HypothesisViolated(f"g{i + 1}-closure-equality", f"gbar{i + 1}(x) != g{i + 1}(x) at {fmt_vec(x)}")
    outcome = kkt_certify_associated(cp, x, hint)
    suff = is_in_ri_dom(cp.objective, x)
    if not outcome:
        in_S = False
    else:
        in_S = True if suff else None
    return TransferReport(outcome, suff, in_S)


def _omega1_carved(cp: ConstrainedProblem) -> CarvedPolyhedron:
    hull = closure_omega1(cp)
    cells = []
    for g in cp.constraints:
        cells += list(g.domain.removed)
        cells += [o.cell for o in g.overrides if o.value == INF or o.value > 0]
    removed = []
    for c in cells:
        c = c.restrict(hull.constraints)
        if c not in removed and not c.is_empty():
            removed.append(c)
    return CarvedPolyhedron(hull, tuple(removed))


def assemble_feasible_set(cp: ConstrainedProblem, hint=None) -> CarvedPolyhedron:
    """``omega0`` intersected with the carved constraint set (max-affine constraints only)."""
    if not cp.polyhedral:
        raise QuadraticConstraintError("quadratic-constraint: use kkt_certify_associated for quadratic constraints")
    _require_slater(cp, hint)
    if not cp.constraints:
        return cp.geometric_set
    return intersect_carved(cp.geometric_set, _omega1_carved(cp))


def solve_constrained(cp: ConstrainedProblem, hint=None, max_active_sets: int = DEFAULT_MAX_ACTIVE_SETS) -> SolveReport:
    """Solve a constrained problem exactly.

    Max-affine constraints are folded into the feasible set.  With quadratic
    constraints the problem is relaxed to the geometric set; the relaxed
    solution set is kept when every one of its vertices satisfies the
    closed constraints (a convex function bounded on the vertices of a
    polytope is bounded on all of it).
    """
    if cp.polyhedral:
        return solve_original(Problem(cp.objective, assemble_feasible_set(cp, hint)), max_active_sets)
    w = _require_slater(cp, hint, need_f=True)
    ap = AssociatedProblem(lsc_hull(cp.objective), cp.geometric_set.hull)
    sol = solve_associated(ap, max_active_sets)
    if sol.status is not Status.OPTIMAL:
        raise QuadraticConstraintError("quadratic-constraint: the relaxed problem has no optimal solution")
    try:
        corners = vertices(sol.solutions)
    except UnsupportedShape:
        raise QuadraticConstraintError("quadratic-constraint: the relaxed solution set is unbounded") from None
    gbars = cp.closures()
    if not all(g(v) <= 0 for v in corners for g in gbars):
        raise QuadraticConstraintError("quadratic-constraint: the constraints cut the relaxed solution set")
    cells = list(cp.geometric_set.removed) + list(cp.objective.domain.removed)
    cells += [o.cell for o in cp.objective.overrides]
    for g in cp.constraints:
        cells += list(g.domain.removed)
        cells += [o.cell for o in g.overrides if o.value == INF or o.value > 0]
    S = solution_diffset(sol.solutions, cells)
    return SolveReport(Status.OPTIMAL, sol.value, sol.value, sol.solutions, S, Regularity(True, w.x0))


__all__ = [
    "ConstrainedProblem",
    "KKTCertificate",
    "KKTRefutation",
    "SlaterRefutation",
    "SlaterWitness",
    "SublevelDescription",
    "TransferReport",
    "active_set",
    "assemble_feasible_set",
    "check_slater",
    "closure_omega1",
    "kkt_certify_associated",
    "kkt_transfer_original",
    "normal_cone_sublevel",
    "solve_constrained",
]
