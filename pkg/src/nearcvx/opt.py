"""Nearly convex problems ``min f over D`` and their associated convex problems.

The associated problem minimises the lsc hull of ``f`` over the closure of
``D``.  Under the regularity condition ``ri D  meets  ri dom f`` both share
an optimal value, which is how :func:`solve_original` computes it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import (
    CapExceeded,
    DimensionMismatch,
    EmptySetError,
    HypothesisViolated,
    InfeasiblePoint,
    PointNotInDomain,
)
from .exact import (
    AffineForm,
    LinearConstraint,
    Rel,
    Status,
    check_caps,
    dot,
    eq,
    fmt_vec,
    is_feasible,
    le,
    lp_solve,
    lp_strict_feasible,
    vec,
)
from .functions import INF, LscFunction, MaxAffine, NCFunction, Quadratic, evaluate, is_in_ri_dom, lsc_hull, subdiff, subdiff_lsc
from .sets import (
    CarvedPolyhedron,
    Cell,
    Decomposition,
    FGSet,
    Polyhedron,
    as_carved,
    member,
    minkowski_member,
    normal_cone,
)

DEFAULT_MAX_ACTIVE_SETS = 2**20


@dataclass(frozen=True)
class Problem:
    """``min f(x)`` subject to ``x in D``."""

    objective: NCFunction
    feasible_set: CarvedPolyhedron

    def __post_init__(self):
        object.__setattr__(self, "feasible_set", as_carved(self.feasible_set))
        if self.objective.dim != self.feasible_set.dim:
            raise DimensionMismatch("objective and feasible set dimensions differ")

    @property
    def dim(self) -> int:
        return self.objective.dim


@dataclass(frozen=True)
class AssociatedProblem:
    """``min fbar(x)`` subject to ``x in cl D``."""

    objective: LscFunction
    feasible_set: Polyhedron

    @property
    def dim(self) -> int:
        return self.objective.dim


def associate(p: Problem) -> AssociatedProblem:
    return AssociatedProblem(lsc_hull(p.objective), p.feasible_set.hull)


@dataclass(frozen=True)
class Regularity:
    holds: bool
    witness: tuple[Fraction, ...] | None = None

    def __bool__(self):
        return self.holds


def check_regularity(p: Problem) -> Regularity:
    """Decide whether ``ri D`` and ``ri dom f`` intersect."""
    rows = p.feasible_set.hull.ri_constraints() + p.objective.hull.ri_constraints()
    res = lp_strict_feasible(rows, p.dim)
    return Regularity(res.feasible, res.witness)


def _require_regularity(p: Problem) -> Regularity:
    reg = check_regularity(p)
    if not reg.holds:
        raise HypothesisViolated("regularity", "ri D and ri(dom f) do not intersect")
    return reg


@dataclass(frozen=True)
class DiffSet:
    """A polyhedron minus cells; no convexity claim of any kind."""

    base: Polyhedron
    removed: tuple[Cell, ...] = ()

    def contains(self, x) -> bool:
        x = vec(x)
        return self.base.contains(x) and not any(c.contains(x) for c in self.removed)

    __contains__ = contains

    def __str__(self):
        s = str(self.base)
        for c in self.removed:
            s += f" \\ {c}"
        return s


@dataclass(frozen=True)
class AssociatedSolution:
    status: Status
    value: Fraction | None = None
    solutions: Polyhedron | None = None
    minimizer: tuple[Fraction, ...] | None = None


def _epigraph_solve(base: MaxAffine, P: Polyhedron) -> AssociatedSolution:
    n = P.dim
    rows = [c.pad(after=1) for c in P.constraints]
    t = AffineForm.coordinate(n + 1, n)
    rows += [LinearConstraint(p.pad(after=1) - t, Rel.LE) for p in base.pieces]
    res = lp_solve(t, rows)
    if res.status is Status.UNBOUNDED:
        return AssociatedSolution(Status.UNBOUNDED)
    v = res.value
    S1 = P.with_rows([LinearConstraint(p.shift(-v), Rel.LE) for p in base.pieces])
    return AssociatedSolution(Status.OPTIMAL, v, S1, res.witness[:n])


def _qp_unbounded(q: Quadratic, P: Polyhedron) -> bool:
    """A recession direction with ``Qd = 0`` and ``b.d < 0`` drives ``q`` to -inf."""
    n = P.dim
    rows = [LinearConstraint(AffineForm(c.form.coeffs), c.rel) for c in P.constraints]
    rows += [LinearConstraint(AffineForm(row), Rel.EQ) for row in q.Q if any(row)]
    rows.append(le(q.b, -1))
    return is_feasible(rows, n)


def _qp_solve(q: Quadratic, P: Polyhedron, max_active_sets: int) -> AssociatedSolution:
    n = P.dim
    if _qp_unbounded(q, P):
        return AssociatedSolution(Status.UNBOUNDED)
    les = [c for c in P.constraints if c.rel is Rel.LE]
    eqs = [c for c in P.constraints if c.rel is Rel.EQ]
    tried = 0
    # each active set W turns the KKT system of the convex QP into a linear
    # feasibility problem in (x, mu_W >= 0, nu free)
    for k in range(len(les) + 1):
        for W in combinations(range(len(les)), k):
            tried += 1
            if tried > max_active_sets:
                raise CapExceeded(f"active-set enumeration exceeded {max_active_sets} subsets")
            m = len(W) + len(eqs)
            N = n + m
            mults = [les[i].form.coeffs for i in W] + [c.form.coeffs for c in eqs]
            rows = []
            for d in range(n):
                coeffs = [2 * q.Q[d][j] for j in range(n)] + [a[d] for a in mults]
                rows.append(LinearConstraint(AffineForm(coeffs, q.b[d]), Rel.EQ))
            rows += [c.pad(after=m) for c in P.constraints]
            rows += [LinearConstraint(les[i].form.pad(after=m), Rel.EQ) for i in W]
            rows += [LinearConstraint(-AffineForm.coordinate(N, n + j), Rel.LE) for j in range(len(W))]
            res = lp_strict_feasible(rows, N)
            if res.feasible:
                x = res.witness[:n]
                v = q(x)
                Qx = q.Qx(x)
                extra = [eq(row, qx) for row, qx in zip(q.Q, Qx) if any(row)]
                if any(q.b):
                    extra.append(eq(q.b, dot(q.b, x)))
                return AssociatedSolution(Status.OPTIMAL, v, P.with_rows(extra), x)
    raise AssertionError("no active set satisfied the KKT system of a bounded convex QP")


def solve_associated(ap: AssociatedProblem, max_active_sets: int = DEFAULT_MAX_ACTIVE_SETS) -> AssociatedSolution:
    """Exact optimal value and solution polyhedron of the associated problem."""
    try:
        P = ap.feasible_set.intersect(ap.objective.domain)
    except EmptySetError:
        return AssociatedSolution(Status.INFEASIBLE)
    check_caps(P.dim, len(P.constraints))
    base = ap.objective.base
    if isinstance(base, MaxAffine):
        return _epigraph_solve(base, P)
    return _qp_solve(base, P, max_active_sets)


@dataclass(frozen=True)
class SolveReport:
    status: Status
    value: Fraction | None
    associated_value: Fraction | None
    S1: Polyhedron | None
    S: DiffSet | None
    regularity: Regularity = field(default_factory=lambda: Regularity(False))


def solution_diffset(S1: Polyhedron, cells: Sequence[Cell]) -> DiffSet:
    removed = []
    for cell in cells:
        c = cell.restrict(S1.constraints)
        if c not in removed and not c.is_empty():
            removed.append(c)
    return DiffSet(S1, tuple(removed))


def solve_original(p: Problem, max_active_sets: int = DEFAULT_MAX_ACTIVE_SETS) -> SolveReport:
    """Solve ``min f over D`` through its associated problem.

    Refuses to run without regularity: the optimal values can differ then.
    The solution set is ``S1`` minus every cell where ``x`` leaves ``D`` or
    ``f`` jumps above its base.
    """
    reg = _require_regularity(p)
    sol = solve_associated(associate(p), max_active_sets)
    if sol.status is not Status.OPTIMAL:
        return SolveReport(sol.status, None, None, None, None, reg)
    f = p.objective
    cells = list(p.feasible_set.removed) + list(f.domain.removed) + [o.cell for o in f.overrides]
    return SolveReport(Status.OPTIMAL, sol.value, sol.value, sol.solutions, solution_diffset(sol.solutions, cells), reg)


@dataclass(frozen=True)
class FermatCertificate:
    """Outcome of testing ``0 in subdifferential + normal cone`` at a point.

    When ``holds``, ``subgradient + normal = 0`` exactly.
    """

    point: tuple[Fraction, ...]
    holds: bool
    subgradient: tuple[Fraction, ...] | None = None
    normal: tuple[Fraction, ...] | None = None
    decomposition: Decomposition | None = None

    def __bool__(self):
        return self.holds


def _fermat(point, sd: FGSet, N: FGSet) -> FermatCertificate:
    dec = minkowski_member([sd, N], (0,) * len(point))
    if dec is None:
        return FermatCertificate(point, False)
    return FermatCertificate(point, True, dec.elements[0], dec.elements[1], dec)


def fermat_check(p: Problem, x) -> FermatCertificate:
    """Decide ``0 in df(x) + N(x; D)``; under regularity this is ``x in S``."""
    x = vec(x)
    _require_regularity(p)
    if not member(p.feasible_set, x):
        raise InfeasiblePoint(f"{fmt_vec(x)} is not in D")
    if evaluate(p.objective, x) == INF:
        raise PointNotInDomain(f"f is +inf at {fmt_vec(x)}")
    return _fermat(x, subdiff(p.objective, x), normal_cone(p.feasible_set, x))


def fermat_check_associated(ap: AssociatedProblem, x) -> FermatCertificate:
    """Decide ``0 in dfbar(x) + N(x; cl D)``, i.e. whether ``x`` solves the associated problem."""
    x = vec(x)
    if not ap.feasible_set.contains(x):
        raise InfeasiblePoint(f"{fmt_vec(x)} is not in the closure of D")
    return _fermat(x, subdiff_lsc(ap.objective, x), normal_cone(ap.feasible_set, x))


class Classification(enum.Enum):
    SOLUTION_BOTH = "SolutionBoth"
    ASSOCIATED_ONLY = "AssociatedOnly"
    NOT_SOLUTION = "NotSolution"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class PointReport:
    kind: Classification
    in_D: bool
    in_ri_dom: bool
    value: object = None
    associated_value: object = None
    certificate: FermatCertificate | None = None


def classify_point(p: Problem, x) -> PointReport:
    """Place ``x`` relative to the solution sets ``S`` and ``S1``.

    A point solving the associated problem has ``fbar(x) = vbar``; under
    regularity ``v = vbar``, so it also solves the original problem iff it
    lies in ``D`` and ``f(x) = fbar(x)``.
    """
    x = vec(x)
    _require_regularity(p)
    ap = associate(p)
    in_D = member(p.feasible_set, x)
    in_ri = is_in_ri_dom(p.objective, x)
    fx = evaluate(p.objective, x)
    if not ap.feasible_set.contains(x):
        return PointReport(Classification.INFEASIBLE, in_D, in_ri, fx)
    fbx = ap.objective(x)
    if fbx == INF:
        return PointReport(Classification.NOT_SOLUTION, in_D, in_ri, fx, fbx)
    cert = fermat_check_associated(ap, x)
    if not cert.holds:
        kind = Classification.NOT_SOLUTION
    elif in_D and fx == fbx:
        kind = Classification.SOLUTION_BOTH
    else:
        kind = Classification.ASSOCIATED_ONLY
    return PointReport(kind, in_D, in_ri, fx, fbx, cert)


@dataclass
class LocalGlobalReport:
    regular: bool
    associated_value: Fraction | None
    clusters: list = field(default_factory=list)
    infinite_minima: int = 0
    consistent: bool | None = None
    counterexamples: list = field(default_factory=list)


def local_global_check(p: Problem, spec, max_active_sets: int = DEFAULT_MAX_ACTIVE_SETS) -> LocalGlobalReport:
    """Compare grid-local minimisers of ``f`` over ``D`` with the exact optimal value.

    Under regularity every finite-valued local minimiser must reach ``vbar``
    within the grid bracket; otherwise the clusters are reported as
    candidates for local-but-not-global solutions.
    """
    from .oracle import grid_local_minima, local_minimum_clusters

    reg = check_regularity(p)
    sol = solve_associated(associate(p), max_active_sets)
    vbar = sol.value if sol.status is Status.OPTIMAL else None
    minima = grid_local_minima(p.objective, p.feasible_set, spec)
    finite = [m for m in minima if m.value != INF]
    clusters = local_minimum_clusters(finite, spec, p.objective)
    report = LocalGlobalReport(reg.holds, vbar, clusters, len(minima) - len(finite))
    if reg.holds and vbar is not None:
        report.consistent = all(c.lo <= vbar <= c.hi for c in clusters)
    else:
        best = min((c.value for c in clusters), default=None)
        report.counterexamples = [c for c in clusters if c.value != best]
    return report


__all__ = [
    "AssociatedProblem",
    "AssociatedSolution",
    "Classification",
    "DiffSet",
    "FermatCertificate",
    "LocalGlobalReport",
    "PointReport",
    "Problem",
    "Regularity",
    "SolveReport",
    "associate",
    "check_regularity",
    "classify_point",
    "fermat_check",
    "fermat_check_associated",
    "local_global_check",
    "solve_associated",
    "solve_original",
]
