"""Polyhedra, relatively open cells, carved polyhedra and finitely generated sets.

A :class:`CarvedPolyhedron` is a closed polyhedron ``P`` with finitely many
cells removed from its relative boundary.  Such a set sits between the
convex set ``ri P`` and its closure ``P``, so it is nearly convex; every
set-level question below reduces to one or more exact LPs over ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

from itertools import combinations

from .errors import CapExceeded, DimensionMismatch, EmptySetError, HypothesisViolated, UnsupportedShape
from .exact import (
    AffineForm,
    LinearConstraint,
    Rel,
    check_caps,
    implies,
    is_feasible,
    lp_nonneg,
    lp_solve,
    lp_strict_feasible,
    solve_linear_system,
    vec,
)

Point = tuple[Fraction, ...]


def _check_dim(constraints, dim):
    for c in constraints:
        if c.dim != dim:
            raise DimensionMismatch(f"constraint of dimension {c.dim} in a set of dimension {dim}")


def _negations(row: LinearConstraint) -> list[LinearConstraint]:
    """Rows whose individual satisfaction violates ``row``."""
    f = row.form
    if row.rel is Rel.LE:
        return [LinearConstraint(-f, Rel.LT)]
    if row.rel is Rel.LT:
        return [LinearConstraint(-f, Rel.LE)]
    return [LinearConstraint(-f, Rel.LT), LinearConstraint(f, Rel.LT)]


@dataclass(frozen=True)
class Polyhedron:
    """Closed polyhedron ``{x : row(x) <= 0 or = 0 for every row}``; never empty."""

    dim: int
    constraints: tuple[LinearConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        _check_dim(self.constraints, self.dim)
        if any(c.rel is Rel.LT for c in self.constraints):
            raise ValueError("a Polyhedron takes LE and EQ rows only; use Cell for strict rows")
        check_caps(self.dim, len(self.constraints))
        if self.constraints and not is_feasible(self.constraints, self.dim):
            raise EmptySetError("polyhedron is empty")

    @classmethod
    def full(cls, dim: int) -> Polyhedron:
        return cls(dim, ())

    @property
    def is_full(self) -> bool:
        return not self.constraints

    def contains(self, x: Sequence) -> bool:
        if len(x) != self.dim:
            raise DimensionMismatch(f"point of dimension {len(x)} tested against a set of dimension {self.dim}")
        x = vec(x)
        return all(c.holds(x) for c in self.constraints)

    __contains__ = contains

    @cached_property
    def implicit_equalities(self) -> frozenset[int]:
        return detect_implicit_equalities(self)

    def ri_constraints(self) -> list[LinearConstraint]:
        """Rows describing ``ri P``: implicit equalities as EQ, the rest strict."""
        out = []
        for i, c in enumerate(self.constraints):
            if c.rel is Rel.EQ or i in self.implicit_equalities:
                out.append(c.with_rel(Rel.EQ))
            else:
                out.append(c.with_rel(Rel.LT))
        return out

    def ri_member(self, x: Sequence) -> bool:
        x = vec(x)
        return all(c.holds(x) for c in self.ri_constraints())

    @cached_property
    def _ri_point(self) -> Point:
        res = lp_strict_feasible(self.ri_constraints(), self.dim)
        assert res.feasible, "relative interior of a nonempty polyhedron is nonempty"
        return res.witness

    def ri_witness(self) -> Point:
        return self._ri_point

    def is_interior(self, x: Sequence) -> bool:
        """Topological interior: every row strict and no equality rows at all."""
        x = vec(x)
        return all(c.rel is not Rel.EQ and c.form(x) < 0 for c in self.constraints) and not self.implicit_equalities

    def intersect(self, other: Polyhedron) -> Polyhedron:
        if other.dim != self.dim:
            raise DimensionMismatch("cannot intersect sets of different dimension")
        rows = list(self.constraints)
        rows += [c for c in other.constraints if c not in rows]
        return Polyhedron(self.dim, rows)

    def with_rows(self, rows: Sequence[LinearConstraint]) -> Polyhedron:
        """Add rows, skipping constant-true rows and scaled duplicates."""
        out = list(self.constraints)
        seen = {c.normalized() for c in out}
        for c in rows:
            if c.form.is_constant() and c.holds((0,) * self.dim):
                continue
            if c.normalized() not in seen:
                seen.add(c.normalized())
                out.append(c)
        return Polyhedron(self.dim, out)

    def subset_of(self, other: Polyhedron) -> bool:
        return all(implies(self.constraints, c, self.dim) for c in other.constraints)

    def equivalent(self, other: Polyhedron) -> bool:
        """Same point set, decided by mutual LP implication of the rows."""
        return self.dim == other.dim and self.subset_of(other) and other.subset_of(self)

    def __str__(self):
        if self.is_full:
            return f"R^{self.dim}"
        return "{" + ", ".join(str(c) for c in self.constraints) + "}"


@dataclass(frozen=True)
class Cell:
    """Convex set cut out by LE, LT and EQ rows; may be empty."""

    dim: int
    constraints: tuple[LinearConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        _check_dim(self.constraints, self.dim)

    def contains(self, x: Sequence) -> bool:
        x = vec(x)
        return all(c.holds(x) for c in self.constraints)

    __contains__ = contains

    def is_empty(self) -> bool:
        return not is_feasible(self.constraints, self.dim)

    def restrict(self, rows: Sequence[LinearConstraint]) -> Cell:
        return Cell(self.dim, list(self.constraints) + [c for c in rows if c not in self.constraints])

    def closure_rows(self) -> list[LinearConstraint]:
        return [c.with_rel(Rel.LE) if c.rel is Rel.LT else c for c in self.constraints]

    def disjoint_from(self, other: Cell) -> bool:
        return not is_feasible(list(self.constraints) + list(other.constraints), self.dim)

    def __str__(self):
        return "{" + ", ".join(str(c) for c in self.constraints) + "}"


def boundary_cell_issues(cell: Cell, hull: Polyhedron) -> list[tuple[str, str]]:
    """Check that ``cell`` lies in the relative boundary of ``hull``.

    Returns ``(kind, message)`` pairs; kinds are ``"empty"`` (a warning),
    ``"vacuous"`` (a warning: the cell misses the hull entirely),
    ``"not-in-hull"`` and ``"meets-relative-interior"``.
    """
    if cell.is_empty():
        return [("empty", "cell is empty")]
    issues = []
    if not is_feasible(list(cell.constraints) + list(hull.constraints), hull.dim):
        issues.append(("vacuous", "cell does not meet the hull"))
    for row in hull.constraints:
        if any(is_feasible(list(cell.constraints) + [neg], hull.dim) for neg in _negations(row)):
            issues.append(("not-in-hull", f"cell leaves the hull through row {row}"))
            break
    if is_feasible(list(cell.constraints) + hull.ri_constraints(), hull.dim):
        issues.append(("meets-relative-interior", "cell meets the relative interior of the hull"))
    return issues


WARNING_KINDS = frozenset({"empty", "vacuous"})


@dataclass(frozen=True)
class CarvingIssue:
    cell: int
    kind: str
    message: str

    @property
    def is_warning(self) -> bool:
        return self.kind in WARNING_KINDS


@dataclass(frozen=True)
class CarvingReport:
    issues: tuple[CarvingIssue, ...] = ()

    @property
    def valid(self) -> bool:
        return not any(not i.is_warning for i in self.issues)

    @property
    def violations(self) -> list[CarvingIssue]:
        return [i for i in self.issues if not i.is_warning]

    @property
    def warnings(self) -> list[CarvingIssue]:
        return [i for i in self.issues if i.is_warning]


@dataclass(frozen=True)
class CarvedPolyhedron:
    """``hull`` minus the union of the ``removed`` cells.

    The carving is only meaningful when every removed cell sits in the
    relative boundary of the hull; :func:`validate_carved` checks that.
    """

    hull: Polyhedron
    removed: tuple[Cell, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "removed", tuple(self.removed))
        for c in self.removed:
            if c.dim != self.hull.dim:
                raise DimensionMismatch("removed cell dimension differs from the hull")

    @classmethod
    def full(cls, dim: int) -> CarvedPolyhedron:
        return cls(Polyhedron.full(dim))

    @classmethod
    def of(cls, dim: int, hull_rows: Sequence[LinearConstraint], removed: Sequence[Sequence[LinearConstraint]] = ()):
        return cls(Polyhedron(dim, hull_rows), tuple(Cell(dim, r) for r in removed))

    @property
    def dim(self) -> int:
        return self.hull.dim

    @property
    def is_full(self) -> bool:
        return self.hull.is_full and not self.removed

    def contains(self, x: Sequence) -> bool:
        return member(self, x)

    __contains__ = contains

    def validate(self) -> CarvingReport:
        return validate_carved(self)

    def __str__(self):
        s = str(self.hull)
        for c in self.removed:
            s += f" \\ {c}"
        return s


SetLike = Union[CarvedPolyhedron, Polyhedron]


def as_carved(s: SetLike) -> CarvedPolyhedron:
    return s if isinstance(s, CarvedPolyhedron) else CarvedPolyhedron(s)


def hull_of(s: SetLike) -> Polyhedron:
    return s.hull if isinstance(s, CarvedPolyhedron) else s


def validate_carved(omega: CarvedPolyhedron) -> CarvingReport:
    """Check that every removed cell lies in the relative boundary of the hull."""
    issues = []
    for j, cell in enumerate(omega.removed):
        for kind, msg in boundary_cell_issues(cell, omega.hull):
            issues.append(CarvingIssue(j, kind, msg))
    return CarvingReport(tuple(issues))


def member(omega: SetLike, x: Sequence) -> bool:
    if len(x) != omega.dim:
        raise DimensionMismatch(f"point of dimension {len(x)} tested against a set of dimension {omega.dim}")
    x = vec(x)
    if isinstance(omega, Polyhedron):
        return omega.contains(x)
    return omega.hull.contains(x) and not any(c.contains(x) for c in omega.removed)


def closure(omega: SetLike) -> Polyhedron:
    return hull_of(omega)


def ri_member(omega: SetLike, x: Sequence) -> bool:
    return hull_of(omega).ri_member(x)


def ri_witness(omega: SetLike) -> Point:
    return hull_of(omega).ri_witness()


def detect_implicit_equalities(P: Polyhedron) -> frozenset[int]:
    """Indices of LE rows that hold with equality on all of ``P``.

    One LP with all LE rows strict settles the common case of no implicit
    equalities; otherwise each row is tested separately.
    """
    les = [i for i, c in enumerate(P.constraints) if c.rel is Rel.LE]
    if not les:
        return frozenset()
    rows = [c.with_rel(Rel.LT) if c.rel is Rel.LE else c for c in P.constraints]
    if is_feasible(rows, P.dim):
        return frozenset()
    out = set()
    for i in les:
        rows = list(P.constraints)
        rows[i] = rows[i].with_rel(Rel.LT)
        if not is_feasible(rows, P.dim):
            out.add(i)
    return frozenset(out)


def is_bounded(P: Polyhedron) -> bool:
    for i in range(P.dim):
        e = AffineForm.coordinate(P.dim, i)
        for sense in ("min", "max"):
            if not lp_solve(e, P.constraints, sense).optimal:
                return False
    return True


def vertices(P: Polyhedron, max_subsets: int = 200_000) -> list[Point]:
    """Vertices of a bounded polyhedron by brute-force basis enumeration.

    Desk-scale only: every choice of ``dim`` tight rows is solved exactly.
    """
    if P.is_full or not is_bounded(P):
        raise UnsupportedShape("vertex enumeration needs a bounded polyhedron")
    eqs = [c.form for c in P.constraints if c.rel is Rel.EQ]
    les = [c.form for c in P.constraints if c.rel is Rel.LE]
    found = []
    tried = 0
    for k in range(0, P.dim + 1):
        for subset in combinations(les, k):
            tried += 1
            if tried > max_subsets:
                raise CapExceeded("vertex enumeration exceeded its subset budget")
            sol = solve_linear_system(eqs + list(subset), P.dim)
            if sol.kind == "unique" and P.contains(sol.point) and sol.point not in found:
                found.append(sol.point)
    return sorted(found)


# ---------------------------------------------------------------------------
# finitely generated sets


@dataclass(frozen=True)
class FGSet:
    """``conv(points) + cone(rays)``; no points means the empty set."""

    dim: int
    points: tuple[Point, ...] = ()
    rays: tuple[Point, ...] = ()

    def __post_init__(self):
        pts = tuple(dict.fromkeys(vec(p) for p in self.points))
        zero = (Fraction(0),) * self.dim
        rays = tuple(dict.fromkeys(r for r in (vec(r) for r in self.rays) if r != zero))
        for v in pts + rays:
            if len(v) != self.dim:
                raise DimensionMismatch(f"generator of dimension {len(v)} in an FGSet of dimension {self.dim}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "rays", rays if pts else ())

    @classmethod
    def empty(cls, dim: int) -> FGSet:
        return cls(dim)

    @classmethod
    def cone(cls, dim: int, rays: Sequence[Sequence]) -> FGSet:
        return cls(dim, ((0,) * dim,), tuple(rays))

    @classmethod
    def zero(cls, dim: int) -> FGSet:
        return cls.cone(dim, ())

    @property
    def is_empty(self) -> bool:
        return not self.points

    def __contains__(self, y) -> bool:
        return fg_member(self, y) is not None

    def __str__(self):
        from .exact import fmt_vec

        if self.is_empty:
            return "{}"
        parts = []
        if self.points != (((Fraction(0),) * self.dim),) or not self.rays:
            parts.append("conv{" + ", ".join(fmt_vec(p) for p in self.points) + "}")
        if self.rays:
            parts.append("cone{" + ", ".join(fmt_vec(r) for r in self.rays) + "}")
        return " + ".join(parts)


@dataclass(frozen=True)
class Decomposition:
    """Elements ``s_k`` of each summand with ``sum s_k = y``, and their weights."""

    elements: tuple[Point, ...]
    point_weights: tuple[tuple[Fraction, ...], ...]
    ray_weights: tuple[tuple[Fraction, ...], ...]


def minkowski_member(sets: Sequence[FGSet], y: Sequence, ray_cost: Sequence[bool] | None = None) -> Decomposition | None:
    """Decide ``y in S_1 + ... + S_k`` by one LP over generator weights.

    ``ray_cost`` marks summands whose ray weights are minimised, which
    makes multiplier certificates as small as possible.
    """
    if not sets:
        raise ValueError("need at least one summand")
    n = sets[0].dim
    y = vec(y)
    if any(s.dim != n for s in sets) or len(y) != n:
        raise DimensionMismatch("summands and target must share a dimension")
    if any(s.is_empty for s in sets):
        return None
    cols = []  # (set index, is_ray, generator index, vector)
    for k, s in enumerate(sets):
        cols += [(k, False, i, v) for i, v in enumerate(s.points)]
        cols += [(k, True, i, r) for i, r in enumerate(s.rays)]
    A_eq = [[v[d] for (_, _, _, v) in cols] for d in range(n)]
    b_eq = list(y)
    for k in range(len(sets)):
        A_eq.append([1 if (kk == k and not ray) else 0 for (kk, ray, _, _) in cols])
        b_eq.append(1)
    cost = [1 if (ray and ray_cost and ray_cost[k]) else 0 for (k, ray, _, _) in cols]
    res = lp_nonneg(cost, A_eq=A_eq, b_eq=b_eq)
    if not res.optimal:
        return None
    w = res.witness
    pw = [[Fraction(0)] * len(s.points) for s in sets]
    rw = [[Fraction(0)] * len(s.rays) for s in sets]
    for (k, ray, i, _), wt in zip(cols, w):
        (rw if ray else pw)[k][i] = wt
    elements = []
    for k, s in enumerate(sets):
        e = [Fraction(0)] * n
        for wt, v in zip(pw[k], s.points):
            e = [a + wt * b for a, b in zip(e, v)]
        for wt, r in zip(rw[k], s.rays):
            e = [a + wt * b for a, b in zip(e, r)]
        elements.append(tuple(e))
    return Decomposition(tuple(elements), tuple(map(tuple, pw)), tuple(map(tuple, rw)))


def fg_member(S: FGSet, y: Sequence) -> Decomposition | None:
    return minkowski_member([S], y)


def fg_sum(S1: FGSet, S2: FGSet) -> FGSet:
    if S1.dim != S2.dim:
        raise DimensionMismatch("cannot add FGSets of different dimension")
    if S1.is_empty or S2.is_empty:
        return FGSet.empty(S1.dim)
    pts = [tuple(a + b for a, b in zip(p, q)) for p in S1.points for q in S2.points]
    return FGSet(S1.dim, pts, S1.rays + S2.rays)


def fg_cone(S: FGSet) -> FGSet:
    """``cone S``: all nonnegative multiples of points of S."""
    if S.is_empty:
        return S
    return FGSet.cone(S.dim, S.points + S.rays)


def _contained(S1: FGSet, S2: FGSet) -> bool:
    rec = FGSet.cone(S2.dim, S2.rays)
    return all(fg_member(S2, v) is not None for v in S1.points) and all(
        fg_member(rec, r) is not None for r in S1.rays
    )


def fg_subset(S1: FGSet, S2: FGSet) -> bool:
    if S1.dim != S2.dim:
        raise DimensionMismatch("cannot compare FGSets of different dimension")
    if S1.is_empty:
        return True
    if S2.is_empty:
        return False
    return _contained(S1, S2)


def fg_equal(S1: FGSet, S2: FGSet) -> bool:
    """Set equality by mutual generator membership."""
    return fg_subset(S1, S2) and fg_subset(S2, S1)


# ---------------------------------------------------------------------------
# set operations


def normal_cone(omega: SetLike, x: Sequence) -> FGSet:
    """Normal cone to ``omega`` at ``x``; empty when ``x`` is not in ``omega``.

    Computed on the hull: inequalities that extend from a set to its closure
    by continuity give the same cone.
    """
    x = vec(x)
    if not member(omega, x):
        return FGSet.empty(omega.dim)
    rays = []
    for c in hull_of(omega).constraints:
        if c.rel is Rel.EQ:
            rays += [c.form.coeffs, tuple(-a for a in c.form.coeffs)]
        elif c.form(x) == 0:
            rays.append(c.form.coeffs)
    return FGSet.cone(omega.dim, rays)


def intersect_carved(omega1: CarvedPolyhedron, omega2: CarvedPolyhedron) -> CarvedPolyhedron:
    """Intersection, valid when the relative interiors of the hulls overlap."""
    omega1, omega2 = as_carved(omega1), as_carved(omega2)
    if omega1.dim != omega2.dim:
        raise DimensionMismatch("cannot intersect sets of different dimension")
    rows = omega1.hull.ri_constraints() + omega2.hull.ri_constraints()
    if not is_feasible(rows, omega1.dim):
        raise HypothesisViolated("ri-overlap", "relative interiors of the two sets are disjoint")
    hull = omega1.hull.intersect(omega2.hull)
    removed = []
    for cell in omega1.removed + omega2.removed:
        c = cell.restrict(hull.constraints)
        if c not in removed and not c.is_empty():
            removed.append(c)
    return CarvedPolyhedron(hull, tuple(removed))


def product(omega1: SetLike, omega2: SetLike) -> CarvedPolyhedron:
    """Cartesian product; removed cells lift to ``R x P2`` and ``P1 x R``."""
    a, b = as_carved(omega1), as_carved(omega2)
    n1, n2 = a.dim, b.dim
    rows1 = [c.pad(after=n2) for c in a.hull.constraints]
    rows2 = [c.pad(before=n1) for c in b.hull.constraints]
    hull = Polyhedron(n1 + n2, rows1 + rows2)
    removed = [Cell(n1 + n2, [c.pad(after=n2) for c in cell.constraints] + rows2) for cell in a.removed]
    removed += [Cell(n1 + n2, rows1 + [c.pad(before=n1) for c in cell.constraints]) for cell in b.removed]
    return CarvedPolyhedron(hull, tuple(removed))


__all__ = [
    "CarvedPolyhedron",
    "CarvingIssue",
    "CarvingReport",
    "Cell",
    "Decomposition",
    "FGSet",
    "Polyhedron",
    "as_carved",
    "boundary_cell_issues",
    "closure",
    "detect_implicit_equalities",
    "fg_cone",
    "fg_equal",
    "fg_member",
    "fg_subset",
    "fg_sum",
    "hull_of",
    "intersect_carved",
    "is_bounded",
    "member",
    "minkowski_member",
    "normal_cone",
    "product",
    "ri_member",
    "ri_witness",
    "validate_carved",
    "vertices",
]
