"""Nearly convex functions over carved domains.

An :class:`NCFunction` is a continuous convex base ``q`` (a max of affine
pieces, or a PSD quadratic) restricted to a carved polyhedron, with values
on some relative-boundary cells pushed strictly above ``q`` (or to +inf).
Its epigraph then lies between the convex set
``{(x, t) : x in ri P, t >= q(x)}`` and that set's closure, which is what
makes the function nearly convex and its lsc hull exactly computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import DimensionMismatch, ImproperFunction, KindMismatch, PointNotInDomain, UnsupportedShape
from .exact import AffineForm, LinearConstraint, Rel, dot, fmt_vec, is_feasible, rat, vec
from .sets import (
    CarvedPolyhedron,
    Cell,
    FGSet,
    Polyhedron,
    as_carved,
    boundary_cell_issues,
    fg_sum,
    intersect_carved,
    member,
    normal_cone,
    validate_carved,
    vertices,
)

INF = math.inf
Value = Union[Fraction, float]


def is_psd(Q: Sequence[Sequence[Fraction]]) -> bool:
    """Exact PSD test by symmetric Gaussian elimination (congruence to a diagonal)."""
    M = [list(map(rat, row)) for row in Q]
    n = len(M)
    for k in range(n):
        p = M[k][k]
        if p < 0:
            return False
        if p == 0:
            if any(M[k][j] != 0 for j in range(k + 1, n)):
                return False
            continue
        for i in range(k + 1, n):
            f = M[i][k] / p
            if f:
                for j in range(k, n):
                    M[i][j] -= f * M[k][j]
    return True


@dataclass(frozen=True)
class MaxAffine:
    """``q(x) = max_k piece_k(x)``."""

    pieces: tuple[AffineForm, ...]

    kind = "maxaffine"

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise ValueError("a max-affine base needs at least one piece")
        if len({p.dim for p in self.pieces}) != 1:
            raise DimensionMismatch("affine pieces disagree in dimension")

    @property
    def dim(self) -> int:
        return self.pieces[0].dim

    def __call__(self, x) -> Fraction:
        return max(p(x) for p in self.pieces)

    def active(self, x) -> list[int]:
        v = self(x)
        return [k for k, p in enumerate(self.pieces) if p(x) == v]

    def subgradients(self, x) -> FGSet:
        return FGSet(self.dim, [self.pieces[k].coeffs for k in self.active(x)])

    def lipschitz(self, radius=None) -> Fraction:
        """Bound on |q(x)-q(y)| / max_i |x_i-y_i|."""
        return max(sum(abs(a) for a in p.coeffs) for p in self.pieces)

    def __add__(self, other):
        if not isinstance(other, MaxAffine):
            raise KindMismatch("cannot add a max-affine base to a quadratic one")
        return MaxAffine(tuple(p + q for p in self.pieces for q in other.pieces))

    def __str__(self):
        if len(self.pieces) == 1:
            return str(self.pieces[0])
        return "max(" + ", ".join(str(p) for p in self.pieces) + ")"


@dataclass(frozen=True)
class Quadratic:
    """``q(x) = x^T Q x + b.x + c`` with ``Q`` symmetric PSD."""

    Q: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    c: Fraction = Fraction(0)

    kind = "quadratic"

    def __post_init__(self):
        Q = tuple(vec(row) for row in self.Q)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", vec(self.b))
        object.__setattr__(self, "c", rat(self.c))
        n = len(self.b)
        if len(Q) != n or any(len(r) != n for r in Q):
            raise DimensionMismatch("Q must be n x n with n = len(b)")
        if any(Q[i][j] != Q[j][i] for i in range(n) for j in range(n)):
            raise ValueError("Q must be symmetric")
        if not is_psd(Q):
            raise ValueError("Q is not positive semidefinite")

    @property
    def dim(self) -> int:
        return len(self.b)

    def __call__(self, x) -> Fraction:
        x = vec(x)
        if len(x) != self.dim:
            raise DimensionMismatch("point dimension differs from the quadratic")
        return dot(x, self.Qx(x)) + dot(self.b, x) + self.c

    def Qx(self, x) -> tuple[Fraction, ...]:
        return tuple(dot(row, x) for row in self.Q)

    def gradient(self, x) -> tuple[Fraction, ...]:
        return tuple(2 * a + b for a, b in zip(self.Qx(vec(x)), self.b))

    def subgradients(self, x) -> FGSet:
        return FGSet(self.dim, [self.gradient(x)])

    def lipschitz(self, radius) -> Fraction:
        """Bound on the l1 norm of the gradient over the box ``|x_i| <= radius``."""
        r = rat(radius)
        return sum(abs(bi) + 2 * r * sum(abs(q) for q in row) for bi, row in zip(self.b, self.Q))

    def __add__(self, other):
        if not isinstance(other, Quadratic):
            raise KindMismatch("cannot add a quadratic base to a max-affine one")
        Q = tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.Q, other.Q))
        return Quadratic(Q, tuple(a + b for a, b in zip(self.b, other.b)), self.c + other.c)

    def __str__(self):
        terms = []
        n = self.dim
        for i in range(n):
            for j in range(i, n):
                coef = self.Q[i][j] if i == j else 2 * self.Q[i][j]
                if coef:
                    terms.append(f"{coef}*x{i + 1}^2" if i == j else f"{coef}*x{i + 1}*x{j + 1}")
        terms += [f"{a}*x{i + 1}" for i, a in enumerate(self.b) if a]
        if self.c or not terms:
            terms.append(str(self.c))
        return " + ".join(terms)


ConvexBase = Union[MaxAffine, Quadratic]


def affine(coeffs, const=0) -> MaxAffine:
    return MaxAffine((AffineForm(coeffs, const),))


@dataclass(frozen=True)
class Override:
    """Value assigned on a relative-boundary cell of the domain (``INF`` allowed)."""

    cell: Cell
    value: Value

    def __post_init__(self):
        if self.value != INF:
            object.__setattr__(self, "value", rat(self.value))

    @property
    def finite(self) -> bool:
        return self.value != INF


@dataclass(frozen=True)
class NCFunction:
    base: ConvexBase
    domain: CarvedPolyhedron
    overrides: tuple[Override, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domain", as_carved(self.domain))
        object.__setattr__(self, "overrides", tuple(self.overrides))
        if self.base.dim != self.domain.dim:
            raise DimensionMismatch("base and domain dimensions differ")
        for o in self.overrides:
            if o.cell.dim != self.dim:
                raise DimensionMismatch("override cell dimension differs from the function")

    @classmethod
    def on(cls, base: ConvexBase, domain=None, overrides=()) -> NCFunction:
        if domain is None:
            domain = CarvedPolyhedron.full(base.dim)
        return cls(base, as_carved(domain), tuple(overrides))

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def hull(self) -> Polyhedron:
        return self.domain.hull

    @property
    def is_continuous_everywhere(self) -> bool:
        return self.domain.is_full and not self.overrides

    def __call__(self, x) -> Value:
        return evaluate(self, x)

    def validate(self) -> FunctionReport:
        return validate_function(self)

    def __str__(self):
        s = f"{self.base} on {self.domain}"
        for o in self.overrides:
            s += f"; {o.value} on {o.cell}"
        return s


def indicator(omega) -> NCFunction:
    """0 on ``omega`` and +inf elsewhere."""
    omega = as_carved(omega)
    return NCFunction(affine((0,) * omega.dim), omega)


@dataclass(frozen=True)
class FunctionIssue:
    where: str
    kind: str
    message: str

    @property
    def is_warning(self) -> bool:
        return self.kind in ("empty", "vacuous")


@dataclass(frozen=True)
class FunctionReport:
    issues: tuple[FunctionIssue, ...] = ()

    @property
    def valid(self) -> bool:
        return not any(not i.is_warning for i in self.issues)

    @property
    def violations(self) -> list[FunctionIssue]:
        return [i for i in self.issues if not i.is_warning]


def _exceeds_base_on_cell(base: ConvexBase, cell: Cell, value: Fraction) -> bool:
    """Whether ``base < value`` at every point of ``cell``."""
    if isinstance(base, MaxAffine):
        # some x in cell with piece(x) >= value refutes it
        return not any(
            is_feasible(list(cell.constraints) + [LinearConstraint((-p).shift(value), Rel.LE)], cell.dim)
            for p in base.pieces
        )
    # a convex quadratic peaks at a vertex of the (bounded) cell closure
    closed = Polyhedron(cell.dim, cell.closure_rows())
    return all(base(v) < value for v in vertices(closed))


def validate_function(f: NCFunction) -> FunctionReport:
    """Check the structural invariants that make ``f`` nearly convex."""
    issues = [FunctionIssue(f"removed[{i.cell}]", i.kind, i.message) for i in validate_carved(f.domain).issues]
    for j, o in enumerate(f.overrides):
        where = f"override[{j}]"
        for kind, msg in boundary_cell_issues(o.cell, f.hull):
            issues.append(FunctionIssue(where, kind, msg))
        for k, r in enumerate(f.domain.removed):
            if not o.cell.disjoint_from(r):
                issues.append(FunctionIssue(where, "overlap", f"override cell meets removed cell {k}"))
        for k in range(j):
            if not o.cell.disjoint_from(f.overrides[k].cell):
                issues.append(FunctionIssue(where, "overlap", f"override cell meets override cell {k}"))
        if o.finite and not o.cell.is_empty():
            try:
                ok = _exceeds_base_on_cell(f.base, o.cell, o.value)
            except UnsupportedShape:
                issues.append(FunctionIssue(where, "unbounded-cell", "quadratic base needs a bounded override cell"))
                continue
            if not ok:
                issues.append(FunctionIssue(where, "not-above-base", f"value {o.value} does not exceed the base"))
    return FunctionReport(tuple(issues))


def evaluate(f: NCFunction, x) -> Value:
    x = vec(x)
    if len(x) != f.dim:
        raise DimensionMismatch(f"point of dimension {len(x)} for a function of dimension {f.dim}")
    for o in f.overrides:
        if o.cell.contains(x):
            return o.value
    if not member(f.domain, x):
        return INF
    return f.base(x)


@dataclass(frozen=True)
class LscFunction:
    """``q`` on a closed polyhedron, +inf outside: proper, convex and lsc."""

    base: ConvexBase
    domain: Polyhedron

    @property
    def dim(self) -> int:
        return self.base.dim

    def __call__(self, x) -> Value:
        x = vec(x)
        return self.base(x) if self.domain.contains(x) else INF

    def as_function(self) -> NCFunction:
        return NCFunction.on(self.base, self.domain)

    def __str__(self):
        return f"{self.base} on {self.domain}"


def evaluate_lsc(fbar: LscFunction, x) -> Value:
    return fbar(x)


def check_proper(f: NCFunction) -> None:
    if evaluate(f, f.hull.ri_witness()) == INF:
        raise ImproperFunction("the function is +inf at a relative-interior point of its domain hull")


def lsc_hull(f: NCFunction) -> LscFunction:
    """Lower semicontinuous hull: the base on the closed domain hull.

    Removed cells and overrides sit on the relative boundary above a
    continuous base, so closing the epigraph erases them.
    """
    check_proper(f)
    return LscFunction(f.base, f.hull)


def domain_ri_witness(f: NCFunction):
    check_proper(f)
    return f.hull.ri_witness()


def is_in_ri_dom(f: NCFunction, x) -> bool:
    return f.hull.ri_member(x)


def subdiff(f: NCFunction, x) -> FGSet:
    """Subdifferential of ``f`` at ``x``.

    Empty at points of finite-override cells: ``f`` equals the base
    arbitrarily close to such a point inside ``ri P``, so no affine minorant
    can touch the raised value.
    """
    x = vec(x)
    if evaluate(f, x) == INF:
        raise PointNotInDomain(f"f is +inf at {fmt_vec(x)}")
    if any(o.cell.contains(x) for o in f.overrides):
        return FGSet.empty(f.dim)
    return fg_sum(f.base.subgradients(x), normal_cone(f.hull, x))


def subdiff_lsc(fbar: LscFunction, x) -> FGSet:
    x = vec(x)
    if not fbar.domain.contains(x):
        raise PointNotInDomain(f"{fmt_vec(x)} lies outside the domain of the lsc hull")
    return fg_sum(fbar.base.subgradients(x), normal_cone(fbar.domain, x))


def fn_sum(f1: NCFunction, f2: NCFunction) -> NCFunction:
    """Sum of two override-free functions of the same base kind."""
    if f1.overrides or f2.overrides:
        raise UnsupportedShape("has-overrides: sums are only formed for override-free functions")
    if type(f1.base) is not type(f2.base):
        raise KindMismatch("kind-mismatch: cannot add a max-affine base to a quadratic one")
    return NCFunction(f1.base + f2.base, intersect_carved(f1.domain, f2.domain))


def fn_max(fs: Sequence[NCFunction]) -> NCFunction:
    """Pointwise max of override-free max-affine functions on the whole space."""
    if not fs:
        raise ValueError("fn_max needs at least one function")
    for f in fs:
        if not isinstance(f.base, MaxAffine) or not f.is_continuous_everywhere:
            raise UnsupportedShape("unsupported-shape: fn_max takes override-free max-affine functions on R^n")
    pieces = tuple(p for f in fs for p in f.base.pieces)
    return NCFunction.on(MaxAffine(pieces))


__all__ = [
    "INF",
    "ConvexBase",
    "FunctionReport",
    "LscFunction",
    "MaxAffine",
    "NCFunction",
    "Override",
    "Quadratic",
    "affine",
    "check_proper",
    "domain_ri_witness",
    "evaluate",
    "fn_max",
    "fn_sum",
    "indicator",
    "is_in_ri_dom",
    "is_psd",
    "lsc_hull",
    "subdiff",
    "subdiff_lsc",
    "validate_function",
]
