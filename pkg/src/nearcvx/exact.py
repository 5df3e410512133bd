"""Exact rational linear algebra and linear programming.

Everything here works on :class:`fractions.Fraction`; no floating point
value ever enters a pivot.  The simplex solver uses Bland's rule, so the
pivot sequence and therefore the returned witness are a deterministic
function of the input.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapExceeded, DimensionMismatch

Rational = Fraction

MAX_DIM = 6
MAX_ROWS = 32


def rat(value) -> Fraction:
    """Coerce ints, strings like ``"3/4"`` and Fractions to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a string or Fraction")
    return Fraction(value)


def vec(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(rat(v) for v in values)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def fmt(value) -> str:
    """Canonical text form: ``"p/q"``, ``"p"`` or ``"inf"``."""
    if value == float("inf"):
        return "inf"
    return str(rat(value))


def fmt_vec(values) -> str:
    return "(" + ", ".join(fmt(v) for v in values) + ")"


def check_caps(dim: int, rows: int = 0) -> None:
    if dim > MAX_DIM:
        raise CapExceeded(f"ambient dimension {dim} exceeds the cap {MAX_DIM}")
    if rows > MAX_ROWS:
        raise CapExceeded(f"{rows} constraints exceed the cap {MAX_ROWS}")


@dataclass(frozen=True)
class AffineForm:
    """The affine map ``x -> coeffs . x + const``."""

    coeffs: tuple[Fraction, ...]
    const: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", vec(self.coeffs))
        object.__setattr__(self, "const", rat(self.const))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def __call__(self, x: Sequence) -> Fraction:
        if len(x) != self.dim:
            raise DimensionMismatch(f"form of dimension {self.dim} applied to a point of dimension {len(x)}")
        return dot(self.coeffs, vec(x)) + self.const

    def __add__(self, other: AffineForm) -> AffineForm:
        _same_dim(self.dim, other.dim)
        return AffineForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.const + other.const)

    def __sub__(self, other: AffineForm) -> AffineForm:
        return self + (-other)

    def __neg__(self) -> AffineForm:
        return AffineForm(tuple(-a for a in self.coeffs), -self.const)

    def scale(self, k) -> AffineForm:
        k = rat(k)
        return AffineForm(tuple(k * a for a in self.coeffs), k * self.const)

    def shift(self, c) -> AffineForm:
        return AffineForm(self.coeffs, self.const + rat(c))

    def pad(self, before: int = 0, after: int = 0) -> AffineForm:
        """Embed into a larger space by adding zero coefficients."""
        zero = (Fraction(0),)
        return AffineForm(zero * before + self.coeffs + zero * after, self.const)

    def select(self, idx: Sequence[int]) -> AffineForm:
        return AffineForm(tuple(self.coeffs[i] for i in idx), self.const)

    def is_constant(self) -> bool:
        return not any(self.coeffs)

    @classmethod
    def constant(cls, dim: int, c) -> AffineForm:
        return cls((0,) * dim, c)

    @classmethod
    def coordinate(cls, dim: int, i: int) -> AffineForm:
        return cls(tuple(1 if j == i else 0 for j in range(dim)))

    def __str__(self):
        terms = [f"{fmt(a)}*x{i + 1}" for i, a in enumerate(self.coeffs) if a]
        if self.const or not terms:
            terms.append(fmt(self.const))
        return " + ".join(terms)


class Rel(enum.Enum):
    LE = "le"
    LT = "lt"
    EQ = "eq"


@dataclass(frozen=True)
class LinearConstraint:
    """``form(x) rel 0`` with ``rel`` one of <=, <, =."""

    form: AffineForm
    rel: Rel = Rel.LE

    @property
    def dim(self) -> int:
        return self.form.dim

    def holds(self, x: Sequence) -> bool:
        v = self.form(x)
        if self.rel is Rel.LE:
            return v <= 0
        if self.rel is Rel.LT:
            return v < 0
        return v == 0

    def with_rel(self, rel: Rel) -> LinearConstraint:
        return LinearConstraint(self.form, rel)

    def pad(self, before: int = 0, after: int = 0) -> LinearConstraint:
        return LinearConstraint(self.form.pad(before, after), self.rel)

    def normalized(self) -> LinearConstraint:
        """Scale so the largest absolute coefficient is 1 (used for dedup)."""
        m = max((abs(a) for a in self.form.coeffs), default=Fraction(0))
        if m == 0:
            m = abs(self.form.const) or Fraction(1)
        form = self.form.scale(1 / m)
        if self.rel is Rel.EQ:
            lead = next((a for a in form.coeffs if a), form.const)
            if lead < 0:
                form = -form
        return LinearConstraint(form, self.rel)

    def __str__(self):
        sym = {Rel.LE: "<=", Rel.LT: "<", Rel.EQ: "="}[self.rel]
        a = self.form.coeffs
        lhs = " + ".join(f"{fmt(c)}*x{i + 1}" for i, c in enumerate(a) if c) or "0"
        return f"{lhs} {sym} {fmt(-self.form.const)}"


def le(a, b) -> LinearConstraint:
    """The constraint ``a . x <= b``."""
    return LinearConstraint(AffineForm(a, -rat(b)), Rel.LE)


def lt(a, b) -> LinearConstraint:
    return LinearConstraint(AffineForm(a, -rat(b)), Rel.LT)


def eq(a, b) -> LinearConstraint:
    return LinearConstraint(AffineForm(a, -rat(b)), Rel.EQ)


def ge(a, b) -> LinearConstraint:
    return le([-rat(v) for v in a], -rat(b))


def gt(a, b) -> LinearConstraint:
    return lt([-rat(v) for v in a], -rat(b))


def box(bounds: Sequence[tuple]) -> list[LinearConstraint]:
    """Rows of the box ``prod [lo_i, hi_i]``."""
    n = len(bounds)
    rows = []
    for i, (lo, hi) in enumerate(bounds):
        e = [1 if j == i else 0 for j in range(n)]
        rows.append(ge(e, lo))
        rows.append(le(e, hi))
    return rows


def _same_dim(*dims: int) -> None:
    if len(set(dims)) > 1:
        raise DimensionMismatch(f"dimensions disagree: {sorted(set(dims))}")


def _common_dim(constraints: Sequence[LinearConstraint], dim: int | None = None) -> int:
    dims = {c.dim for c in constraints}
    if dim is not None:
        dims.add(dim)
    if len(dims) > 1:
        raise DimensionMismatch(f"constraint dimensions disagree: {sorted(dims)}")
    if not dims:
        raise DimensionMismatch("cannot infer the dimension of an empty system")
    return dims.pop()


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: Status
    value: Fraction | None = None
    witness: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    @property
    def feasible(self) -> bool:
        return self.status is not Status.INFEASIBLE


# ---------------------------------------------------------------------------
# simplex on the standard form  min c.y  s.t.  A y = b,  y >= 0


class _Tableau:
    """Dense tableau with a reduced-cost row; ``z[-1]`` is minus the objective."""

    def __init__(self, rows, basis, z):
        self.rows = rows
        self.basis = basis
        self.z = z

    def pivot(self, r, s):
        row = self.rows[r]
        p = row[s]
        if p != 1:
            self.rows[r] = row = [v / p for v in row]
        nz = [j for j, v in enumerate(row) if v]
        for i, other in enumerate(self.rows):
            f = other[s]
            if i != r and f:
                for j in nz:
                    other[j] -= f * row[j]
        f = self.z[s]
        if f:
            for j in nz:
                self.z[j] -= f * row[j]
        self.basis[r] = s

    def run(self, ncols):
        """Bland's rule: lowest-index entering column, lowest-index leaving tie-break."""
        z = self.z
        while True:
            s = next((j for j in range(ncols) if z[j] < 0), None)
            if s is None:
                return Status.OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                if row[s] > 0:
                    key = (row[-1] / row[s], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return Status.UNBOUNDED
            self.pivot(best[1], s)


def _simplex(A: list[list[Fraction]], b: list[Fraction], c: list[Fraction]):
    """Two-phase simplex for ``min c.y`` s.t. ``A y = b``, ``y >= 0``.

    Returns ``(status, y, value)``; ``y`` and ``value`` are None unless the
    status is optimal.
    """
    m, n = len(A), len(c)
    zero, one = Fraction(0), Fraction(1)
    rows = []
    for i, (row, rhs) in enumerate(zip(A, b)):
        row = list(row)
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        rows.append(row + [one if k == i else zero for k in range(m)] + [rhs])

    # phase 1: minimise the sum of the artificial variables
    z = [zero] * (n + m + 1)
    for j in list(range(n)) + [-1]:
        z[j] = -sum((r[j] for r in rows), zero)
    tab = _Tableau(rows, list(range(n, n + m)), z)
    tab.run(n)
    if tab.z[-1] != 0:
        return Status.INFEASIBLE, None, None

    # drive artificials out of the basis; rows where that fails are redundant
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= n:
            j = next((j for j in range(n) if tab.rows[i][j] != 0), None)
            if j is None:
                del tab.rows[i]
                del tab.basis[i]
                continue
            tab.pivot(i, j)
        i += 1

    tab.rows = [r[:n] + [r[-1]] for r in tab.rows]
    z = list(c) + [zero]
    for row, bv in zip(tab.rows, tab.basis):
        cb = c[bv]
        if cb:
            for j in range(n + 1):
                z[j] -= cb * row[j]
    tab.z = z
    if tab.run(n) is Status.UNBOUNDED:
        return Status.UNBOUNDED, None, None
    y = [zero] * n
    for row, bv in zip(tab.rows, tab.basis):
        y[bv] = row[-1]
    return Status.OPTIMAL, y, sum((ci * yi for ci, yi in zip(c, y)), zero)


def lp_nonneg(c, A_le=(), b_le=(), A_eq=(), b_eq=()):
    """``min c.y`` over ``y >= 0`` with ``A_le y <= b_le`` and ``A_eq y = b_eq``.

    Internal workhorse for the generator-weight LPs (membership in finitely
    generated sets, multiplier searches), where every variable is a
    nonnegative weight anyway.
    """
    n = len(c)
    k = len(A_le)
    A = [list(map(rat, row)) + [Fraction(int(i == j)) for j in range(k)] for i, row in enumerate(A_le)]
    A += [list(map(rat, row)) + [Fraction(0)] * k for row in A_eq]
    b = [rat(v) for v in b_le] + [rat(v) for v in b_eq]
    cost = [rat(v) for v in c] + [Fraction(0)] * k
    status, y, value = _simplex(A, b, cost)
    if status is not Status.OPTIMAL:
        return LPResult(status)
    return LPResult(status, value, tuple(y[:n]))


def lp_solve(objective: AffineForm, constraints: Sequence[LinearConstraint], sense: str = "min") -> LPResult:
    """Optimise an affine objective over ``{x : constraints}`` exactly.

    Only LE and EQ rows are accepted; use :func:`lp_strict_feasible` for
    strict inequalities.
    """
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', not {sense!r}")
    n = _common_dim(constraints, objective.dim)
    les = [c for c in constraints if c.rel is Rel.LE]
    eqs = [c for c in constraints if c.rel is Rel.EQ]
    if len(les) + len(eqs) != len(constraints):
        raise ValueError("lp_solve accepts LE and EQ rows only")
    k = len(les)
    A, b = [], []
    # variables: x+ (n), x- (n), slacks (k)
    for i, con in enumerate(les):
        a = list(con.form.coeffs)
        A.append(a + [-v for v in a] + [Fraction(int(i == j)) for j in range(k)])
        b.append(-con.form.const)
    for con in eqs:
        a = list(con.form.coeffs)
        A.append(a + [-v for v in a] + [Fraction(0)] * k)
        b.append(-con.form.const)
    sign = 1 if sense == "min" else -1
    cx = [sign * v for v in objective.coeffs]
    c = cx + [-v for v in cx] + [Fraction(0)] * k
    status, y, value = _simplex(A, b, c)
    if status is not Status.OPTIMAL:
        return LPResult(status)
    x = tuple(y[i] - y[n + i] for i in range(n))
    return LPResult(status, objective(x), x)


def lp_strict_feasible(constraints: Sequence[LinearConstraint], dim: int | None = None) -> LPResult:
    """Find a rational point satisfying every row, LT rows strictly.

    A common slack ``s`` (capped at 1) is added to each LT row and
    maximised; the system is strictly feasible iff the optimum is positive.
    An empty system needs ``dim`` to know its ambient space.
    """
    n = _common_dim(constraints, dim)
    strict = [c for c in constraints if c.rel is Rel.LT]
    lifted = [c.pad(after=1) for c in constraints if c.rel is not Rel.LT]
    if not strict:
        res = lp_solve(AffineForm.constant(n + 1, 0), lifted + [eq(_unit(n + 1, n), 0)])
        if not res.optimal:
            return LPResult(Status.INFEASIBLE)
        return LPResult(Status.OPTIMAL, Fraction(0), res.witness[:n])
    for c in strict:
        f = c.form
        lifted.append(LinearConstraint(AffineForm(f.coeffs + (Fraction(1),), f.const), Rel.LE))
    lifted.append(le(_unit(n + 1, n), 1))
    res = lp_solve(AffineForm.coordinate(n + 1, n), lifted, sense="max")
    if not res.optimal or res.value <= 0:
        return LPResult(Status.INFEASIBLE)
    return LPResult(Status.OPTIMAL, res.value, res.witness[:n])


def _unit(n: int, i: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(j == i)) for j in range(n))


def is_feasible(constraints: Sequence[LinearConstraint], dim: int | None = None) -> bool:
    return lp_strict_feasible(constraints, dim).feasible


def implies(system: Sequence[LinearConstraint], row: LinearConstraint, dim: int | None = None) -> bool:
    """Decide whether every point of ``system`` satisfies ``row``."""
    n = _common_dim(list(system) + [row], dim)
    f = row.form
    if row.rel is Rel.EQ:
        return implies(system, LinearConstraint(f, Rel.LE), n) and implies(system, LinearConstraint(-f, Rel.LE), n)
    # violation of f <= 0 is f > 0; violation of f < 0 is f >= 0
    negation = LinearConstraint(-f, Rel.LT if row.rel is Rel.LE else Rel.LE)
    return not is_feasible(list(system) + [negation], n)


# ---------------------------------------------------------------------------
# Fourier-Motzkin projection


def fm_project(constraints: Sequence[LinearConstraint], keep: Sequence[int]) -> list[LinearConstraint]:
    """Project ``{x : constraints}`` onto the coordinates listed in ``keep``.

    Equality rows eliminate variables by substitution, the rest by
    Fourier-Motzkin pairing.  The result lives in ``R^len(keep)`` with
    coordinates in ``keep`` order; redundant rows are removed by LP.
    """
    for c in constraints:
        if not isinstance(c, LinearConstraint):
            raise TypeError(f"fm_project needs linear constraints, got {type(c).__name__}")
        if c.rel is Rel.LT:
            raise ValueError("fm_project accepts LE and EQ rows only")
    n = _common_dim(constraints)
    keep = list(keep)
    if any(not 0 <= k < n for k in keep) or len(set(keep)) != len(keep):
        raise DimensionMismatch(f"bad coordinate selection {keep} for dimension {n}")

    rows = [(list(c.form.coeffs), c.form.const, c.rel) for c in constraints]
    for j in [j for j in range(n) if j not in keep]:
        pivot = next((r for r in rows if r[2] is Rel.EQ and r[0][j] != 0), None)
        if pivot is not None:
            pa, pc, _ = pivot
            out = []
            for r in rows:
                if r is pivot:
                    continue
                a, c, rel = r
                f = a[j] / pa[j]
                if f:
                    a = [x - f * y for x, y in zip(a, pa)]
                    c = c - f * pc
                out.append((a, c, rel))
            rows = out
        else:
            pos = [r for r in rows if r[0][j] > 0]
            neg = [r for r in rows if r[0][j] < 0]
            out = [r for r in rows if r[0][j] == 0]
            for pa, pcst, _ in pos:
                for na, ncst, _ in neg:
                    u, w = -na[j], pa[j]
                    out.append(([u * x + w * y for x, y in zip(pa, na)], u * pcst + w * ncst, Rel.LE))
            rows = out
        rows = _tidy(rows)
        if rows is None:
            return [LinearConstraint(AffineForm.constant(len(keep), 1), Rel.LE)]

    result = [LinearConstraint(AffineForm([a[k] for k in keep], c), rel) for a, c, rel in rows]
    return remove_redundant(result, len(keep))


def _tidy(rows):
    """Drop trivial and duplicate rows; None signals a contradiction."""
    seen = set()
    out = []
    for a, c, rel in rows:
        if not any(a):
            if (rel is Rel.LE and c > 0) or (rel is Rel.EQ and c != 0):
                return None
            continue
        con = LinearConstraint(AffineForm(a, c), rel).normalized()
        key = (con.form, con.rel)
        if key in seen:
            continue
        seen.add(key)
        out.append((list(con.form.coeffs), con.form.const, rel))
    return out


def remove_redundant(constraints: Sequence[LinearConstraint], dim: int | None = None) -> list[LinearConstraint]:
    """Drop every LE row implied by the remaining rows (first-to-last)."""
    if not constraints:
        return []
    n = _common_dim(constraints, dim)
    rows = list(constraints)
    i = 0
    while i < len(rows):
        row = rows[i]
        rest = rows[:i] + rows[i + 1:]
        if row.rel is Rel.LE and rest and implies(rest, row, n):
            rows = rest
        else:
            i += 1
    return rows


# ---------------------------------------------------------------------------
# Gaussian elimination


@dataclass(frozen=True)
class LinearSolution:
    """Solution set of a linear equation system.

    ``kind`` is ``"unique"``, ``"affine"`` or ``"inconsistent"``; for the
    first two ``point`` is a particular solution and ``directions`` a basis
    of the null space (empty when unique).
    """

    kind: str
    point: tuple[Fraction, ...] | None = None
    directions: tuple[tuple[Fraction, ...], ...] = field(default_factory=tuple)


def solve_linear_system(rows: Sequence[AffineForm], dim: int | None = None) -> LinearSolution:
    """Solve ``form(x) = 0`` for every form by exact Gaussian elimination."""
    dims = {r.dim for r in rows}
    if dim is not None:
        dims.add(dim)
    if len(dims) != 1:
        raise DimensionMismatch(f"equation dimensions disagree or are unknown: {sorted(dims)}")
    n = dims.pop()
    M = [list(r.coeffs) + [-r.const] for r in rows]
    pivots = []
    r = 0
    for col in range(n):
        p = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][col]
        M[r] = [v / pv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col]:
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(col)
        r += 1
    if any(not any(row[:n]) and row[n] != 0 for row in M):
        return LinearSolution("inconsistent")
    point = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        point[col] = M[i][n]
    free = [j for j in range(n) if j not in pivots]
    dirs = []
    for fj in free:
        d = [Fraction(0)] * n
        d[fj] = Fraction(1)
        for i, col in enumerate(pivots):
            d[col] = -M[i][fj]
        dirs.append(tuple(d))
    return LinearSolution("unique" if not dirs else "affine", tuple(point), tuple(dirs))
