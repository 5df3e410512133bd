"""Brute-force evidence: grids, membership oracles and dyadic segment probes.

Nothing here certifies anything.  Brackets come from exact evaluation on
rational grids plus a Lipschitz bound of the base, and they are only as
good as the assumption that the grid sees the set; the exact modules
remain the authority.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Sequence

from .errors import DimensionMismatch, InfeasiblePoint
from .exact import AffineForm, box, fmt_vec, lp_solve, rat, vec
from .functions import INF, NCFunction, evaluate
from .sets import CarvedPolyhedron, Polyhedron, member

# ---------------------------------------------------------------------------
# membership oracles


class OracleSet:
    dim: int

    def contains(self, x) -> bool:
        raise NotImplementedError

    def __contains__(self, x) -> bool:
        return self.contains(vec(x))

    def __or__(self, other):
        return Union(self, other)

    def __and__(self, other):
        return Intersection(self, other)

    def __sub__(self, other):
        return Intersection(self, Complement(other))


@dataclass(frozen=True)
class HalfSpace(OracleSet):
    """``a.x <= b``."""

    a: tuple
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", vec(self.a))
        object.__setattr__(self, "b", rat(self.b))

    @property
    def dim(self):
        return len(self.a)

    def contains(self, x):
        return sum(p * q for p, q in zip(self.a, x)) <= self.b


@dataclass(frozen=True)
class Ball(OracleSet):
    """Euclidean ball ``|x - c|^2 <= r2`` (or ``<`` when open)."""

    center: tuple
    r2: Fraction
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "center", vec(self.center))
        object.__setattr__(self, "r2", rat(self.r2))

    @property
    def dim(self):
        return len(self.center)

    def contains(self, x):
        d2 = sum((p - q) ** 2 for p, q in zip(x, self.center))
        return d2 <= self.r2 if self.closed else d2 < self.r2


@dataclass(frozen=True)
class Rationals(OracleSet):
    """``Q^n``: every rational point belongs."""

    dim: int = 1

    def contains(self, x):
        return all(isinstance(t, (int, Fraction)) for t in x)


@dataclass(frozen=True)
class IntervalProduct(OracleSet):
    """Product of closed intervals; ``None`` marks an unbounded side."""

    bounds: tuple

    @property
    def dim(self):
        return len(self.bounds)

    def contains(self, x):
        return all((lo is None or t >= lo) and (hi is None or t <= hi) for t, (lo, hi) in zip(x, self.bounds))


@dataclass(frozen=True)
class Complement(OracleSet):
    inner: OracleSet

    @property
    def dim(self):
        return self.inner.dim

    def contains(self, x):
        return not self.inner.contains(x)


@dataclass(frozen=True)
class Union(OracleSet):
    parts: tuple

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))

    @property
    def dim(self):
        return self.parts[0].dim

    def contains(self, x):
        return any(p.contains(x) for p in self.parts)


@dataclass(frozen=True)
class Intersection(OracleSet):
    parts: tuple

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))

    @property
    def dim(self):
        return self.parts[0].dim

    def contains(self, x):
        return all(p.contains(x) for p in self.parts)


@dataclass(frozen=True)
class Product(OracleSet):
    first: OracleSet
    second: OracleSet

    @property
    def dim(self):
        return self.first.dim + self.second.dim

    def contains(self, x):
        k = self.first.dim
        return self.first.contains(x[:k]) and self.second.contains(x[k:])


@dataclass(frozen=True)
class CarvedOracle(OracleSet):
    """A carved polyhedron seen through its membership test."""

    omega: CarvedPolyhedron

    @property
    def dim(self):
        return self.omega.dim

    def contains(self, x):
        return member(self.omega, x)


def as_oracle(s) -> OracleSet:
    if isinstance(s, OracleSet):
        return s
    if isinstance(s, (CarvedPolyhedron, Polyhedron)):
        return CarvedOracle(s if isinstance(s, CarvedPolyhedron) else CarvedPolyhedron(s))
    raise TypeError(f"no membership oracle for {type(s).__name__}")


# ---------------------------------------------------------------------------
# Ho witness test


@dataclass(frozen=True)
class FoundWitness:
    t: Fraction

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NoneUpTo:
    K: int

    def __bool__(self):
        return False


def ho_witness_test(omega, x, y, K: int = 30) -> FoundWitness | NoneUpTo:
    """First dyadic ``t = 2^-k`` (``k <= K``) with ``x + t(y - x)`` in ``omega``."""
    oracle = as_oracle(omega)
    x, y = vec(x), vec(y)
    if len(x) != oracle.dim or len(y) != oracle.dim:
        raise DimensionMismatch("points and set must share a dimension")
    for name, p in (("x", x), ("y", y)):
        if not oracle.contains(p):
            raise InfeasiblePoint(f"endpoint-not-in-set: {name} = {fmt_vec(p)}")
    for k in range(1, K + 1):
        t = Fraction(1, 2**k)
        if oracle.contains(tuple(a + t * (b - a) for a, b in zip(x, y))):
            return FoundWitness(t)
    return NoneUpTo(K)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    box: tuple
    step: Fraction
    levels: int = 1
    # local minimality compares against grid points up to this many steps away
    reach: int = 1

    def __post_init__(self):
        object.__setattr__(self, "box", tuple((rat(lo), rat(hi)) for lo, hi in self.box))
        object.__setattr__(self, "step", rat(self.step))
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.levels < 1:
            raise ValueError("need at least one refinement level")
        if self.reach < 1:
            raise ValueError("reach must be at least one step")
        if any(lo > hi for lo, hi in self.box):
            raise ValueError("empty grid box")

    @property
    def dim(self) -> int:
        return len(self.box)

    def steps(self) -> list[Fraction]:
        return [self.step / 2**k for k in range(self.levels)]

    @property
    def radius(self) -> Fraction:
        return max(max(abs(lo), abs(hi)) for lo, hi in self.box)


def _axis(lo, hi, h):
    n = math.floor((hi - lo) / h)
    return [lo + k * h for k in range(n + 1)]


def grid_points(bounds, h) -> list[tuple[Fraction, ...]]:
    return list(iproduct(*(_axis(lo, hi, h) for lo, hi in bounds)))


def _lipschitz(f: NCFunction, radius) -> Fraction:
    return rat(f.base.lipschitz(radius))


def _dist(x, y) -> Fraction:
    return max(abs(a - b) for a, b in zip(x, y))


@dataclass(frozen=True)
class Bracket:
    lo: object
    hi: object

    def __contains__(self, v) -> bool:
        return self.lo <= v <= self.hi

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class LiminfResult:
    bracket: Bracket
    levels: tuple


def grid_liminf(f: NCFunction, y, spec: GridSpec) -> LiminfResult:
    """Bracket ``liminf_{x -> y} f(x)`` from grids shrinking around ``y``.

    Level ``k`` looks at the points ``y + h z`` with ``|z|_inf <= 2`` and
    ``h = step / 2^k``.  With ``L`` a Lipschitz bound of the base, every
    finite grid value gives ``f(x) - L|x-y| <= fbar(y) <= f(x) + L|x-y|``
    as long as the grid hits non-override points of the domain.  Brackets
    are intersected across levels; when the finest ball holds no finite
    value, ``y`` is taken to be outside the closed domain.
    """
    y = vec(y)
    if len(y) != f.dim:
        raise DimensionMismatch("point and function dimensions differ")
    L = _lipschitz(f, max(abs(t) for t in y) + 2 * spec.step)
    lo, hi = -INF, INF
    per_level = []
    finite_at_finest = False
    for h in spec.steps():
        vals = []
        for z in iproduct(range(-2, 3), repeat=f.dim):
            x = tuple(a + h * b for a, b in zip(y, z))
            v = evaluate(f, x)
            if v != INF:
                vals.append((v, _dist(x, y)))
        finite_at_finest = bool(vals)
        if vals:
            lo = max(lo, min(v - L * d for v, d in vals))
            hi = min(hi, min(v + L * d for v, d in vals))
        per_level.append(Bracket(lo, hi))
    if not finite_at_finest:
        return LiminfResult(Bracket(INF, INF), tuple(per_level))
    return LiminfResult(Bracket(lo, hi), tuple(per_level))


def _warn_ri(D, spec: GridSpec):
    w = D.hull.ri_witness() if isinstance(D, CarvedPolyhedron) else D.ri_witness()
    if not all(lo <= t <= hi for t, (lo, hi) in zip(w, spec.box)):
        warnings.warn("grid box does not contain a relative-interior point of D", stacklevel=3)


@dataclass(frozen=True)
class GridMinResult:
    bracket: Bracket
    candidates: tuple


def grid_min(f: NCFunction, D, spec: GridSpec) -> GridMinResult:
    """Bracket ``min f over D`` from the grid values.

    ``hi`` is the smallest grid value.  ``lo`` subtracts ``L * h``: a
    minimiser is assumed to have a grid neighbour within ``h`` where ``f``
    equals its base.
    """
    _warn_ri(D, spec)
    L = _lipschitz(f, spec.radius)
    lo, hi = -INF, INF
    cands = ()
    for h in spec.steps():
        best, arg = INF, []
        for x in grid_points(spec.box, h):
            if not member(D, x):
                continue
            v = evaluate(f, x)
            if v < best:
                best, arg = v, [x]
            elif v == best and v != INF:
                arg.append(x)
        if best == INF:
            return GridMinResult(Bracket(INF, INF), ())
        lo = max(lo, best - L * h)
        hi = min(hi, best)
        cands = tuple(arg)
    return GridMinResult(Bracket(lo, hi), cands)


@dataclass(frozen=True)
class LocalMinimum:
    point: tuple
    value: object


def _neighbours(p, h, reach=1):
    for z in iproduct(range(-reach, reach + 1), repeat=len(p)):
        if any(z):
            yield tuple(a + h * b for a, b in zip(p, z))


def grid_local_minima(f: NCFunction, D, spec: GridSpec) -> list[LocalMinimum]:
    """Grid points of ``D`` no larger than any grid point of ``D`` within ``spec.reach`` steps.

    Reach 1 is the king-move neighbourhood.  Near a kink or a removed cell
    the descent directions can be steep, e.g. (1, -5), and only a wider
    reach sees them; the scale of the grid does not help because the
    function is conical there.  Uses the coarsest step.  Points where ``f`` is +inf are returned too,
    with value ``INF``, so callers can count them separately.
    """
    _warn_ri(D, spec)
    h = spec.step
    values = {}
    for x in grid_points(spec.box, h):
        if member(D, x):
            values[x] = evaluate(f, x)
    out = []
    for x, v in values.items():
        if all(values[q] >= v for q in _neighbours(x, h, spec.reach) if q in values):
            out.append(LocalMinimum(x, v))
    return out


@dataclass(frozen=True)
class MinimumCluster:
    """King-adjacent grid minima; ``value`` is the smallest, bracketed by ``[lo, hi]``."""

    points: tuple
    value: object
    representative: tuple
    lo: object
    hi: object


def local_minimum_clusters(minima: Sequence[LocalMinimum], spec: GridSpec, f: NCFunction | None = None) -> list[MinimumCluster]:
    h = spec.step
    L = _lipschitz(f, spec.radius) if f is not None else None
    by_point = {m.point: m for m in minima}
    seen, clusters = set(), []
    for m in minima:
        if m.point in seen:
            continue
        stack, comp = [m.point], []
        seen.add(m.point)
        while stack:
            p = stack.pop()
            comp.append(by_point[p])
            for q in _neighbours(p, h):
                if q in by_point and q not in seen:
                    seen.add(q)
                    stack.append(q)
        best = min(comp, key=lambda c: c.value)
        lo = best.value - L * h if L is not None else best.value
        clusters.append(MinimumCluster(tuple(sorted(c.point for c in comp)), best.value, best.point, lo, best.value))
    return sorted(clusters, key=lambda c: (c.value, c.representative))


# ---------------------------------------------------------------------------
# near-convexity evidence


@dataclass(frozen=True)
class NearConvexityEvidence:
    """``flagged`` means a hole sits at the midpoint of two interior points."""

    flagged: bool
    witness: tuple | None
    interior_points: int
    holes: int


def sampled_near_convexity_check(omega, spec: GridSpec) -> NearConvexityEvidence:
    """Look for a grid ball fully outside ``omega`` midway between two grid balls fully inside.

    Near convexity forces ``ri conv omega`` into ``omega``, so such a hole
    refutes it (up to the grid resolution).  A clean run proves nothing.
    """
    oracle = as_oracle(omega)
    h = spec.step
    lows = [lo for lo, _ in spec.box]
    sizes = [len(_axis(lo, hi, h)) for lo, hi in spec.box]
    cache = {}

    def inside(k):
        if k not in cache:
            cache[k] = oracle.contains(tuple(lo + h * i for lo, i in zip(lows, k)))
        return cache[k]

    def ball(k):
        return [tuple(i + d for i, d in zip(k, z)) for z in iproduct((-1, 0, 1), repeat=len(k))]

    idx = list(iproduct(*(range(s) for s in sizes)))
    interior = {k for k in idx if all(inside(q) for q in ball(k))}
    holes = [k for k in idx if not any(inside(q) for q in ball(k))]
    for m in holes:
        # partners a and 2m - a must both stay on the grid
        ranges = [range(max(0, 2 * i - s + 1), min(s - 1, 2 * i) + 1) for i, s in zip(m, sizes)]
        for a in iproduct(*ranges):
            b = tuple(2 * i - j for i, j in zip(m, a))
            if a in interior and b in interior:
                pts = tuple(tuple(lo + h * i for lo, i in zip(lows, k)) for k in (a, m, b))
                return NearConvexityEvidence(True, pts, len(interior), len(holes))
    return NearConvexityEvidence(False, None, len(interior), len(holes))


# ---------------------------------------------------------------------------
# rational sampling of polyhedra


def sample_points(P: Polyhedron, rng: random.Random, count: int, bound=10, den: int = 12) -> list[tuple[Fraction, ...]]:
    """Rational points of ``P`` (clipped to ``[-bound, bound]^n``).

    Vertices come from LPs with random integer objectives; samples are
    random convex combinations of them and the relative-interior witness.
    """
    n = P.dim
    Q = P.with_rows(box([(-bound, bound)] * n))
    anchors = [Q.ri_witness()]
    for _ in range(2 * n + 2):
        c = AffineForm(tuple(rng.randint(-3, 3) for _ in range(n)))
        res = lp_solve(c, Q.constraints)
        if res.optimal and res.witness not in anchors:
            anchors.append(res.witness)
    out = []
    for _ in range(count):
        w = [rng.randint(0, den) for _ in anchors]
        if not any(w):
            w[0] = 1
        s = sum(w)
        out.append(tuple(sum((Fraction(wi, s) * a[d] for wi, a in zip(w, anchors)), Fraction(0)) for d in range(n)))
    return out


__all__ = [
    "Ball",
    "Bracket",
    "CarvedOracle",
    "Complement",
    "FoundWitness",
    "GridMinResult",
    "GridSpec",
    "HalfSpace",
    "Intersection",
    "IntervalProduct",
    "LiminfResult",
    "LocalMinimum",
    "MinimumCluster",
    "NearConvexityEvidence",
    "NoneUpTo",
    "OracleSet",
    "Product",
    "Rationals",
    "Union",
    "as_oracle",
    "grid_liminf",
    "grid_local_minima",
    "grid_min",
    "grid_points",
    "ho_witness_test",
    "local_minimum_clusters",
    "sample_points",
    "sampled_near_convexity_check",
]
