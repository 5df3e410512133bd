import random
from fractions import Fraction as F

import pytest

from nearcvx.errors import InfeasiblePoint
from nearcvx.exact import box, eq, gt, lt
from nearcvx.functions import INF, NCFunction, affine, evaluate, lsc_hull
from nearcvx.opt import associate, solve_associated
from nearcvx.oracle import (
    Ball,
    CarvedOracle,
    FoundWitness,
    GridSpec,
    HalfSpace,
    IntervalProduct,
    NoneUpTo,
    Product,
    Rationals,
    grid_liminf,
    grid_local_minima,
    grid_min,
    grid_points,
    ho_witness_test,
    local_minimum_clusters,
    sample_points,
    sampled_near_convexity_check,
)
from nearcvx.repro import ho_examples, load_example
from nearcvx.sets import CarvedPolyhedron, Cell, Polyhedron

SQUARE = Polyhedron(2, box([(0, 1), (0, 1)]))
HO = {ex["name"]: ex for ex in ho_examples()}


@pytest.mark.parametrize(
    "name, expected",
    [("ex2_1", NoneUpTo(30)), ("ex2_2", NoneUpTo(30)), ("ex2_3", FoundWitness(F(1, 2))), ("ex2_4", FoundWitness(F(1, 8))), ("ex2_5", FoundWitness(F(1, 8)))],
)
def test_ho_verdicts(name, expected):
    ex = HO[name]
    assert ho_witness_test(ex["set"], ex["x"], ex["y"]) == expected


def test_slit_segment_never_reenters():
    # every dyadic point between (0,-1) and (0,1) lies on the removed slit
    ex = HO["ex2_1"]
    oracle = ex["set"]
    for k in range(1, 31):
        t = F(1, 2**k)
        p = tuple(a + t * (b - a) for a, b in zip(ex["x"], ex["y"]))
        assert not oracle.contains(p)


def test_endpoints_must_belong():
    with pytest.raises(InfeasiblePoint):
        ho_witness_test(Ball((0, 0), 1), (0, 0), (5, 0))


def test_oracle_combinators():
    ring = Ball((0, 0), 4) - Ball((0, 0), 1, closed=False)
    assert (1, 0) in ring and (0, 0) not in ring and (2, 0) in ring
    assert (F(1, 2), 0) in (HalfSpace((1, 0), 0) | Ball((1, 0), F(1, 4)))
    strip = Product(Rationals(1), IntervalProduct(((0, 1),)))
    assert (F(7, 3), 1) in strip and (0, 2) not in strip
    half = IntervalProduct(((0, None),))
    assert (10**6,) in half and (-1,) not in half
    carved = CarvedOracle(CarvedPolyhedron(SQUARE))
    assert (1, 1) in carved and (2, 0) not in carved


def test_corner_raised_liminf_collapses_to_zero():
    f = load_example("ex3_4").objective
    res = grid_liminf(f, (0, 0), GridSpec(((0, 1), (0, 1)), F(1, 8), levels=4))
    assert res.bracket.lo == 0 == res.bracket.hi
    assert evaluate(f, (0, 0)) == 1


def test_liminf_of_continuous_function_and_outside_point():
    f = NCFunction.on(affine((1, 2)))
    res = grid_liminf(f, (1, 1), GridSpec(((0, 2), (0, 2)), F(1, 4), levels=3))
    assert res.bracket.lo <= 3 <= res.bracket.hi
    g = NCFunction(affine((1, 0)), CarvedPolyhedron(SQUARE))
    assert grid_liminf(g, (3, 3), GridSpec(((0, 1), (0, 1)), F(1, 4))).bracket.lo == INF


@pytest.mark.parametrize("name", ["ex3_1", "ex3_2", "opt_vals", "ex3_4", "local_global_2"])
def test_liminf_brackets_shrink_and_hold_the_lsc_value(name):
    f = load_example(name).objective
    fbar = lsc_hull(f)
    spec = GridSpec(((-1, 1), (-1, 1)), F(1, 4), levels=4)
    rng = random.Random(name)
    for _ in range(10):
        y = (F(rng.randint(-4, 4), 4), F(rng.randint(-4, 4), 4))
        res = grid_liminf(f, y, spec)
        levels = res.levels
        for a, b in zip(levels, levels[1:]):
            assert a.lo <= b.lo and b.hi <= a.hi
        if fbar(y) == INF:
            assert res.bracket.lo == INF
        else:
            assert fbar(y) in res.bracket


def test_grid_min_examples():
    p = load_example("opt_vals")
    g = grid_min(p.objective, p.feasible_set, GridSpec(((0, 1), (0, 1)), F(1, 24)))
    assert F(1, 6) in g.bracket
    assert (0, F(2, 3)) in g.candidates
    lin = grid_min(NCFunction.on(affine((1, 0))), SQUARE, GridSpec(((0, 1), (0, 1)), F(1, 4)))
    assert lin.bracket.hi == 0


def test_grid_min_warns_when_box_misses_the_set():
    with pytest.warns(UserWarning):
        grid_min(NCFunction.on(affine((1, 0))), SQUARE, GridSpec(((5, 6), (5, 6)), F(1, 2)))


def test_grid_min_contains_associated_value_on_regular_corpus():
    for name in ("ex3_1", "ex3_4"):
        p = load_example(name)
        vbar = solve_associated(associate(p)).value
        assert vbar in grid_min(p.objective, p.feasible_set, GridSpec(((0, 1), (0, 1)), F(1, 8))).bracket


def test_two_local_minimum_clusters_without_regularity():
    p = load_example("opt_vals")
    spec = GridSpec(((0, 1), (0, 1)), F(1, 48))
    minima = grid_local_minima(p.objective, p.feasible_set, spec)
    clusters = local_minimum_clusters([m for m in minima if m.value != INF], spec, p.objective)
    assert len(clusters) == 2
    (a, b) = clusters
    assert a.lo <= F(1, 6) <= a.hi and b.lo <= F(1, 4) <= b.hi


def test_wider_reach_sees_steep_descent():
    # f = x2 - x1 on [-1,0] x [0,2] with the open right edge removed: at the
    # corner (0,2) every descent direction points down more steeply than 45 degrees
    edge = Cell(2, [eq((1, 0), 0), gt((0, 1), 0), lt((0, 1), 2)])
    D = CarvedPolyhedron(Polyhedron(2, box([(-1, 0), (0, 2)])), (edge,))
    f = NCFunction.on(affine((-1, 1)))
    king = grid_local_minima(f, D, GridSpec(((-1, 0), (0, 2)), F(1, 8)))
    assert (0, 2) in [m.point for m in king]
    wide = grid_local_minima(f, D, GridSpec(((-1, 0), (0, 2)), F(1, 8), reach=2))
    assert [m.point for m in wide] == [(0, 0)]


def test_grid_points_cover_the_box():
    pts = grid_points(((0, 1), (0, F(1, 2))), F(1, 4))
    assert len(pts) == 5 * 3
    assert (1, F(1, 2)) in pts


def test_near_convexity_evidence():
    spec = GridSpec(((-5, 5), (-5, 5)), F(1, 4))
    assert sampled_near_convexity_check(HO["ex2_4"]["set"], spec).flagged
    assert sampled_near_convexity_check(HO["ex2_5"]["set"], spec).flagged
    clean = sampled_near_convexity_check(CarvedOracle(CarvedPolyhedron(Polyhedron(2, box([(-2, 2), (-2, 2)])))), spec)
    assert not clean.flagged and clean.interior_points > 0


def test_samples_lie_in_the_polyhedron():
    rng = random.Random(3)
    for x in sample_points(SQUARE, rng, 50):
        assert SQUARE.contains(x)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(((0, 1),), 0)
    with pytest.raises(ValueError):
        GridSpec(((1, 0),), F(1, 2))
    with pytest.raises(ValueError):
        GridSpec(((0, 1),), F(1, 2), reach=0)
    assert GridSpec(((0, 1),), F(1, 2), levels=3).steps() == [F(1, 2), F(1, 4), F(1, 8)]
