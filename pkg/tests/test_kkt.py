from fractions import Fraction as F

import pytest

from gen import panel, random_box, random_carving, rng_for
from nearcvx.errors import HypothesisViolated, InfeasiblePoint, QuadraticConstraintError, UnsupportedShape
from nearcvx.exact import AffineForm, LinearConstraint, Rel, box, dot, eq, ge, le
from nearcvx.functions import MaxAffine, NCFunction, Override, Quadratic, affine, lsc_hull
from nearcvx.kkt import (
    ConstrainedProblem,
    SublevelDescription,
    assemble_feasible_set,
    check_slater,
    closure_omega1,
    kkt_certify_associated,
    kkt_transfer_original,
    normal_cone_sublevel,
    solve_constrained,
)
from nearcvx.opt import AssociatedProblem, fermat_check_associated
from nearcvx.repro import load_example
from nearcvx.sets import CarvedPolyhedron, Cell, FGSet, Polyhedron, fg_cone, fg_equal, fg_sum, member, normal_cone

SQUARE = Polyhedron(2, box([(0, 1), (0, 1)]))
ZERO = NCFunction.on(affine((0, 0)))


def worked():
    return load_example("worked_example")


def test_worked_slater_witness():
    w = check_slater(worked())
    assert w and w.x0 == (F(1, 2), F(1, 2))
    assert w.margins == (F(3, 4),)
    assert w.in_ri_dom_f


def test_quadratic_constraint_needs_a_hint():
    cp = worked()
    bare = ConstrainedProblem(cp.objective, cp.geometric_set, cp.constraints)
    with pytest.raises(UnsupportedShape):
        check_slater(bare)
    assert check_slater(bare, (F(1, 2), F(1, 2)))
    assert not check_slater(bare, (3, 3))


def test_slater_refutation():
    cp = ConstrainedProblem(ZERO, CarvedPolyhedron(Polyhedron(2, [ge((1, 0), 0)])), (NCFunction.on(affine((1, 0))),))
    r = check_slater(cp)
    assert not r and r.reason


def test_slater_found_without_hint():
    g = NCFunction.on(MaxAffine((AffineForm((1, 1), -1), AffineForm((-1, 0)))))
    cp = ConstrainedProblem(ZERO, CarvedPolyhedron(SQUARE), (g,))
    w = check_slater(cp)
    assert w and g.base(w.x0) < 0 and SQUARE.ri_member(w.x0)


def test_closure_of_constraint_set():
    g = NCFunction.on(MaxAffine((AffineForm((1, 0), -1), AffineForm((-1, 0)))))
    cp = ConstrainedProblem(ZERO, CarvedPolyhedron.full(2), (g,))
    assert closure_omega1(cp).equivalent(Polyhedron(2, [ge((1, 0), 0), le((1, 0), 1)]))
    sub = closure_omega1(worked())
    assert isinstance(sub, SublevelDescription)
    assert sub.contains((F(1, 2), 0)) and not sub.contains((0, 1))


def test_closure_keeps_domain_rows_and_drops_overrides():
    dom = Polyhedron(2, box([(-1, 1), (-1, 1)]))
    corner = Cell(2, list(dom.constraints) + [eq((1, 0), 1), eq((0, 1), 1)])
    g = NCFunction(affine((1, 1), -1), CarvedPolyhedron(dom), (Override(corner, 5),))
    cp = ConstrainedProblem(ZERO, CarvedPolyhedron.full(2), (g,))
    clo = closure_omega1(cp)
    gbar = lsc_hull(g)
    for i in range(-6, 7):
        for j in range(-6, 7):
            x = (F(i, 4), F(j, 4))
            assert clo.contains(x) == (gbar(x) <= 0)


def test_sublevel_normal_cone_examples():
    cp = ConstrainedProblem(ZERO, CarvedPolyhedron.full(2), (NCFunction.on(affine((1, 0))),))
    assert fg_equal(normal_cone_sublevel(cp, (0, 5)), FGSet.cone(2, [(1, 0)]))
    assert fg_equal(normal_cone_sublevel(worked(), (F(1, 2), 0)), FGSet.zero(2))
    two = ConstrainedProblem(ZERO, CarvedPolyhedron.full(2), (NCFunction.on(affine((1, 0))), NCFunction.on(affine((0, 1)))))
    expected = normal_cone(Polyhedron(2, [le((1, 0), 0), le((0, 1), 0)]), (0, 0))
    assert fg_equal(normal_cone_sublevel(two, (0, 0)), expected)


def test_continuity_is_required():
    g = NCFunction(affine((1, 0)), CarvedPolyhedron(Polyhedron(2, [le((0, 1), 0)])))
    cp = ConstrainedProblem(ZERO, CarvedPolyhedron.full(2), (g,))
    with pytest.raises(HypothesisViolated) as e:
        normal_cone_sublevel(cp, (0, 0))
    assert e.value.name == "continuity"


def test_worked_kkt_certificates():
    cp = worked()
    for y in (0, F(1, 2), 1):
        c = kkt_certify_associated(cp, (F(1, 2), y))
        assert c and c.lambdas == (0,) and c.verify(cp)
    for x in [(0, 0), (1, 1)]:
        assert not kkt_certify_associated(cp, x)


def test_unconstrained_certificate():
    cp = ConstrainedProblem(NCFunction.on(Quadratic(((1, 0), (0, 1)), (0, 0))), CarvedPolyhedron.full(2), ())
    c = kkt_certify_associated(cp, (0, 0))
    assert c and c.lambdas == () and c.verify(cp)
    assert not kkt_certify_associated(cp, (1, 0))


def test_active_constraint_gets_a_positive_multiplier():
    # min -x1 subject to x1 - 1 <= 0: lambda = 1 at x1 = 1
    cp = ConstrainedProblem(NCFunction.on(affine((-1, 0))), CarvedPolyhedron.full(2), (NCFunction.on(affine((1, 0), -1)),))
    c = kkt_certify_associated(cp, (1, 7))
    assert c.lambdas == (1,) and c.active == (0,) and c.verify(cp)


def test_certificate_verification_catches_tampering():
    cp = ConstrainedProblem(NCFunction.on(affine((-1, 0))), CarvedPolyhedron.full(2), (NCFunction.on(affine((1, 0), -1)),))
    c = kkt_certify_associated(cp, (1, 0))
    bad = type(c)(c.point, (2,), c.active, c.objective_subgradient, c.objective_weights, c.selections, c.subgradients, c.normal)
    assert not bad.verify(cp)


def test_transfer_to_original():
    cp = worked()
    rep = kkt_transfer_original(cp, (F(1, 2), F(3, 4)))
    assert rep.outcome and rep.outcome.lambdas == (0,) and rep.in_S is True
    with pytest.raises(InfeasiblePoint):
        kkt_transfer_original(cp, (F(1, 2), 0))


def test_transfer_names_the_failing_equality():
    p = load_example("ex3_4")
    cp = ConstrainedProblem(p.objective, p.feasible_set, ())
    with pytest.raises(HypothesisViolated) as e:
        kkt_transfer_original(cp, (0, 0))
    assert e.value.name == "f-closure-equality"


def test_assembled_feasible_set():
    omega0 = CarvedPolyhedron(SQUARE, (Cell(2, list(SQUARE.constraints) + [eq((1, 0), 0), eq((0, 1), 0)]),))
    cp = ConstrainedProblem(ZERO, omega0, (NCFunction.on(affine((1, 0), F(-1, 2))),))
    D = assemble_feasible_set(cp)
    for i in range(-2, 7):
        for j in range(-2, 7):
            x = (F(i, 4), F(j, 4))
            assert member(D, x) == (member(omega0, x) and x[0] <= F(1, 2))
    assert assemble_feasible_set(ConstrainedProblem(ZERO, omega0, ())) is omega0
    with pytest.raises(QuadraticConstraintError):
        assemble_feasible_set(worked())


def test_worked_solve():
    r = solve_constrained(worked())
    assert r.value == F(-1, 4)
    assert r.S1.equivalent(Polyhedron(2, box([(0, 1), (0, 1)]) + [eq((1, 0), F(1, 2))]))
    assert not r.S.contains((F(1, 2), 0))
    assert r.S.contains((F(1, 2), F(1, 100))) and r.S.contains((F(1, 2), 1))


def _random_cp(seed):
    rng = rng_for("kkt", seed)
    bounds = random_box(rng)
    omega0 = random_carving(rng, Polyhedron(2, box(bounds)))
    c = tuple(F(a + b, 2) for a, b in bounds)
    gs = []
    for _ in range(rng.randint(1, 2)):
        pieces = []
        for _ in range(rng.randint(1, 3)):
            a = tuple(rng.randint(-3, 3) for _ in range(2))
            pieces.append(AffineForm(a, -dot(a, c) - F(rng.randint(1, 4), 4)))
        gs.append(NCFunction.on(MaxAffine(tuple(pieces))))
    f = NCFunction.on(MaxAffine(tuple(AffineForm(tuple(rng.randint(-2, 2) for _ in range(2)), rng.randint(-2, 2)) for _ in range(rng.randint(1, 3)))))
    return ConstrainedProblem(f, omega0, tuple(gs)), rng


def _closed_feasible_set(cp):
    rows = list(cp.geometric_set.hull.constraints)
    for g in cp.constraints:
        rows += [LinearConstraint(p, Rel.LE) for p in g.base.pieces]
    return Polyhedron(cp.dim, rows)


@pytest.mark.parametrize("seed", range(40))
def test_constraint_normal_cones_add_up(seed):
    cp, rng = _random_cp(seed)
    Dbar = _closed_feasible_set(cp)
    for x in panel(rng, Dbar, count=3):
        lhs = normal_cone(Dbar, x)
        rhs = fg_sum(normal_cone(cp.geometric_set.hull, x), normal_cone_sublevel(cp, x))
        assert fg_equal(lhs, rhs)


@pytest.mark.parametrize("seed", range(40))
def test_kkt_agrees_with_fermat_on_the_assembled_set(seed):
    cp, rng = _random_cp(seed)
    Dbar = _closed_feasible_set(cp)
    ap = AssociatedProblem(lsc_hull(cp.objective), Dbar)
    for x in panel(rng, Dbar, count=3):
        c = kkt_certify_associated(cp, x)
        assert bool(c) == bool(fermat_check_associated(ap, x))
        if c:
            assert c.verify(cp)


@pytest.mark.parametrize("seed", range(30))
def test_cone_of_union_is_sum_of_cones(seed):
    rng = rng_for("cone-co", seed)
    families = [FGSet(2, [tuple(rng.randint(-3, 3) for _ in range(2)) for _ in range(rng.randint(1, 3))]) for _ in range(rng.randint(1, 3))]
    union = FGSet(2, [p for S in families for p in S.points])
    total = FGSet.zero(2)
    for S in families:
        total = fg_sum(total, fg_cone(S))
    assert fg_equal(fg_cone(union), total)
