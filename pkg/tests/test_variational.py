import random
from fractions import Fraction

import pytest

from ballspace import variational as var
from ballspace.balls import SelfMap
from ballspace.errors import DomainError, PreconditionError
from ballspace.scalar import INF, as_scalar
from ballspace.search import random_metric_space, random_ot_bifunction, random_space_for_ot
from ballspace.spaces import FiniteSemimetricSpace, min_b_constant


def line(n):
    return FiniteSemimetricSpace([f"p{i}" for i in range(n)], [[abs(i - j) for j in range(n)] for i in range(n)], "L")


def pairs_space(labels, pairs):
    n = len(labels)
    t = [[0] * n for _ in range(n)]
    for (a, b), v in pairs.items():
        i, j = labels.index(a), labels.index(b)
        t[i][j] = t[j][i] = v
    return FiniteSemimetricSpace(labels, t)


def line_instance():
    space = line(3)
    phi = var.ScalarFunction([2, 1, 0])
    return space, phi, var.ot_from_ck(space, phi, 1).bifunction


def random_instances(count, seed=0, max_n=6):
    for t in range(count):
        rng = random.Random(seed * 7919 + t)
        space = random_space_for_ot(rng, rng.randint(1, max_n))
        yield rng, space, random_ot_bifunction(rng, space)


def test_line_instance_balls_and_descent():
    space, phi, Phi = line_instance()
    assert var.ck_ball(space, phi, 1, 0).members == {0, 1, 2}
    assert var.ot_ball(space, Phi, 1).members == {1, 2}
    res = var.singleton_ball_descent(space, Phi, 0)
    assert res.point == 2 and res.trace == (0, 2)
    car = var.caristi_fixed_point(space, Phi, SelfMap((1, 2, 2)), 0)
    assert car.hypothesis_holds and car.point == 2


def test_caristi_hypothesis_failure_reports_witness():
    space, _, Phi = line_instance()
    res = var.caristi_fixed_point(space, Phi, SelfMap((0, 0, 2)), 0)  # f(p1) = p0 is outside B_p1
    assert not res.hypothesis_holds and res.witness == 1


def test_infinite_entries_leave_the_ball():
    space = line(2)
    Phi = var.ExtendedBiFunction([[0, INF], [-5, 0]])
    assert var.ot_ball(space, Phi, 0).members == {0}
    assert var.ot_ball(space, Phi, 1).members == {0, 1}


def test_condition_checks():
    assert var.check_ot_conditions(var.ExtendedBiFunction([[1, 0], [0, 0]])) == ("ii", (0,))
    # Phi(0,2) = 5 > Phi(0,1) + Phi(1,2) = 2
    bad = var.ExtendedBiFunction([[0, 1, 5], [0, 0, 1], [0, 0, 0]])
    assert var.check_ot_conditions(bad)[0] == "iii"
    with pytest.raises(PreconditionError):
        var.verify_lemma1(line(3), bad)
    # finite path but infinite direct value
    bad_inf = var.ExtendedBiFunction([[0, 1, INF], [0, 0, 1], [0, 0, 0]])
    assert var.check_ot_conditions(bad_inf)[0] == "iii"


def test_b_metric_precondition():
    space = pairs_space(["a", "b", "c"], {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 5})
    Phi = var.ExtendedBiFunction([[0] * 3] * 3, K=1)
    with pytest.raises(PreconditionError):
        var.verify_lemma1(space, Phi)
    assert var.verify_lemma1(space, var.ExtendedBiFunction([[0] * 3] * 3, K=min_b_constant(space))).passed


def test_relaxation_constant_above_one_forces_nonnegative_tables():
    space = line(3)
    phi = var.ScalarFunction([2, 1, 0])
    conv = var.ot_from_ck(space, phi, 2)
    assert conv.balls_equal
    assert not conv.conditions_hold
    const = var.ot_from_ck(space, var.ScalarFunction([3, 3, 3]), 2)
    assert const.conditions_hold and const.balls_equal
    for _, space, Phi in random_instances(40, seed=3):
        if Phi.K > 1:
            assert all(v >= 0 for row in Phi.table for v in row)
            assert var.singleton_ball_points(space, Phi) == space.all_points()


@pytest.mark.parametrize("seed", range(5))
def test_ot_balls_and_contractivity_random(seed):
    for _, space, Phi in random_instances(40, seed):
        assert var.verify_lemma1(space, Phi).passed
        assert var.is_strongly_contractive(var.ot_ball_system(space, Phi)).strongly_contractive


def test_strong_contractivity_negative():
    rep = var.is_strongly_contractive([{0, 1}, {0, 1}])
    assert not rep.strongly_contractive
    assert not var.is_strongly_contractive([{1}, {1}]).strongly_contractive


@pytest.mark.parametrize("seed", range(5))
def test_descent_brute_force(seed):
    for rng, space, Phi in random_instances(30, seed):
        balls = var.ot_ball_system(space, Phi)
        singles = {x for x in range(len(space)) if balls[x] == {x}}
        for x0 in range(len(space)):
            res = var.singleton_ball_descent(space, Phi, x0)
            assert res.point in singles and res.point in balls[x0]
            assert res.moves <= len(space) - 1
            # every singleton-ball point is a terminal point in the brute-force sense
            for a in singles:
                assert all(Phi(a, x).is_infinite or space.dist[a][x] > -Phi(a, x) for x in range(len(space)) if x != a)


def brute_ekeland(space, Phi, gamma, x0, delta):
    n = len(space)
    d = space.dist
    good = set()
    for a in range(n):
        pa = Phi.table[a]
        if d[x0][a] > delta or Phi(x0, a).is_infinite or gamma * d[x0][a] > -Phi(x0, a):
            continue
        if all(pa[x].is_infinite or pa[x] + gamma * d[x][a] > 0 for x in range(n) if x != a):
            good.add(a)
    return good


def test_ekeland_fixed_instance():
    space, _, Phi = line_instance()
    res = var.ekeland_point(space, Phi, 2, 0, 2, 1)
    assert res.verified
    assert res.point in brute_ekeland(space, Phi, as_scalar(2), 0, as_scalar(1))


@pytest.mark.parametrize("seed", range(4))
def test_ekeland_brute_force(seed):
    for rng, space, Phi in random_instances(30, seed):
        x0 = rng.randrange(len(space))
        gamma = as_scalar(Fraction(rng.randint(1, 6), rng.choice([1, 2])))
        eps = max(as_scalar(0), -Phi.row_inf(x0))
        delta = eps / gamma
        res = var.ekeland_point(space, Phi, gamma, x0, eps, delta)
        assert res.verified
        assert res.point in brute_ekeland(space, Phi, gamma, x0, delta)


def test_ekeland_bounds_enforced():
    space, _, Phi = line_instance()
    with pytest.raises(DomainError):
        var.ekeland_point(space, Phi, 2, 0, 1, 5)  # -eps = -1 > inf Phi(p0, .) = -2
    with pytest.raises(DomainError):
        var.ekeland_point(space, Phi, 2, 0, 2, Fraction(1, 2))


def test_scaling_keeps_ot_elements_not_singleton_points():
    space = line(2)
    Phi = var.ExtendedBiFunction([[0, -2], [2, 0]])
    scaled = Phi.scaled(Fraction(1, 4))
    finite = lambda P: {x for x in range(2) if not P.row_inf(x).is_infinite}
    assert finite(Phi) == finite(scaled) == {0, 1}
    assert var.singleton_ball_points(space, Phi) == {1}
    assert var.singleton_ball_points(space, scaled) == {0, 1}


def test_brute_petal():
    space = line(4)
    p = var.petal(space, 1, 0, 3)
    assert p.members == {0, 1, 2, 3}
    p2 = var.petal(space, 2, 0, 3)
    brute = {y for y in range(4) if 2 * abs(y - 0) + abs(y - 3) <= 3}
    assert p2.members == brute == {0}


@pytest.mark.parametrize("seed", range(4))
def test_petal_identity_random(seed):
    rng = random.Random(seed)
    for _ in range(30):
        n = rng.randint(2, 6)
        space = random_metric_space(rng, n)
        b = rng.randrange(n)
        M = sorted(rng.sample([i for i in range(n) if i != b], rng.randint(1, n - 1)))
        rep = var.petal_theorem_check(space, M, M[0], b, Fraction(rng.randint(1, 9), 2), 1)
        assert rep.identity_holds
        assert rep.conclusion_holds  # metric case


def test_petal_conclusion_can_fail_without_triangle_inequality():
    labels = ["x0", "a", "y", "b"]
    space = pairs_space(labels, {("x0", "b"): 10, ("a", "b"): 5, ("x0", "a"): 5, ("y", "b"): 1,
                                 ("y", "a"): 4, ("y", "x0"): 20})
    K = min_b_constant(space)
    assert K == Fraction(20, 9)
    rep = var.petal_theorem_check(space, ["x0", "a", "y"], "x0", "b", 1, K)
    assert rep.identity_holds
    assert not rep.conclusion_holds


@pytest.mark.parametrize("seed", range(3))
def test_nest_potential_on_descent_traces(seed):
    for rng, space, Phi in random_instances(40, seed):
        x0 = rng.randrange(len(space))
        trace = var.singleton_ball_descent(space, Phi, x0).trace
        assert var.lemma2_checks(space, Phi, x0, trace).passed


def test_nest_potential_preconditions():
    space, _, Phi = line_instance()
    with pytest.raises(PreconditionError):
        var.lemma2_checks(space, Phi, 2, [0])  # p0 is not in B_p2


def test_boundary_zero_infimum():
    space, _, Phi = line_instance()
    rep = var.ot_boundary_checks(space, Phi, 0, A=[2])
    assert rep.zero_inf_hypothesis and rep.zero_inf_verified and rep.zero_inf_point == 2
    assert rep.set_hypothesis and rep.set_verified
    lit = var.ot_boundary_checks(space, Phi, 0, A=[2], literal=True)
    assert lit.set_hypothesis is False  # p2 itself has no move


def test_sigma_fixture():
    space = line(3)
    h = [2, 1, 0]
    rep = var.sigma_semicomplete_implication_check([("shift", space, h, SelfMap((1, 2, 2)))])[0]
    assert rep.hypothesis_holds and rep.agrees and rep.pipeline_point == 2
