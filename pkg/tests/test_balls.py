import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ballspace.balls import (
    BallFamily,
    PresentedNest,
    SelfMap,
    build_ball_family,
    check_count_condition,
    classify_set,
    count_maximal_nests,
    enumerate_maximal_nests,
    f_closed_sets,
    is_nest,
    is_spherically_complete,
    theorem_ps_engine,
)
from ballspace.errors import DomainError, InvariantError
from ballspace.fixtures import one_over_nm_presented_nests
from ballspace.search import random_metric_space, random_semimetric_space
from ballspace.spaces import FiniteSemimetricSpace, ball, discrete_space


def line(n):
    return FiniteSemimetricSpace([f"p{i}" for i in range(n)], [[abs(i - j) for j in range(n)] for i in range(n)], "L")


def subsets(n):
    for r in range(1, n + 1):
        for s in combinations(range(n), r):
            yield frozenset(s)


def brute_closed_sets(f, n):
    return {A for A in subsets(n) if f.image(A) <= A}


def brute_maximal_chains(sets):
    sets = list(dict.fromkeys(sets))
    chains = []
    for r in range(1, len(sets) + 1):
        for combo in combinations(sets, r):
            if all(a <= b or b <= a for a, b in combinations(combo, 2)):
                chains.append(frozenset(combo))
    return [c for c in chains if not any(c < d for d in chains)]


@pytest.mark.parametrize("seed", range(25))
def test_family_dedup_and_coverage(seed):
    rng = random.Random(seed)
    space = random_semimetric_space(rng, rng.randint(1, 6))
    radii = sorted(set(rng.sample(space.realized_distances() or [1], min(3, len(space.realized_distances() or [1])))))
    fam = build_ball_family(space, radii)
    sets = fam.member_sets()
    assert len(sets) == len(set(sets))
    for x in range(len(space)):
        for r in radii:
            assert ball(space, x, r).members in sets
        # larger radius about the same centre gives a superset
        balls_x = [ball(space, x, r).members for r in radii]
        assert all(a <= b for a, b in zip(balls_x, balls_x[1:]))


def test_filled_family_adds_complements():
    fam = build_ball_family(line(3), [1], filled=True)
    sets = set(fam.member_sets())
    assert {frozenset({0, 1}), frozenset({0, 1, 2}), frozenset({1, 2})} <= sets
    # complements of open balls of radius 1
    assert frozenset({1, 2}) in sets and frozenset({0, 2}) in sets


@pytest.mark.parametrize("seed", range(30))
def test_maximal_nests_match_brute_force(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(1, 4)
    pool = list(subsets(n))
    sets = rng.sample(pool, rng.randint(1, min(6, len(pool))))
    fam = BallFamily.from_sets(discrete_space([f"p{i}" for i in range(n)]), sets)
    expected = brute_maximal_chains(fam.member_sets())
    assert count_maximal_nests(fam) == len(expected)
    got = {frozenset(fam.balls[i].members for i in chain) for chain in enumerate_maximal_nests(fam)}
    assert got == set(expected)
    for chain in enumerate_maximal_nests(fam):
        assert is_nest(fam, chain).is_nest


def test_is_nest_witness():
    fam = build_ball_family(line(3), [1])
    rep = is_nest(fam, [0, 2])
    assert not rep.is_nest and rep.witness is not None


@pytest.mark.parametrize("seed", range(20))
def test_finite_families_are_spherically_complete(seed):
    rng = random.Random(seed)
    space = random_metric_space(rng, rng.randint(1, 6))
    fam = build_ball_family(space, space.realized_distances() or [1])
    assert is_spherically_complete(fam).complete


def test_presented_nests():
    tails, at_x = one_over_nm_presented_nests(20)
    assert isinstance(tails, PresentedNest)
    assert not is_spherically_complete(tails).complete
    assert is_spherically_complete(at_x).complete


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=6).map(lambda t: [v % len(t) for v in t]))
def test_f_closed_sets_match_brute_force(table):
    f = SelfMap(tuple(table))
    got = set(f_closed_sets(f))
    assert got == brute_closed_sets(f, len(table))


def test_classification_modes():
    f = SelfMap((1, 1))
    assert classify_set(f, {0, 1}).f_contracting
    assert classify_set(f, {1}).f_closed and not classify_set(f, {1}).f_contracting
    assert classify_set(f, {1}, "kuhlmann").f_contracting
    assert not classify_set(f, {0}).f_closed


def test_ps_engine_strict_cannot_hold_with_fixed_singleton():
    fam = build_ball_family(line(3), [1, 2])
    f = SelfMap((1, 2, 2))
    assert not theorem_ps_engine(fam, f, "i", "strict").hypothesis_holds
    res = theorem_ps_engine(fam, f, "i", "kuhlmann")
    assert res.hypothesis_holds is False  # {p2} holds no ball of the family
    fam2 = BallFamily.from_sets(line(3), [{0, 1, 2}, {1, 2}, {2}])
    res2 = theorem_ps_engine(fam2, f, "i", "kuhlmann")
    assert res2.hypothesis_holds
    assert all(f(x) == x for _, x in res2.fixed_points)
    assert {x for _, x in res2.fixed_points} == {2}


def test_ps_engine_variant_ii_unique_point():
    f = SelfMap((1, 2, 2))
    fam = BallFamily.from_sets(line(3), [{0, 1, 2}, {1, 2}, {2}])
    res = theorem_ps_engine(fam, f, "ii", "kuhlmann")
    assert res.hypothesis_holds and res.fixed_points[0][1] == 2
    assert not theorem_ps_engine(fam, f, "ii", "strict").hypothesis_holds


@pytest.mark.parametrize("seed", range(40))
def test_ps_engine_soundness(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    f = SelfMap(tuple(rng.randrange(n) for _ in range(n)))
    fam = BallFamily.from_sets(discrete_space([f"p{i}" for i in range(n)]),
                               rng.sample(list(subsets(n)), rng.randint(1, 2 ** n - 1)))
    for variant in ("i", "ii"):
        for mode in ("strict", "kuhlmann"):
            res = theorem_ps_engine(fam, f, variant, mode)
            for _, x in res.fixed_points:
                assert f(x) == x
            if res.hypothesis_holds and variant == "ii":
                assert f.fixed_points() == [res.fixed_points[0][1]]


def test_engine_rejects_mismatched_sizes():
    with pytest.raises(DomainError):
        theorem_ps_engine(build_ball_family(line(3), [1]), SelfMap((0, 0)))


def brute_count_condition(space, f, radii):
    n = len(space)

    def iterates(x):
        seen, cur = [], f(x)
        while cur not in seen:
            seen.append(cur)
            cur = f(cur)
        return set(seen)

    for x in range(n):
        if f(x) == x:
            continue
        for r in radii:
            B = [y for y in range(n) if space.dist[x][y] <= r]
            if not any(y not in iterates(x) and x not in iterates(y) for y in B):
                return False
    return True


def test_count_condition_shift_example():
    space = line(3)
    f = SelfMap((1, 2, 2))
    rep = check_count_condition(space, f, [2])
    # y = a is allowed: a is not an iterate of itself since the orbit of a is {b, c}
    assert rep.holds == brute_count_condition(space, f, [2]) == True
    assert rep.meta_checked and rep.meta_agrees


def test_count_condition_identity_vacuous():
    rep = check_count_condition(line(3), SelfMap((0, 1, 2)), [1])
    assert rep.holds and not rep.meta_checked


@pytest.mark.parametrize("seed", range(60))
def test_count_condition_matches_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    space = random_semimetric_space(rng, n)
    f = SelfMap(tuple(rng.randrange(n) for _ in range(n)))
    radii = rng.sample(space.realized_distances(), 1)
    rep = check_count_condition(space, f, radii)
    assert rep.holds == brute_count_condition(space, f, radii)
    if rep.meta_checked:
        assert rep.meta_agrees


def test_oracle_length_validated():
    fam = build_ball_family(line(2), [1])
    with pytest.raises(InvariantError):
        fam.with_oracle("s", [True] * (len(fam) + 1))
