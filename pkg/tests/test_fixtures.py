from fractions import Fraction

import pytest

from ballspace import fixtures as fx
from ballspace.convergence import b_limit, semimetric_limit
from ballspace.errors import DomainError
from ballspace.scalar import ExactScalar, as_scalar
from ballspace.spaces import min_b_constant, verify_semimetric


def results(name, **params):
    return {r.id: r for r in fx.run_fixture(name, **params)}


def test_catalog_names():
    assert set(fx.CATALOG) == {"example_one_over_nm", "example_piotrus", "example_saturn"}
    with pytest.raises(DomainError):
        fx.build_fixture("nope")


def test_one_over_nm_claims():
    res = results("example_one_over_nm", N=50)
    assert list(res) == ["metric-valid", "kstar-one", "b-limit-x", "semimetric-limit-none"]
    assert all(r.passed for r in res.values())
    assert all(r.citation for r in res.values())


def test_one_over_nm_distances_by_hand():
    # d(x_n, x_m) = 1 + 1/|n-m|, d(x, x_n) = 1
    assert fx.one_over_nm_distance(0, 3) == 1
    assert fx.one_over_nm_distance(2, 5) == 1 + Fraction(1, 3)
    assert fx.one_over_nm_distance(4, 4) == 0


def test_one_over_nm_window_space():
    fixture = fx.build_fixture("example_one_over_nm", N=12)
    presented = fixture.data["presented"]
    space = presented.space
    assert verify_semimetric(space.dist).valid
    assert min_b_constant(space) == 1
    assert b_limit(presented).point == space.index("x")
    assert semimetric_limit(presented) is None


def test_piotrus_claims():
    res = results("example_piotrus")
    assert list(res) == ["interval-b-limit-0", "closed-set-b-limit-none", "filled-b-limit-none"]
    assert all(r.passed for r in res.values())


def test_piotrus_finer_grid():
    assert all(r.passed for r in fx.run_fixture("example_piotrus", D=6, lo=-3, hi=4))


def test_saturn_claims_default_grid():
    res = results("example_saturn")
    assert list(res) == ["lipschitz-to-euclidean", "kstar-at-most-2", "open-ball-formula"]
    assert all(r.passed for r in res.values())
    kstar = fx.build_fixture("example_saturn").data["report"].k_star
    assert kstar == ExactScalar(Fraction(4, 5), Fraction(4, 5))


def test_saturn_custom_grid():
    grid = fx.saturn_grid_from_text(["0", "1", "-1", "1/3", "1*sqrt2", "-1*sqrt2", "1+1*sqrt2", "1/2*sqrt2", "5/2"])
    assert all(r.passed for r in fx.run_fixture("example_saturn", grid=grid))


def test_saturn_grid_too_small():
    with pytest.raises(DomainError):
        fx.build_fixture("example_saturn", grid=[(as_scalar(0), True)] * 3)


def test_presented_nests():
    tails, at_x = fx.one_over_nm_presented_nests(10)
    assert tails.intersection == frozenset()
    assert at_x.intersection == {"x"}
