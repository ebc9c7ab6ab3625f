"""Catalog of the three infinite worked examples, reduced to exact finite checks.

Each builder returns a :class:`Fixture` holding the finite data it derived
and a list of claims.  Ball membership on probe points is always computed
exactly; whether a ball holds infinitely many sequence terms comes from a
hand-derived rule documented next to each builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .balls import BallFamily
from .convergence import (
    PresentedSequenceFixture,
    b_limit,
    saturn_fixture_checks,
    semimetric_limit,
)
from .errors import DomainError
from .scalar import ExactScalar, as_scalar, format_scalar
from .spaces import Ball, BallMeta, FiniteSemimetricSpace, min_b_constant, verify_semimetric

__all__ = [
    "CATALOG",
    "Claim",
    "ClaimResult",
    "Fixture",
    "build_fixture",
    "example_one_over_nm",
    "example_piotrus",
    "example_saturn",
    "run_fixture",
]


@dataclass(frozen=True)
class Claim:
    id: str
    citation: str
    check: Callable[[], tuple]  # returns (passed, witness string)


@dataclass(frozen=True)
class ClaimResult:
    id: str
    citation: str
    passed: bool
    witness: str = ""


@dataclass
class Fixture:
    name: str
    params: dict
    claims: list
    data: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# x, x_1, x_2, ... with d(x, x_n) = 1 and d(x_n, x_m) = 1 + 1/|n - m|

ONE_OVER_NM_CITE = "metric with values in {0} and [1,2]: closed-ball limit without distance limit"


def one_over_nm_distance(i: int, j: int) -> ExactScalar:
    """Index 0 is x, index n >= 1 is x_n."""
    if i == j:
        return as_scalar(0)
    if i == 0 or j == 0:
        return as_scalar(1)
    return as_scalar(1 + Fraction(1, abs(i - j)))


def _one_over_nm_inf_often(center: int, r: ExactScalar) -> bool:
    # d(x, x_n) = 1 for all n; d(x_c, x_n) decreases to 1 from above
    if center == 0:
        return r >= 1
    return r > 1


def example_one_over_nm(N: int = 50) -> Fixture:
    """Window {x, x_1, ..., x_N} of the infinite space.

    Radii: 1/2, 1, 3/2, 2 and every realized distance 1 + 1/k.  A closed
    ball B_r(x) holds infinitely many terms iff r >= 1; B_r(x_c) iff r > 1.
    The tail distance lim d(x_n, y) is 1 for every y.
    """
    if N < 3:
        raise DomainError("N must be at least 3")
    labels = ["x"] + [f"x{n}" for n in range(1, N + 1)]
    n = N + 1
    table = [[one_over_nm_distance(i, j) for j in range(n)] for i in range(n)]
    space = FiniteSemimetricSpace(labels, table, name=f"one_over_nm({N})")
    radii = sorted({as_scalar(Fraction(1, 2)), as_scalar(1), as_scalar(Fraction(3, 2)), as_scalar(2)}
                   | {as_scalar(1 + Fraction(1, k)) for k in range(1, N)})
    balls, flags = [], []
    for c in range(n):
        for r in radii:
            members = frozenset(j for j in range(n) if table[c][j] <= r)
            balls.append(Ball(members, BallMeta(c, r, "closed-ball")))
            flags.append(_one_over_nm_inf_often(c, r))
    seq_name = "x_n"
    family = BallFamily(space, tuple(balls), "closed-balls", {seq_name: tuple(flags)})
    presented = PresentedSequenceFixture(
        name=seq_name,
        universe="{x, x_1, x_2, ...}",
        family=family,
        expected_limit="x",
        tail_distance={lab: as_scalar(1) for lab in labels},
        derivation="B_r(x) recurs iff r >= 1; B_r(x_c) recurs iff r > 1",
    )

    def metric_valid():
        rep = verify_semimetric(table)
        return rep.valid, "" if rep.valid else str(rep.violations[0])

    def kstar_one():
        k = min_b_constant(space)
        return k == 1, f"K*={format_scalar(k)}"

    def limit_x():
        lim = b_limit(presented)
        got = None if lim.point is None else labels[lim.point]
        return got == "x", f"b_limit={got} intersection={space.labels(lim.intersection)}"

    def no_distance_limit():
        s = semimetric_limit(presented)
        return s is None, f"semimetric_limit={s}"

    claims = [
        Claim("metric-valid", ONE_OVER_NM_CITE, metric_valid),
        Claim("kstar-one", ONE_OVER_NM_CITE, kstar_one),
        Claim("b-limit-x", ONE_OVER_NM_CITE, limit_x),
        Claim("semimetric-limit-none", ONE_OVER_NM_CITE, no_distance_limit),
    ]
    return Fixture("example_one_over_nm", {"N": N}, claims, {"space": space, "presented": presented})


# ---------------------------------------------------------------------------
# x_{2k} = k, x_{2k-1} = 1/k on the real line

PIOTRUS_CITE = "sequence k, 1/k interleaved on the line: unbounded, interval limit 0, no closed-set limit"


def _piotrus_grid(D: int, lo: int, hi: int):
    probes = [Fraction(j, D) for j in range(lo * D, hi * D + 1)]
    ends = [Fraction(j, 2 * D) for j in range((lo - 1) * 2 * D, (hi + 1) * 2 * D + 1)]
    return probes, ends


def _label(q: Fraction) -> str:
    return format_scalar(as_scalar(q))


def example_piotrus(D: int = 4, lo: int = -2, hi: int = 3) -> Fixture:
    """Probe points j/D in [lo, hi]; interval endpoints j/(2D) in [lo - 1, hi + 1].

    A compact [a, b] holds infinitely many terms iff a <= 0 < b (only the
    terms 1/k can recur in a bounded set).  Every closed set containing a
    tail of 1/k contains 0, but the closed set {1, 2, 3, ...} also recurs
    and misses 0.  In the filled family every complement of an open ball
    misses its centre yet holds all large integer terms.
    """
    if D < 1 or lo >= 0 or hi <= 0:
        raise DomainError("grid must straddle 0 with D >= 1")
    probes, ends = _piotrus_grid(D, lo, hi)
    labels = tuple(_label(p) for p in probes)
    space = FiniteSemimetricSpace(labels, [[abs(p - q) for q in probes] for p in probes], name="line-probes")
    n = len(probes)
    seq_name = "k_and_1/k"

    def image(pred):
        return frozenset(i for i in range(n) if pred(probes[i]))

    intervals, iflags = [], []
    for i, a in enumerate(ends):
        for b in ends[i:]:
            members = image(lambda p: a <= p <= b)
            if members:
                intervals.append(Ball(members))
                iflags.append(a <= 0 < b)
    interval_fix = PresentedSequenceFixture(
        seq_name, "R", BallFamily(space, tuple(intervals), "compact-intervals", {seq_name: tuple(iflags)}), "0",
        derivation="[a,b] recurs iff a <= 0 < b",
    )

    integers = image(lambda p: p.denominator == 1 and p >= 1)
    closed_fix = PresentedSequenceFixture(
        seq_name, "R",
        BallFamily(space, tuple(intervals) + (Ball(integers),), "closed-sets", {seq_name: tuple(iflags) + (True,)}),
        derivation="intervals as above; the closed set {1,2,3,...} recurs",
    )

    radii = sorted({e for e in ends if e > 0})
    filled, fflags = [], []
    for c in range(n):
        for r in radii:
            rr = as_scalar(r)
            filled.append(Ball(image(lambda p: abs(p - probes[c]) <= r), BallMeta(c, rr, "closed-ball")))
            fflags.append(probes[c] - r <= 0 < probes[c] + r)
            filled.append(Ball(image(lambda p: abs(p - probes[c]) >= r), BallMeta(c, rr, "open-ball-complement")))
            fflags.append(True)
    filled_fix = PresentedSequenceFixture(
        seq_name, "R", BallFamily(space, tuple(filled), "filled", {seq_name: tuple(fflags)}),
        derivation="closed balls as intervals; every open-ball complement holds all large integers",
    )

    def interval_limit():
        lim = b_limit(interval_fix)
        got = None if lim.point is None else labels[lim.point]
        return got == "0", f"b_limit={got}"

    def closed_none():
        lim = b_limit(closed_fix)
        return lim.point is None, f"b_limit={lim.point} reason={lim.reason}"

    def filled_none():
        lim = b_limit(filled_fix)
        return lim.point is None, f"b_limit={lim.point} reason={lim.reason}"

    claims = [
        Claim("interval-b-limit-0", PIOTRUS_CITE, interval_limit),
        Claim("closed-set-b-limit-none", PIOTRUS_CITE, closed_none),
        Claim("filled-b-limit-none", PIOTRUS_CITE, filled_none),
    ]
    data = {"intervals": interval_fix, "closed": closed_fix, "filled": filled_fix}
    return Fixture("example_piotrus", {"D": D, "lo": lo, "hi": hi}, claims, data)


# ---------------------------------------------------------------------------
# distance doubled across the rational/irrational divide

SATURN_CITE = "line with distance doubled between rationals and irrationals: open balls are a core plus a ring"

DEFAULT_SATURN_GRID = (
    (as_scalar(0), True),
    (as_scalar(1), True),
    (as_scalar(Fraction(1, 2)), True),
    (as_scalar(Fraction(-1, 3)), True),
    (ExactScalar(0, 1), False),
    (ExactScalar(1, 1), False),
    (ExactScalar(0, Fraction(-1, 2)), False),
    (ExactScalar(Fraction(3, 2), -1), False),
)


def example_saturn(grid=None) -> Fixture:
    """Mixed rational and irrational points of the line under the class-doubled distance."""
    grid = tuple(DEFAULT_SATURN_GRID if grid is None else ((as_scalar(c), c_r) for c, c_r in grid))
    if len(grid) < 8:
        raise DomainError("grid needs at least 8 points")
    report = saturn_fixture_checks(grid)

    claims = [
        Claim("lipschitz-to-euclidean", SATURN_CITE, lambda: (report.lipschitz, f"pairs={report.pairs_checked}")),
        Claim("kstar-at-most-2", SATURN_CITE, lambda: (report.k_star_ok, f"K*={format_scalar(report.k_star)}")),
        Claim("open-ball-formula", SATURN_CITE,
              lambda: (report.formula_agrees, f"balls={report.balls_checked} mismatch={report.mismatch}")),
    ]
    return Fixture("example_saturn", {"points": len(grid)}, claims, {"report": report})


def saturn_grid_from_text(items) -> tuple:
    """Coordinates as scalar literals; rationality follows the literal."""
    out = []
    for text in items:
        c = as_scalar(text)
        out.append((c, c.is_rational))
    return tuple(out)


CATALOG = {
    "example_one_over_nm": example_one_over_nm,
    "example_piotrus": example_piotrus,
    "example_saturn": example_saturn,
}


def build_fixture(name: str, **params) -> Fixture:
    try:
        builder = CATALOG[name]
    except KeyError:
        raise DomainError(f"unknown fixture {name!r}; known: {', '.join(CATALOG)}") from None
    return builder(**params)


def run_fixture(name: str, **params) -> list:
    fx = build_fixture(name, **params)
    out = []
    for c in fx.claims:
        passed, witness = c.check()
        out.append(ClaimResult(c.id, c.citation, bool(passed), witness))
    return out


def one_over_nm_presented_nests(N: int = 50) -> tuple:
    """Two descending families over the same points, shown on the window x_1..x_N.

    The tail sets {x_k : k >= n} shrink to nothing; B_{1/n}(x) is {x} from
    n = 2 on, since every x_k sits at distance 1 from x.
    """
    from .balls import PresentedNest

    tails = tuple(frozenset(f"x{k}" for k in range(n, N + 1)) for n in range(1, N + 1))
    everything = frozenset(["x"] + [f"x{k}" for k in range(1, N + 1)])
    shrinking = (everything,) + tuple(frozenset(["x"]) for _ in range(2, N + 1))
    return (
        PresentedNest("tails", "{x_k : k >= n}, n = 1, 2, ...", tails, frozenset(),
                      "each x_m leaves the nest at n = m + 1"),
        PresentedNest("balls-at-x", "B_{1/n}(x), n = 1, 2, ...", shrinking, frozenset(["x"]),
                      "d(x, x_k) = 1 > 1/n for n >= 2"),
    )
