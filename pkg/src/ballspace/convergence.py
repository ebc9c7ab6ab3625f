"""Ball convergence of eventually periodic sequences.

A sequence is a finite prefix followed by a cycle repeated forever, so a
set contains infinitely many terms exactly when it meets the cycle.  That
reduction makes every question here decidable on finite spaces; the
infinite worked examples carry hand-derived oracles instead (see
:mod:`ballspace.fixtures`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Optional, Sequence

from .balls import BallFamily, build_ball_family
from .errors import DomainError, InvariantError, MalformedInputError, PreconditionError, ResourceLimitError
from .scalar import ExactScalar, as_scalar
from .spaces import Ball, BallMeta, FiniteSemimetricSpace, ball, min_b_constant

__all__ = [
    "BLimit",
    "EventuallyPeriodicSequence",
    "FiniteTopology",
    "LawReport",
    "PresentedSequenceFixture",
    "b_limit",
    "bconv_implies_subseq_limit_check",
    "closed_set_family",
    "doubling_number",
    "enumerate_sequences",
    "enumerate_t0_topologies",
    "enumerate_topologies",
    "filled_family_equivalence_check",
    "inf_often_points",
    "limit_operator_laws",
    "saturn_distance",
    "saturn_fixture_checks",
    "semimetric_limit",
    "sigma_cauchy",
    "subsequences",
    "theorem_top_equivalence",
    "topological_limit",
    "topological_limits",
]


@dataclass(frozen=True)
class EventuallyPeriodicSequence:
    prefix: tuple
    cycle: tuple
    name: str = "s"
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise MalformedInputError("an eventually periodic sequence needs a nonempty cycle")

    @classmethod
    def constant(cls, x):
        return cls((), (x,))

    def term(self, n: int) -> int:
        """x_n with n starting at 0."""
        if n < len(self.prefix):
            return self.prefix[n]
        return self.cycle[(n - len(self.prefix)) % len(self.cycle)]

    def unroll(self, count: int) -> list:
        return [self.term(n) for n in range(count)]

    def points(self) -> frozenset:
        return frozenset(self.prefix) | frozenset(self.cycle)


def inf_often_points(seq: EventuallyPeriodicSequence) -> frozenset:
    return frozenset(seq.cycle)


@dataclass(frozen=True)
class PresentedSequenceFixture:
    """An infinite sequence in an infinite universe, presented finitely.

    ``family`` lives on a finite set of probe points of the universe, with
    exact memberships; its oracle ``family.inf_often[name]`` says which
    balls hold infinitely many terms, as derived by hand for the fixture.
    ``tail_distance`` maps probe labels to lim d(x_n, y) when known.
    """

    name: str
    universe: str
    family: BallFamily
    expected_limit: Optional[str] = None
    tail_distance: Optional[dict] = None
    derivation: str = ""

    def __post_init__(self):
        if self.name not in self.family.inf_often:
            raise InvariantError(f"family carries no oracle for sequence {self.name}")

    @property
    def space(self) -> FiniteSemimetricSpace:
        return self.family.space


@dataclass(frozen=True)
class BLimit:
    point: Optional[object]
    reason: Optional[str] = None  # empty-intersection | multi-point
    intersection: frozenset = frozenset()
    active: tuple = ()  # indices of balls holding infinitely many terms

    @property
    def converges(self) -> bool:
        return self.point is not None


def _limit_from(inter, active):
    if len(inter) == 1:
        (x,) = inter
        return BLimit(x, None, inter, active)
    return BLimit(None, "empty-intersection" if not inter else "multi-point", inter, active)


def _from_oracle(family: BallFamily, name: str) -> BLimit:
    try:
        flags = family.inf_often[name]
    except KeyError:
        raise DomainError(f"family {family.name} has no oracle for sequence {name!r}") from None
    active = tuple(k for k, f in enumerate(flags) if f)
    inter = family.space.all_points()
    for k in active:
        inter &= family.balls[k].members
    return _limit_from(inter, active)


def b_limit(seq, family=None, *, mutant_prefix=False) -> BLimit:
    """The unique point of the intersection of all balls holding infinitely many terms.

    An empty set of such balls intersects to the whole space.  ``seq`` is an
    :class:`EventuallyPeriodicSequence`, a :class:`PresentedSequenceFixture`
    (family taken from it), or a sequence name looked up in the family's
    oracle.  ``mutant_prefix`` counts prefix points as recurring (mutation
    tests only).
    """
    if isinstance(seq, PresentedSequenceFixture):
        return _from_oracle(seq.family, seq.name)
    if family is None:
        raise DomainError("b_limit needs a ball family for a finite sequence")
    if isinstance(seq, str):
        return _from_oracle(family, seq)
    recurring = inf_often_points(seq) | (frozenset(seq.prefix) if mutant_prefix else frozenset())
    inter = family.space.all_points()
    active = []
    for k, b in enumerate(family.balls):
        if b.members & recurring:
            active.append(k)
            inter &= b.members
    return _limit_from(inter, tuple(active))


def semimetric_limit(seq, space=None):
    """Limit in the distance sense.

    On a finite space d(x_n, x) -> 0 forces eventual constancy, so the limit
    exists iff the cycle is a single point.  Presented fixtures use their
    tail-distance oracle.
    """
    if isinstance(seq, PresentedSequenceFixture):
        if not seq.tail_distance:
            raise DomainError(f"fixture {seq.name} has no tail-distance oracle")
        zeros = [y for y, v in seq.tail_distance.items() if as_scalar(v) == 0]
        return seq.space.index(zeros[0]) if len(zeros) == 1 else None
    cyc = inf_often_points(seq)
    if len(cyc) == 1:
        (x,) = cyc
        return x
    return None


def sigma_cauchy(seq: EventuallyPeriodicSequence, space: FiniteSemimetricSpace) -> bool:
    """Summable consecutive distances; only cycle steps repeat, so the cycle must be constant."""
    c = seq.cycle
    steps = [space.dist[c[i]][c[(i + 1) % len(c)]] for i in range(len(c))]
    return all(s == 0 for s in steps)


# ---------------------------------------------------------------------------
# finite topologies


@dataclass(frozen=True)
class FiniteTopology:
    n: int
    open_sets: frozenset
    name: str = "tau"
    labels: tuple = ()

    def __post_init__(self):
        opens = frozenset(frozenset(s) for s in self.open_sets)
        full = frozenset(range(self.n))
        opens = opens | {frozenset(), full}
        for s in opens:
            if not s <= full:
                raise InvariantError("open set outside the ground set")
        for a, b in combinations(opens, 2):
            if a | b not in opens or a & b not in opens:
                raise InvariantError("open sets are not closed under union and intersection")
        object.__setattr__(self, "open_sets", opens)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"p{i}" for i in range(self.n)))

    @property
    def is_t0(self) -> bool:
        for x, y in combinations(range(self.n), 2):
            if not any((x in U) != (y in U) for U in self.open_sets):
                return False
        return True

    def neighbourhoods(self, x) -> list:
        return [U for U in self.open_sets if x in U]


def enumerate_topologies(n: int) -> list:
    """Every topology on {0..n-1}, by brute force over families of proper nonempty subsets."""
    full = frozenset(range(n))
    inner = [frozenset(s) for r in range(1, n) for s in combinations(range(n), r)]
    out = []
    for mask in range(1 << len(inner)):
        opens = {frozenset(), full} | {inner[i] for i in range(len(inner)) if mask >> i & 1}
        if all(a | b in opens and a & b in opens for a, b in combinations(opens, 2)):
            out.append(FiniteTopology(n, frozenset(opens)))
    return out


def enumerate_t0_topologies(n: int) -> list:
    return [t for t in enumerate_topologies(n) if t.is_t0]


def closed_set_family(top: FiniteTopology, space: Optional[FiniteSemimetricSpace] = None) -> BallFamily:
    """Complements of open sets, the empty set dropped."""
    if space is None:
        from .spaces import discrete_space

        space = discrete_space(top.labels)
    full = frozenset(range(top.n))
    closed = sorted({full - U for U in top.open_sets if full - U}, key=lambda s: (len(s), sorted(s)))
    balls = tuple(Ball(s, BallMeta(-1, as_scalar(0), "closed-set")) for s in closed)
    return BallFamily(space, balls, name=f"closed({top.name})")


def topological_limits(seq: EventuallyPeriodicSequence, top: FiniteTopology) -> frozenset:
    """All x whose every open neighbourhood contains all but finitely many terms."""
    cyc = inf_often_points(seq)
    return frozenset(x for x in range(top.n) if all(cyc <= U for U in top.open_sets if x in U))


def topological_limit(seq, top: FiniteTopology):
    """The limit when there is exactly one, else None.

    T0 alone does not make limits unique: in the Sierpinski space a constant
    sequence at the open point also converges to the closed point.
    """
    if not top.is_t0:
        raise DomainError("topology is not T0")
    lims = topological_limits(seq, top)
    if len(lims) == 1:
        (x,) = lims
        return x
    return None


@dataclass(frozen=True)
class EquivalenceReport:
    agrees: bool
    topological: Optional[int]
    ball: Optional[int]
    all_limits: frozenset = frozenset()


def theorem_top_equivalence(top: FiniteTopology, seq) -> EquivalenceReport:
    """Unique topological limit versus b-limit in the closed-set ball space."""
    t = topological_limit(seq, top)
    b = b_limit(seq, closed_set_family(top)).point
    return EquivalenceReport(t == b, t, b, topological_limits(seq, top))


def enumerate_sequences(n: int, max_prefix: int, max_cycle: int):
    """All (prefix, cycle) pairs over n points with the given length bounds."""
    for lp in range(max_prefix + 1):
        for prefix in product(range(n), repeat=lp):
            for lc in range(1, max_cycle + 1):
                for cycle in product(range(n), repeat=lc):
                    yield EventuallyPeriodicSequence(prefix, cycle)


def subsequences(seq: EventuallyPeriodicSequence):
    """Eventually periodic subsequences: a prefix truncation and a nonempty choice of cycle positions."""
    c = seq.cycle
    for start in range(len(seq.prefix) + 1):
        for r in range(1, len(c) + 1):
            for pos in combinations(range(len(c)), r):
                yield EventuallyPeriodicSequence(seq.prefix[start:], tuple(c[i] for i in pos))


@dataclass(frozen=True)
class LawReport:
    covers: bool
    separates: bool
    l1: bool = True
    l2: bool = True
    l3: bool = True
    witnesses: tuple = ()
    sequences_checked: int = 0

    @property
    def passed(self) -> bool:
        return self.covers and self.separates and self.l1 and self.l2 and self.l3


def _separates(family) -> Optional[tuple]:
    sets = family.member_sets()
    n = len(family.space)
    for x, y in combinations(range(n), 2):
        has_x = any(x in s and y not in s for s in sets)
        has_y = any(y in s and x not in s for s in sets)
        if not (has_x and has_y):
            return (x, y)
    return None


def limit_operator_laws(family: BallFamily, max_prefix: int = 1, max_cycle: int = 3, *, strict=True) -> LawReport:
    """Check the three limit-operator laws for b-convergence over small sequences.

    Requires the family to cover the space and separate points; failures
    raise :class:`PreconditionError` unless ``strict`` is off, in which
    case the report just records them.
    """
    n = len(family.space)
    covered = frozenset().union(*family.member_sets())
    covers = covered == family.space.all_points()
    sep = _separates(family)
    if not covers or sep is not None:
        if strict:
            what = "family does not cover the space" if not covers else (
                f"family does not separate {family.space.points[sep[0]]} and {family.space.points[sep[1]]}"
            )
            raise PreconditionError(what)
        return LawReport(covers, sep is None)
    witnesses = []
    l1 = l2 = l3 = True
    for x in range(n):
        if b_limit(EventuallyPeriodicSequence.constant(x), family).point != x:
            l1 = False
            witnesses.append(("L1", x))
    cache = {}

    def lim(s):
        key = inf_often_points(s)
        if key not in cache:
            cache[key] = b_limit(s, family).point
        return cache[key]

    checked = 0
    for seq in enumerate_sequences(n, max_prefix, max_cycle):
        checked += 1
        x = lim(seq)
        subs = list(subsequences(seq))
        if x is not None:
            for sub in subs:
                if lim(sub) != x:
                    l2 = False
                    witnesses.append(("L2", seq, sub))
                    break
        for target in range(n):
            if x == target:
                continue
            if not any(all(lim(s2) != target for s2 in subsequences(sub)) for sub in subs):
                l3 = False
                witnesses.append(("L3", seq, target))
    return LawReport(True, True, l1, l2, l3, tuple(witnesses), checked)


# ---------------------------------------------------------------------------
# doubling


@dataclass(frozen=True)
class DoublingResult:
    N: int
    covers: tuple  # ((center, radius, cover centers), ...)


def _min_cover(target: int, masks: Sequence[int]):
    """Fewest masks whose union contains target (breadth-first over covered subsets)."""
    masks = [m & target for m in masks]
    masks = [m for m in dict.fromkeys(masks) if m]
    if target == 0:
        return ()
    parent = {0: None}
    frontier = [0]
    while frontier:
        nxt = []
        for state in frontier:
            for k, m in enumerate(masks):
                new = state | m
                if new not in parent:
                    parent[new] = (state, k)
                    if new == target:
                        chosen = []
                        cur = new
                        while parent[cur] is not None:
                            prev, kk = parent[cur]
                            chosen.append(masks[kk])
                            cur = prev
                        return tuple(reversed(chosen))
                    nxt.append(new)
        frontier = nxt
    raise AssertionError("target cannot be covered")


DOUBLING_MAX_POINTS = 16


def doubling_number(space: FiniteSemimetricSpace, radii) -> DoublingResult:
    """Smallest N such that each B_r(x), r in radii, is covered by N balls of radius r/2."""
    n = len(space)
    if n > DOUBLING_MAX_POINTS:
        raise ResourceLimitError(f"exact covering is capped at {DOUBLING_MAX_POINTS} points")
    radii = sorted({as_scalar(r) for r in radii})
    if any(r <= 0 or r.is_infinite for r in radii) or not radii:
        raise DomainError("radii must be finite and positive")

    def mask(s):
        return sum(1 << i for i in s)

    best = 0
    covers = []
    for x in range(n):
        for r in radii:
            target = mask(ball(space, x, r).members)
            half = [mask(ball(space, y, r / 2).members) for y in range(n)]
            chosen = _min_cover(target, half)
            centers = tuple(half.index(next(h for h in half if h & target == m)) for m in chosen)
            covers.append((x, r, centers))
            best = max(best, len(chosen))
    return DoublingResult(best, tuple(covers))


# ---------------------------------------------------------------------------
# finite shadows of the convergence comparisons


def closed_ball_radii(space: FiniteSemimetricSpace) -> list:
    """Realized distances plus half the smallest one, so every closed ball (singletons included) appears."""
    real = space.realized_distances()
    if not real:
        return [as_scalar(1)]
    return sorted(set(real) | {real[0] / 2})


@dataclass(frozen=True)
class SubseqLimitReport:
    consistent: bool
    b_limit: Optional[int]
    doubling: Optional[int] = None
    detail: str = ""


def bconv_implies_subseq_limit_check(space, seq, *, with_doubling=False) -> SubseqLimitReport:
    """b-limit x over all closed balls forces the cycle to be {x} on a finite space."""
    family = build_ball_family(space, closed_ball_radii(space))
    x = b_limit(seq, family).point
    N = doubling_number(space, closed_ball_radii(space)).N if with_doubling else None
    if x is None:
        return SubseqLimitReport(True, None, N, "no b-limit")
    sub_ok = (x,) in {tuple(sorted(set(s.cycle))) for s in subsequences(seq)}
    full_ok = inf_often_points(seq) == {x}
    return SubseqLimitReport(sub_ok and full_ok, x, N)


@dataclass(frozen=True)
class FilledReport:
    holds: bool
    semimetric: Optional[int]
    filled: Optional[int]
    forward: bool
    backward: bool
    radii_admissible: bool


def filled_family_equivalence_check(space, radii, seq, *, require_admissible=True, family=None) -> FilledReport:
    """Distance limit versus b-limit in the filled family, in both directions.

    Radii are admissible when the smallest one does not exceed the smallest
    realized distance; that stands in for radii accumulating at 0.  A
    prebuilt ``family`` for the same radii skips the rebuild.
    """
    radii = sorted({as_scalar(r) for r in radii})
    real = space.realized_distances()
    admissible = not real or radii[0] <= real[0]
    if require_admissible and not admissible:
        raise PreconditionError("smallest radius exceeds the smallest realized distance")
    fam = family if family is not None else build_ball_family(space, radii, filled=True)
    s = semimetric_limit(seq, space)
    b = b_limit(seq, fam).point
    fwd = s is None or b == s
    bwd = b is None or s == b
    return FilledReport(fwd and bwd, s, b, fwd, bwd, admissible)


# ---------------------------------------------------------------------------
# the rational / irrational line


def saturn_distance(x: ExactScalar, xr: bool, y: ExactScalar, yr: bool) -> ExactScalar:
    gap = abs(x - y)
    return gap if xr == yr else 2 * gap


@dataclass(frozen=True)
class SaturnReport:
    lipschitz: bool
    k_star: ExactScalar
    k_star_ok: bool
    formula_agrees: bool
    pairs_checked: int
    balls_checked: int
    mismatch: Optional[tuple] = None

    @property
    def passed(self):
        return self.lipschitz and self.k_star_ok and self.formula_agrees


def saturn_space(grid) -> FiniteSemimetricSpace:
    pts = [(as_scalar(c), bool(r)) for c, r in grid]
    labels = [str(c) for c, _ in pts]
    table = [[saturn_distance(x, xr, y, yr) for y, yr in pts] for x, xr in pts]
    return FiniteSemimetricSpace(labels, table, name="saturn")


def saturn_fixture_checks(grid) -> SaturnReport:
    """Distance doubled across the rational/irrational divide, checked on a grid.

    ``grid`` is a list of (coordinate, is_rational) pairs.
    """
    pts = [(as_scalar(c), bool(r)) for c, r in grid]
    if len({r for _, r in pts}) < 2:
        raise DomainError("grid must contain rational and irrational points")
    for c, r in pts:
        if r != c.is_rational:
            raise DomainError(f"rationality flag of {c} disagrees with its coordinate")
    space = saturn_space(pts)
    n = len(pts)
    lip = True
    for i in range(n):
        for j in range(n):
            de = abs(pts[i][0] - pts[j][0])
            d = space.dist[i][j]
            if not (de <= d <= 2 * de):
                lip = False
    k = min_b_constant(space)
    radii = sorted(set(space.realized_distances()) | {abs(pts[i][0] - pts[j][0]) for i in range(n) for j in range(n) if i != j})
    mismatch = None
    checked = 0
    for c in range(n):
        x, xr = pts[c]
        for r in radii:
            direct = ball(space, c, r, "open").members
            ring = frozenset(j for j in range(n) if pts[j][1] == xr and x - r < pts[j][0] < x + r)
            core = frozenset(j for j in range(n) if x - r / 2 < pts[j][0] < x + r / 2)
            checked += 1
            if direct != ring | core and mismatch is None:
                mismatch = (c, r)
    return SaturnReport(lip, k, k <= 2, mismatch is None, n * n, checked, mismatch)
