"""Ball families, nests, spherical completeness and the f-closed fixed-point engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import DomainError, InvariantError, ResourceLimitError
from .scalar import as_scalar
from .spaces import Ball, BallMeta, FiniteSemimetricSpace, ball

__all__ = [
    "BallFamily",
    "CountConditionReport",
    "MAX_CHAINS",
    "MAX_CLOSED_SETS",
    "NestReport",
    "PSResult",
    "PresentedNest",
    "SelfMap",
    "SetClassification",
    "SphericalReport",
    "build_ball_family",
    "check_count_condition",
    "classify_set",
    "enumerate_maximal_nests",
    "f_closed_sets",
    "is_nest",
    "is_spherically_complete",
    "theorem_ps_engine",
]

MAX_CHAINS = 2 ** 20
MAX_CLOSED_SETS = 2 ** 16

_KIND_ORDER = {"closed-ball": 0, "open-ball": 1, "open-ball-complement": 2, "closed-set": 3, "explicit": 4}


@dataclass(frozen=True)
class BallFamily:
    space: FiniteSemimetricSpace
    balls: tuple
    name: str = "B"
    inf_often: Mapping = field(default_factory=dict, compare=False)  # sequence name -> per-ball flags
    radii: tuple = field(default=(), compare=False)
    filled: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        if not self.balls:
            raise InvariantError("a ball family must be nonempty")
        universe = self.space.all_points()
        for k, b in enumerate(self.balls):
            if not b.members <= universe:
                raise InvariantError(f"ball {k} has members outside the space")
            if b.meta is not None and b.meta.kind in ("closed-ball", "open-ball", "open-ball-complement"):
                mode = {"closed-ball": "closed", "open-ball": "open", "open-ball-complement": "open_complement"}
                if ball(self.space, b.meta.center, b.meta.radius, mode[b.meta.kind]).members != b.members:
                    raise InvariantError(f"ball {k} disagrees with its center/radius metadata")
        for seq, flags in self.inf_often.items():
            if len(flags) != len(self.balls):
                raise InvariantError(f"oracle for {seq} covers {len(flags)} of {len(self.balls)} balls")

    def with_oracle(self, seq_name: str, flags) -> "BallFamily":
        table = dict(self.inf_often)
        table[seq_name] = tuple(bool(f) for f in flags)
        return BallFamily(self.space, self.balls, self.name, table, self.radii, self.filled)

    @classmethod
    def from_sets(cls, space, sets, name="B", kind="explicit"):
        return cls(space, tuple(Ball(frozenset(s), BallMeta(-1, as_scalar(0), kind) if kind != "explicit" else None) for s in sets), name)

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    def member_sets(self) -> list:
        return [b.members for b in self.balls]

    def describe(self, k) -> str:
        b = self.balls[k]
        body = "{" + ",".join(self.space.labels(b.members)) + "}"
        if b.meta is None or b.meta.center < 0:
            return body
        tag = {"closed-ball": "B", "open-ball": "Bo", "open-ball-complement": "X\\Bo"}.get(b.meta.kind, b.meta.kind)
        return f"{tag}({self.space.points[b.meta.center]},{b.meta.radius})={body}"


def build_ball_family(space: FiniteSemimetricSpace, radii, filled: bool = False, name="B") -> BallFamily:
    """B_S, or B_S^+ when ``filled``; deduplicated by member set.

    The first representative in (center, radius ascending, closed before
    complement) order keeps its metadata.  Empty complements are dropped,
    balls being nonempty by convention.
    """
    radii = sorted({as_scalar(r) for r in radii})
    if not radii:
        raise DomainError("radius set S must be nonempty")
    for r in radii:
        if r.is_infinite or r <= 0:
            raise DomainError("radii must be finite and positive")
    modes = ["closed", "open_complement"] if filled else ["closed"]
    seen = set()
    out = []
    for mode in modes:
        for x in range(len(space)):
            for r in radii:
                b = ball(space, x, r, mode)
                if not b.members or b.members in seen:
                    continue
                seen.add(b.members)
                out.append(b)
    return BallFamily(space, tuple(out), name, radii=tuple(radii), filled=filled)


@dataclass(frozen=True)
class NestReport:
    is_nest: bool
    chain: tuple = ()  # ball indices, largest set first
    witness: Optional[tuple] = None  # first incomparable pair of indices


def is_nest(family: BallFamily, indices: Sequence[int]) -> NestReport:
    idx = list(dict.fromkeys(indices))
    if not idx:
        raise DomainError("a nest is a nonempty set of balls")
    for k in idx:
        if not 0 <= k < len(family):
            raise DomainError(f"ball index {k} outside the family")
    sets = family.member_sets()
    for i, a in enumerate(idx):
        for b in idx[i + 1:]:
            if not (sets[a] <= sets[b] or sets[b] <= sets[a]):
                return NestReport(False, witness=(a, b))
    chain = sorted(idx, key=lambda k: (-len(sets[k]), k))
    return NestReport(True, tuple(chain))


def _cover_graph(sets):
    """Distinct sets (first index kept) and the Hasse covering relation below each."""
    reps = []
    seen = {}
    for k, s in enumerate(sets):
        if s not in seen:
            seen[s] = k
            reps.append(k)
    below = {}
    for a in reps:
        smaller = [b for b in reps if sets[b] < sets[a]]
        covers = [b for b in smaller if not any(sets[b] < sets[c] for c in smaller)]
        below[a] = covers
    roots = [a for a in reps if not any(sets[a] < sets[b] for b in reps)]
    return roots, below


def count_maximal_nests(family: BallFamily) -> int:
    sets = family.member_sets()
    roots, below = _cover_graph(sets)
    memo = {}

    def paths(a):
        if a not in memo:
            memo[a] = 1 if not below[a] else sum(paths(b) for b in below[a])
        return memo[a]

    return sum(paths(r) for r in roots)


def enumerate_maximal_nests(family: BallFamily, limit: int = MAX_CHAINS) -> list:
    """All maximal chains of the inclusion order on distinct member sets.

    A maximal chain of a finite poset runs from a maximal element to a
    minimal one along covering steps, so chains are paths in the Hasse
    diagram.  Each nest is returned as a tuple of ball indices, largest first.
    """
    total = count_maximal_nests(family)
    if total > limit:
        raise ResourceLimitError(f"family has {total} maximal nests, above the limit {limit}")
    sets = family.member_sets()
    roots, below = _cover_graph(sets)
    out = []

    def walk(path):
        last = path[-1]
        if not below[last]:
            out.append(tuple(path))
            return
        for b in below[last]:
            walk(path + [b])

    for r in roots:
        walk([r])
    return out


@dataclass(frozen=True)
class PresentedNest:
    """A descending family of balls over an infinite universe, given as data.

    ``window`` holds the balls truncated to a finite window of the universe
    (for consistency checks only); ``intersection`` encodes the hand-derived
    intersection of the whole infinite nest.
    """

    name: str
    description: str
    window: tuple  # tuple of frozensets of labels, descending
    intersection: frozenset
    derivation: str


@dataclass(frozen=True)
class SphericalReport:
    complete: bool
    nest_intersections: tuple = ()  # (nest, intersection) pairs
    note: str = ""


def is_spherically_complete(family) -> SphericalReport:
    if isinstance(family, PresentedNest):
        for outer, inner in zip(family.window, family.window[1:]):
            if not inner <= outer:
                raise InvariantError(f"presented nest {family.name} is not descending on its window")
        if family.window and not family.intersection <= family.window[-1]:
            raise InvariantError(f"intersection oracle of {family.name} is not inside its balls")
        return SphericalReport(
            bool(family.intersection),
            ((family.name, family.intersection),),
            f"intersection oracle: {family.derivation}",
        )
    sets = family.member_sets()
    note = "finite family: every nest has a least element, so its intersection is that ball"
    try:
        nests = enumerate_maximal_nests(family)
    except ResourceLimitError:
        minimal = [s for s in sets if not any(t < s for t in sets)]
        return SphericalReport(all(minimal), (), note + " (nests too many to list)")
    listed = tuple((nest, sets[nest[-1]]) for nest in nests)
    return SphericalReport(all(inter for _, inter in listed), listed, note)


# ---------------------------------------------------------------------------
# self maps and f-closed sets


@dataclass(frozen=True)
class SelfMap:
    table: tuple
    name: str = "f"
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        n = len(self.table)
        for x, y in enumerate(self.table):
            if not isinstance(y, int) or not 0 <= y < n:
                raise InvariantError(f"map value f({x}) = {y!r} is not a point")

    def __call__(self, x: int) -> int:
        return self.table[x]

    def __len__(self):
        return len(self.table)

    def image(self, A) -> frozenset:
        return frozenset(self.table[x] for x in A)

    def fixed_points(self) -> list:
        return [x for x, y in enumerate(self.table) if x == y]

    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.table))

    def orbit(self, x: int, include_start: bool = True) -> frozenset:
        """{f^n(x) : n >= 0} (or n >= 1)."""
        seen = []
        cur = x if include_start else self.table[x]
        while cur not in seen:
            seen.append(cur)
            cur = self.table[cur]
        return frozenset(seen)


@dataclass(frozen=True)
class SetClassification:
    f_closed: bool
    f_contracting: bool


def classify_set(f: SelfMap, A, contracting_mode: str = "strict") -> SetClassification:
    A = frozenset(A)
    if not A:
        raise DomainError("classify_set needs a nonempty set")
    if contracting_mode not in ("strict", "kuhlmann"):
        raise DomainError(f"unknown contracting mode {contracting_mode!r}")
    img = f.image(A)
    closed = img <= A
    contracting = closed and img != A
    if contracting_mode == "kuhlmann" and len(A) == 1:
        (x,) = A
        contracting = contracting or f(x) == x
    return SetClassification(closed, contracting)


def _set_key(s):
    return (len(s), tuple(sorted(s)))


def f_closed_sets(f: SelfMap, limit: int = MAX_CLOSED_SETS) -> list:
    """All nonempty f-closed sets, as unions of forward orbit closures.

    A set is f-closed iff it is the union of the orbit closures of its
    points, so closing the orbit closures under union is exhaustive.
    """
    orbits = sorted({f.orbit(x) for x in range(len(f))}, key=_set_key)
    found = set(orbits)
    frontier = list(orbits)
    while frontier:
        nxt = []
        for s in frontier:
            for o in orbits:
                u = s | o
                if u not in found:
                    found.add(u)
                    if len(found) > limit:
                        raise ResourceLimitError(f"more than {limit} f-closed sets")
                    nxt.append(u)
        frontier = nxt
    return sorted(found, key=_set_key)


@dataclass(frozen=True)
class PSResult:
    hypothesis_holds: bool
    variant: str
    mode: str
    witness: Optional[frozenset] = None  # f-closed set violating the hypothesis
    fixed_points: tuple = ()  # ((T, x), ...) for variant i; ((X, x),) for ii
    trace: tuple = ()


def _contracting_ball_inside(family, f, A, mode):
    for k, b in enumerate(family.balls):
        if b.members and b.members <= A and classify_set(f, b.members, mode).f_contracting:
            return k
    return None


def theorem_ps_engine(family: BallFamily, f: SelfMap, variant: str = "i", contracting_mode: str = "strict") -> PSResult:
    """Fixed points from f-contracting balls inside f-closed sets.

    Variant ``i``: every f-closed set must contain an f-contracting ball; a
    fixed point is then found in each f-closed T by descending
    T -> B -> f(B) -> ... until a singleton remains.  Variant ``ii``: every
    f-closed set must itself be an f-contracting ball, and then the fixed
    point is unique.
    """
    if len(f) != len(family.space):
        raise DomainError("map and family live on different spaces")
    if variant not in ("i", "ii"):
        raise DomainError(f"unknown variant {variant!r}")
    closed_sets = f_closed_sets(f)
    if variant == "i":
        inside = {}
        for A in closed_sets:
            k = _contracting_ball_inside(family, f, A, contracting_mode)
            if k is None:
                return PSResult(False, variant, contracting_mode, witness=A)
            inside[A] = k
        results = []
        traces = []
        for T in closed_sets:
            cur = T
            trace = [T]
            while True:
                if len(cur) == 1:
                    (x,) = cur
                    break
                k = inside[cur] if cur in inside else _contracting_ball_inside(family, f, cur, contracting_mode)
                B = family.balls[k].members
                if len(B) == 1:
                    (x,) = B
                    break
                cur = f.image(B)
                trace.append(cur)
            if f(x) != x:
                raise AssertionError(f"descent returned a non-fixed point {x}")
            results.append((T, x))
            traces.append(tuple(trace))
        return PSResult(True, variant, contracting_mode, fixed_points=tuple(results), trace=tuple(traces))
    sets = set(family.member_sets())
    for A in closed_sets:
        if A not in sets or not classify_set(f, A, contracting_mode).f_contracting:
            return PSResult(False, variant, contracting_mode, witness=A)
    fixed = f.fixed_points()
    if len(fixed) != 1:
        raise AssertionError(f"hypothesis held but fixed points are {fixed}")
    return PSResult(True, variant, contracting_mode, fixed_points=((family.space.all_points(), fixed[0]),))


@dataclass(frozen=True)
class CountConditionReport:
    holds: bool
    witness: Optional[tuple] = None  # (x, r) with no admissible y
    meta_checked: bool = False
    meta_agrees: Optional[bool] = None


def check_count_condition(space: FiniteSemimetricSpace, f: SelfMap, radii) -> CountConditionReport:
    """Every non-fixed x and every r in S admit y in B_r(x) unrelated to x by iterates.

    Unrelated means f^n(x) != y and f^n(y) != x for every n >= 1.  When the
    condition holds for f != id, the strict variant-i hypothesis over B_S
    must fail; that consequence is checked and reported.
    """
    radii = sorted({as_scalar(r) for r in radii})
    forward = [f.orbit(x, include_start=False) for x in range(len(space))]
    holds = True
    witness = None
    for x in range(len(space)):
        if f(x) == x:
            continue
        for r in radii:
            members = ball(space, x, r).members
            if not any(y not in forward[x] and x not in forward[y] for y in sorted(members)):
                holds, witness = False, (x, r)
                break
        if not holds:
            break
    if holds and not f.is_identity():
        family = build_ball_family(space, radii)
        result = theorem_ps_engine(family, f, "i", "strict")
        return CountConditionReport(True, None, True, not result.hypothesis_holds)
    return CountConditionReport(holds, witness)
