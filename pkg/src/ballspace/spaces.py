"""Finite semimetric spaces, triangle laws and metric balls."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional, Sequence

from .errors import DomainError, InvariantError, MalformedInputError
from .scalar import ONE, ZERO, ExactScalar, as_scalar, smax

__all__ = [
    "Ball",
    "BallMeta",
    "FiniteSemimetricSpace",
    "GReport",
    "SemimetricReport",
    "SemitriangularReport",
    "TriangleLaw",
    "Violation",
    "ball",
    "check_g_condition",
    "discrete_space",
    "min_b_constant",
    "verify_semimetric",
    "verify_semitriangular",
]


@dataclass(frozen=True)
class Violation:
    condition: str
    indices: tuple
    detail: str = ""


@dataclass(frozen=True)
class SemimetricReport:
    valid: bool
    violations: tuple = ()


def _as_table(table) -> list:
    rows = [list(row) for row in table]
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise MalformedInputError(f"distance table is not square (row {i} has {len(row)} entries, expected {n})")
    out = []
    for i, row in enumerate(rows):
        converted = []
        for j, v in enumerate(row):
            v = as_scalar(v)
            if v.is_infinite:
                raise MalformedInputError(f"distance ({i},{j}) is infinite")
            if v < 0:
                raise MalformedInputError(f"distance ({i},{j}) = {v} is negative")
            converted.append(v)
        out.append(converted)
    return out


def verify_semimetric(table) -> SemimetricReport:
    """Check zero diagonal, positivity off the diagonal and symmetry.

    Every offending index pair is reported; diagonal problems and positivity
    problems are both filed under S1, asymmetry under S2.
    """
    rows = _as_table(table)
    n = len(rows)
    violations = []
    for i in range(n):
        if rows[i][i] != 0:
            violations.append(Violation("S1", (i, i), f"d(x,x) = {rows[i][i]} != 0"))
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] == 0 or rows[j][i] == 0:
                violations.append(Violation("S1", (i, j), "distinct points at distance 0"))
            if rows[i][j] != rows[j][i]:
                violations.append(Violation("S2", (i, j), f"{rows[i][j]} != {rows[j][i]}"))
    return SemimetricReport(not violations, tuple(violations))


class FiniteSemimetricSpace:
    """Labelled points with a validated, symmetric exact distance table.

    Point order is the canonical order for every witness search.
    """

    __slots__ = ("name", "points", "dist", "_index")

    def __init__(self, points: Sequence[str], dist, name: str = "X"):
        points = tuple(str(p) for p in points)
        if len(set(points)) != len(points):
            raise InvariantError("point labels must be distinct")
        rows = _as_table(dist)
        if len(rows) != len(points):
            raise MalformedInputError(f"{len(points)} points but a {len(rows)}x{len(rows)} table")
        report = verify_semimetric(rows)
        if not report.valid:
            v = report.violations[0]
            i, j = v.indices
            raise InvariantError(
                f"({v.condition}) violated at ({points[i]}, {points[j]}): {v.detail}"
            )
        self.name = name
        self.points = points
        self.dist = tuple(tuple(r) for r in rows)
        self._index = {p: i for i, p in enumerate(points)}

    @classmethod
    def from_function(cls, points, d, name="X"):
        pts = list(points)
        return cls([str(p) for p in pts], [[d(x, y) for y in pts] for x in pts], name=name)

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"FiniteSemimetricSpace({self.name!r}, n={len(self.points)})"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSemimetricSpace)
            and self.points == other.points
            and self.dist == other.dist
        )

    def __hash__(self):
        return hash((self.points, self.dist))

    def index(self, label) -> int:
        if isinstance(label, int):
            if not 0 <= label < len(self.points):
                raise DomainError(f"point index {label} out of range")
            return label
        try:
            return self._index[label]
        except KeyError:
            raise DomainError(f"unknown point {label!r}") from None

    def d(self, x, y) -> ExactScalar:
        return self.dist[self.index(x)][self.index(y)]

    def labels(self, members: Iterable[int]) -> list:
        return [self.points[i] for i in sorted(members)]

    def all_points(self) -> frozenset:
        return frozenset(range(len(self.points)))

    def realized_distances(self) -> list:
        """Sorted distinct positive distances."""
        n = len(self.points)
        return sorted({self.dist[i][j] for i in range(n) for j in range(i + 1, n)})

    def subspace(self, members: Iterable[int], name=None) -> "FiniteSemimetricSpace":
        keep = sorted(set(members))
        return FiniteSemimetricSpace(
            [self.points[i] for i in keep],
            [[self.dist[i][j] for j in keep] for i in keep],
            name=name or self.name,
        )


def discrete_space(labels: Sequence[str], name="X") -> FiniteSemimetricSpace:
    """Every pair of distinct points at distance 1."""
    n = len(labels)
    return FiniteSemimetricSpace(labels, [[0 if i == j else 1 for j in range(n)] for i in range(n)], name=name)


def min_b_constant(space: FiniteSemimetricSpace) -> ExactScalar:
    """Smallest K with d(x,z) <= K(d(x,y) + d(y,z)) for all triples.

    Spaces with fewer than three points get K = 1, as the condition is
    vacuous there.
    """
    n = len(space)
    d = space.dist
    best = ONE
    for x in range(n):
        for z in range(n):
            if x == z:
                continue
            dxz = d[x][z]
            for y in range(n):
                if y == x or y == z:
                    continue
                denom = d[x][y] + d[y][z]
                # ratio > best  <=>  dxz > best * denom  (denom > 0)
                if dxz > best * denom:
                    best = dxz / denom
    return best


@dataclass(frozen=True)
class TriangleLaw:
    """A built-in semitriangular function g.

    ``b_metric``: K(a+b); ``max_law``: max(a,b); ``power_mean``:
    K(a^p + b^p)^(1/p) for a positive integer p.  All comparisons against g
    are made on p-th powers, so no roots are ever taken.
    """

    kind: str
    K: ExactScalar = ONE
    p: int = 1

    def __post_init__(self):
        object.__setattr__(self, "K", as_scalar(self.K))
        if self.kind not in ("b_metric", "max_law", "power_mean"):
            raise DomainError(f"unknown triangle law {self.kind!r}")
        if self.K.is_infinite or self.K < 1:
            raise DomainError("the law constant K must be a finite value >= 1")
        if not isinstance(self.p, int) or self.p < 1:
            raise DomainError("power_mean exponent must be a positive integer")
        if self.kind != "power_mean" and self.p != 1:
            raise DomainError("only power_mean takes an exponent")

    @classmethod
    def b_metric(cls, K=1):
        return cls("b_metric", as_scalar(K))

    @classmethod
    def max_law(cls):
        return cls("max_law")

    @classmethod
    def power_mean(cls, p, K=1):
        return cls("power_mean", as_scalar(K), p)

    @property
    def exponent(self) -> int:
        return self.p

    def gp(self, a, b) -> ExactScalar:
        """g(a, b) raised to the law's exponent."""
        a, b = as_scalar(a), as_scalar(b)
        if self.kind == "b_metric":
            return self.K * (a + b)
        if self.kind == "max_law":
            return smax(a, b)
        return self.K ** self.p * (a ** self.p + b ** self.p)

    def evaluate(self, a, b) -> ExactScalar:
        a, b = as_scalar(a), as_scalar(b)
        if self.p == 1:
            return self.gp(a, b)
        if a == 0 or b == 0:
            return self.K * smax(a, b)
        if a == b and self.p == 2:
            # K (2 a^2)^(1/2) = K a sqrt 2
            return self.K * a * ExactScalar(0, 1)
        raise DomainError(f"g({a},{b}) is not exactly representable for p = {self.p}")

    def bounds(self, c, a, b) -> bool:
        """True iff c <= g(a, b)."""
        c = as_scalar(c)
        return c ** self.p <= self.gp(a, b)

    def __str__(self):
        if self.kind == "max_law":
            return "max_law"
        if self.kind == "b_metric":
            return f"b_metric(K={self.K})"
        return f"power_mean(p={self.p},K={self.K})"


@dataclass(frozen=True)
class GReport:
    holds: bool
    witness: Optional[tuple] = None
    detail: str = ""


def check_g_condition(space: FiniteSemimetricSpace, law: TriangleLaw) -> GReport:
    """Scan ordered triples in index order for d(x,z) > g(d(x,y), d(y,z))."""
    n = len(space)
    d = space.dist
    for x, y, z in product(range(n), repeat=3):
        if not law.bounds(d[x][z], d[x][y], d[y][z]):
            return GReport(
                False,
                (x, y, z),
                f"d({space.points[x]},{space.points[z]}) = {d[x][z]} exceeds "
                f"g({d[x][y]}, {d[y][z]}) under {law}",
            )
    return GReport(True)


@dataclass(frozen=True)
class SemitriangularReport:
    nonreducing: bool
    nondecreasing: bool
    amenable: bool
    decay: tuple  # ((eps, g(eps,eps)^p), ...)
    exponent: int
    failures: tuple = ()

    @property
    def passed(self) -> bool:
        return self.nonreducing and self.nondecreasing and self.amenable


def verify_semitriangular(law: TriangleLaw, grid, eps_list=()) -> SemitriangularReport:
    """Pointwise checks of the semitriangular axioms on a finite grid.

    Continuity at the origin cannot be decided from finite data; the
    values g(eps, eps) along ``eps_list`` are reported instead (as p-th
    powers when the law has exponent p > 1).
    """
    pairs = [(as_scalar(a), as_scalar(b)) for a, b in grid]
    if not pairs:
        raise DomainError("grid must be nonempty")
    if any(a < 0 or b < 0 for a, b in pairs):
        raise DomainError("grid values must be nonnegative")
    failures = []
    nonreducing = True
    amenable = True
    values = {pr: law.gp(*pr) for pr in pairs}
    p = law.exponent
    for (a, b), g in values.items():
        if g < smax(a, b) ** p:
            nonreducing = False
            failures.append(("nonreducing", (a, b)))
        if (g == 0) != (a == 0 and b == 0):
            amenable = False
            failures.append(("amenable", (a, b)))
    nondecreasing = True
    for (a, b), (c, e) in product(values, repeat=2):
        if a <= c and b <= e and values[(a, b)] > values[(c, e)]:
            nondecreasing = False
            failures.append(("nondecreasing", (a, b, c, e)))
    decay = tuple((as_scalar(e), law.gp(e, e)) for e in eps_list)
    return SemitriangularReport(nonreducing, nondecreasing, amenable, decay, p, tuple(failures))


@dataclass(frozen=True)
class BallMeta:
    center: int
    radius: ExactScalar
    kind: str  # closed-ball | open-ball | open-ball-complement | closed-set | explicit


@dataclass(frozen=True)
class Ball:
    members: frozenset
    meta: Optional[BallMeta] = field(default=None, compare=False)

    def __len__(self):
        return len(self.members)

    def __contains__(self, item):
        return item in self.members

    def __iter__(self):
        return iter(sorted(self.members))


_MODES = {"closed": "closed-ball", "open": "open-ball", "open_complement": "open-ball-complement"}


def ball(space: FiniteSemimetricSpace, x, r, mode: str = "closed") -> Ball:
    """B_r(x) (``closed``), the open ball (``open``) or X minus the open ball."""
    if mode not in _MODES:
        raise DomainError(f"unknown ball mode {mode!r}")
    r = as_scalar(r)
    if r.is_infinite or r <= 0:
        raise DomainError("ball radius must be a finite positive value")
    c = space.index(x)
    row = space.dist[c]
    if mode == "closed":
        members = frozenset(y for y, v in enumerate(row) if v <= r)
    elif mode == "open":
        members = frozenset(y for y, v in enumerate(row) if v < r)
    else:
        members = frozenset(y for y, v in enumerate(row) if v >= r)
    return Ball(members, BallMeta(c, r, _MODES[mode]))
