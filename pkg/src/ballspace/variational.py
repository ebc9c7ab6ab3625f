"""Caristi-Kirk and Oettli-Thera balls, singleton-ball descent and its consequences.

Functions here take a :class:`FiniteSemimetricSpace` and bifunction tables
indexed like the space's points.  A bifunction value ``+inf`` excludes the
pair from the corresponding ball.

Note on the relaxation constant: taking y = z in the relaxed triangle
condition gives Phi(x,z) <= K Phi(x,z), so for K > 1 every admissible
bifunction is nonnegative and all of its balls are singletons.  The
Caristi-derived table K(phi(y) - phi(x)) is admissible for K > 1 only when
phi is constant; :func:`ot_from_ck` reports that honestly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .balls import BallFamily, NestReport, SelfMap, is_nest
from .errors import DomainError, InvariantError, MalformedInputError, PreconditionError
from .scalar import INF, ONE, ZERO, ExactScalar, as_scalar, smin
from .spaces import Ball, BallMeta, FiniteSemimetricSpace, min_b_constant

__all__ = [
    "BoundaryReport",
    "CKConversion",
    "CaristiResult",
    "DescentResult",
    "EkelandResult",
    "ExtendedBiFunction",
    "NestPotentialReport",
    "OTBallReport",
    "Petal",
    "PetalTheoremReport",
    "ScalarFunction",
    "SigmaFixtureReport",
    "StrongContractivityReport",
    "TerminalPointReport",
    "caristi_fixed_point",
    "check_ot_conditions",
    "ck_ball",
    "ekeland_point",
    "is_strongly_contractive",
    "lemma2_checks",
    "ot_ball",
    "ot_ball_system",
    "ot_boundary_checks",
    "ot_from_ck",
    "petal",
    "petal_theorem_check",
    "sigma_semicomplete_implication_check",
    "singleton_ball_descent",
    "singleton_ball_points",
    "terminal_point_check",
    "verify_lemma1",
]


@dataclass(frozen=True)
class ScalarFunction:
    values: tuple
    name: str = "phi"
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        vals = tuple(as_scalar(v) for v in self.values)
        if any(v.is_infinite for v in vals):
            raise InvariantError("Caristi functions are finite valued")
        object.__setattr__(self, "values", vals)

    def __call__(self, x: int) -> ExactScalar:
        return self.values[x]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ExtendedBiFunction:
    """A table Phi(x, y) with values in Q(sqrt 2) and +inf, plus its constant K.

    Construction does not validate the Oettli-Thera conditions; use
    :func:`check_ot_conditions`.
    """

    table: tuple
    K: ExactScalar = ONE
    name: str = "Phi"
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        rows = tuple(tuple(as_scalar(v) for v in row) for row in self.table)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise MalformedInputError("bifunction table must be square")
        K = as_scalar(self.K)
        if K.is_infinite or K < 1:
            raise DomainError("K must be a finite value >= 1")
        object.__setattr__(self, "table", rows)
        object.__setattr__(self, "K", K)

    def __call__(self, x: int, y: int) -> ExactScalar:
        return self.table[x][y]

    def __len__(self):
        return len(self.table)

    def scaled(self, factor) -> "ExtendedBiFunction":
        factor = as_scalar(factor)
        if factor <= 0:
            raise DomainError("scaling factor must be positive")
        return ExtendedBiFunction(tuple(tuple(v * factor for v in row) for row in self.table), self.K, self.name)

    def row_inf(self, x: int) -> ExactScalar:
        return smin(self.table[x])


def check_ot_conditions(phi: ExtendedBiFunction) -> Optional[tuple]:
    """First violation of the zero diagonal or relaxed triangle condition.

    Returns ``("ii", (x,))`` or ``("iii", (x, y, z))``, or None when both
    hold.  Lower semicontinuity is vacuous on a finite space and the
    bounded-below condition holds at every point (rows contain 0 and no
    -inf), so neither needs checking.
    """
    n = len(phi)
    t = phi.table
    K = phi.K
    for x in range(n):
        if t[x][x] != 0:
            return ("ii", (x,))
    for x in range(n):
        tx = t[x]
        for y in range(n):
            txy = tx[y]
            if txy.is_infinite:
                continue
            ty = t[y]
            for z in range(n):
                rhs = ty[z]
                if rhs.is_infinite:
                    continue
                # finite rhs but infinite lhs, or plain violation
                if tx[z].is_infinite or tx[z] > K * (txy + rhs):
                    return ("iii", (x, y, z))
    return None


def _require_ot(space, phi, *, need_bk=True):
    if len(phi) != len(space):
        raise DomainError("bifunction and space sizes differ")
    bad = check_ot_conditions(phi)
    if bad is not None:
        cond, idx = bad
        labels = ",".join(space.points[i] for i in idx)
        raise PreconditionError(f"condition ({cond}) fails at ({labels})")
    if need_bk and min_b_constant(space) > phi.K:
        raise PreconditionError(f"space does not satisfy the relaxed triangle inequality with K = {phi.K}")


def ck_ball(space: FiniteSemimetricSpace, phi: ScalarFunction, K, x) -> Ball:
    """{y : d(x,y) <= K phi(x) - K phi(y)}."""
    K = as_scalar(K)
    if K.is_infinite or K < 1:
        raise DomainError("K must be a finite value >= 1")
    x = space.index(x)
    row = space.dist[x]
    members = frozenset(y for y in range(len(space)) if row[y] <= K * phi(x) - K * phi(y))
    return Ball(members, BallMeta(x, ZERO, "explicit"))


def ot_ball(space: FiniteSemimetricSpace, phi: ExtendedBiFunction, x) -> Ball:
    """{y : d(x,y) <= -Phi(x,y)}; pairs with Phi = +inf never qualify."""
    x = space.index(x)
    row = space.dist[x]
    prow = phi.table[x]
    members = frozenset(
        y for y in range(len(space)) if not prow[y].is_infinite and row[y] + prow[y] <= 0
    )
    return Ball(members, BallMeta(x, ZERO, "explicit"))


def ot_ball_system(space, phi) -> list:
    return [ot_ball(space, phi, x).members for x in range(len(space))]


def singleton_ball_points(space, phi) -> frozenset:
    return frozenset(x for x, b in enumerate(ot_ball_system(space, phi)) if b == {x})


@dataclass(frozen=True)
class CKConversion:
    bifunction: ExtendedBiFunction
    ot_violation: Optional[tuple]
    balls_equal: bool
    mismatch: Optional[int] = None

    @property
    def conditions_hold(self) -> bool:
        return self.ot_violation is None


def ot_from_ck(space: FiniteSemimetricSpace, phi: ScalarFunction, K=1) -> CKConversion:
    """Phi(x,y) := K phi(y) - K phi(x) and a pointwise comparison of the two ball systems."""
    K = as_scalar(K)
    n = len(phi)
    table = tuple(tuple(K * phi(y) - K * phi(x) for y in range(n)) for x in range(n))
    bif = ExtendedBiFunction(table, K, name=f"OT[{phi.name}]")
    violation = check_ot_conditions(bif)
    for x in range(n):
        if ck_ball(space, phi, K, x).members != ot_ball(space, bif, x).members:
            return CKConversion(bif, violation, False, x)
    return CKConversion(bif, violation, True)


@dataclass(frozen=True)
class OTBallReport:
    passed: bool
    violation: Optional[tuple] = None  # (property, x, y)


def verify_lemma1(space, phi, *, subset_check=None) -> OTBallReport:
    """Center membership, nesting and strict shrinkage of Oettli-Thera balls.

    Checks for every x: x in B_x; y in B_x implies B_y subset of B_x;
    y in B_x minus x implies B_y a proper subset and Phi(x,y) < Phi(y,x).
    Raises :class:`PreconditionError` when the zero diagonal or relaxed
    triangle condition fails, or the space is not a b-metric for phi.K.

    ``subset_check`` replaces the proper-subset test of the third property;
    it exists so mutation tests can weaken it.
    """
    _require_ot(space, phi)
    balls = ot_ball_system(space, phi)
    proper = subset_check or (lambda inner, outer: inner < outer)
    n = len(space)
    for x in range(n):
        if x not in balls[x]:
            return OTBallReport(False, ("center", x, x))
    for x in range(n):
        for y in sorted(balls[x]):
            if not balls[y] <= balls[x]:
                return OTBallReport(False, ("nesting", x, y))
            if y != x:
                if not proper(balls[y], balls[x]):
                    return OTBallReport(False, ("strict", x, y))
                if not phi(x, y) < phi(y, x):
                    return OTBallReport(False, ("asymmetry", x, y))
    return OTBallReport(True)


@dataclass(frozen=True)
class StrongContractivityReport:
    strongly_contractive: bool
    witness: Optional[tuple] = None  # (condition number, x, y)


def is_strongly_contractive(designated: Sequence) -> StrongContractivityReport:
    """Check a designated ball system x -> B_x for the three contractivity conditions."""
    balls = [frozenset(b) for b in designated]
    n = len(balls)
    for x in range(n):
        if x not in balls[x]:
            return StrongContractivityReport(False, (1, x, x))
    for x in range(n):
        for y in sorted(balls[x]):
            if not 0 <= y < n:
                raise DomainError(f"ball of point {x} contains unknown point {y}")
            if not balls[y] <= balls[x]:
                return StrongContractivityReport(False, (2, x, y))
            if y != x and not balls[y] < balls[x]:
                return StrongContractivityReport(False, (3, x, y))
    return StrongContractivityReport(True)


@dataclass(frozen=True)
class DescentResult:
    point: int
    trace: tuple
    start: int

    @property
    def moves(self) -> int:
        return len(self.trace) - 1


def singleton_ball_descent(space, phi: ExtendedBiFunction, x0=0, *, check=True) -> DescentResult:
    """Walk from x0 to a point whose ball is a singleton.

    Each step moves to the point of B_current minus current that minimizes
    Phi(x0, .), ties broken by point order.  Balls shrink strictly along the
    walk, so at most |X| - 1 moves are made.
    """
    if check:
        _require_ot(space, phi)
    x0 = space.index(x0)
    balls = ot_ball_system(space, phi)
    cur = x0
    trace = [cur]
    row0 = phi.table[x0]
    for _ in range(len(space)):
        rest = sorted(balls[cur] - {cur})
        if not rest:
            break
        cur = min(rest, key=lambda y: (row0[y], y))
        trace.append(cur)
    else:
        raise PreconditionError("descent did not reach a singleton ball within |X| moves")
    if balls[cur] != {cur}:
        raise AssertionError("descent ended on a non-singleton ball")
    return DescentResult(cur, tuple(trace), x0)


@dataclass(frozen=True)
class CaristiResult:
    hypothesis_holds: bool
    point: Optional[int] = None
    witness: Optional[int] = None
    descent: Optional[DescentResult] = None


def caristi_fixed_point(space, phi: ExtendedBiFunction, f, x0=0, *, check=True) -> CaristiResult:
    """Fixed point of f (or a point with a in F(a)) under d(x, f x) <= -Phi(x, f x).

    ``f`` is a :class:`SelfMap`, or a sequence/mapping of point sets for the
    set-valued form, where some y in F(x) must satisfy the inequality.
    """
    if check:
        _require_ot(space, phi)
    n = len(space)
    balls = ot_ball_system(space, phi)
    if isinstance(f, SelfMap):
        if len(f) != n:
            raise DomainError("map and space sizes differ")
        for x in range(n):
            if f(x) not in balls[x]:
                return CaristiResult(False, witness=x)
        res = singleton_ball_descent(space, phi, x0, check=False)
        a = res.point
        if f(a) != a:
            raise AssertionError(f"Caristi pipeline returned {a} with f(a) = {f(a)}")
        return CaristiResult(True, a, descent=res)
    F = [frozenset(f[x]) for x in range(n)]
    for x in range(n):
        if not F[x]:
            raise MalformedInputError(f"F({space.points[x]}) is empty")
    for x in range(n):
        if not F[x] & balls[x]:
            return CaristiResult(False, witness=x)
    res = singleton_ball_descent(space, phi, x0, check=False)
    a = res.point
    if a not in F[a]:
        raise AssertionError(f"Caristi pipeline returned {a} not in F(a)")
    return CaristiResult(True, a, descent=res)


@dataclass(frozen=True)
class TerminalPointReport:
    point: int
    verified: bool
    descent: DescentResult


def terminal_point_check(space, phi, x0=0) -> TerminalPointReport:
    """a with d(a,x) > -Phi(a,x) for every x != a."""
    res = singleton_ball_descent(space, phi, x0)
    a = res.point
    row, prow = space.dist[a], phi.table[a]
    ok = all(prow[x].is_infinite or row[x] + prow[x] > 0 for x in range(len(space)) if x != a)
    return TerminalPointReport(a, ok, res)


@dataclass(frozen=True)
class EkelandResult:
    point: int
    within_delta: bool
    strict_minimum: bool
    terminal_inequality: bool
    start_inequality: bool
    descent: DescentResult

    @property
    def verified(self) -> bool:
        return self.within_delta and self.strict_minimum and self.terminal_inequality and self.start_inequality


def ekeland_point(space, phi: ExtendedBiFunction, gamma, x0=0, eps=0, delta=0) -> EkelandResult:
    """Point a near x0 that strictly minimizes Phi(a, .) + gamma d(., a).

    Requires -eps <= inf Phi(x0, .) and delta >= eps / gamma.  The search
    descends in the balls of Phi / gamma, which has the same constant and
    the same Oettli-Thera elements as Phi.
    """
    gamma, eps, delta = as_scalar(gamma), as_scalar(eps), as_scalar(delta)
    if gamma.is_infinite or gamma <= 0:
        raise DomainError("gamma must be a finite positive value")
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    x0 = space.index(x0)
    _require_ot(space, phi)
    if -eps > phi.row_inf(x0):
        raise DomainError(f"bound failed: -eps = {-eps} exceeds inf Phi(x0, .) = {phi.row_inf(x0)}")
    if delta < eps / gamma:
        raise DomainError(f"bound failed: delta = {delta} is below eps/gamma = {eps / gamma}")
    psi = phi.scaled(ONE / gamma)
    res = singleton_ball_descent(space, psi, x0, check=False)
    a = res.point
    n = len(space)
    d = space.dist
    pa = phi.table[a]
    strict_min = all(pa[x].is_infinite or pa[x] + gamma * d[x][a] > 0 for x in range(n) if x != a)
    within = d[x0][a] <= delta
    terminal = all(pa[x].is_infinite or gamma * d[a][x] > -pa[x] for x in range(n) if x != a)
    start = not phi(x0, a).is_infinite and gamma * d[x0][a] <= -phi(x0, a)
    return EkelandResult(a, within, strict_min, terminal, start, res)


@dataclass(frozen=True)
class Petal:
    gamma: ExactScalar
    a: int
    b: int
    members: frozenset


def petal(space, gamma, a, b, M=None) -> Petal:
    """{y in M : gamma d(y,a) + d(y,b) <= d(a,b)}."""
    gamma = as_scalar(gamma)
    if gamma.is_infinite or gamma <= 0:
        raise DomainError("gamma must be a finite positive value")
    a, b = space.index(a), space.index(b)
    M = space.all_points() if M is None else frozenset(space.index(m) for m in M)
    d = space.dist
    members = frozenset(y for y in M if gamma * d[y][a] + d[y][b] <= d[a][b])
    return Petal(gamma, a, b, members)


@dataclass(frozen=True)
class PetalTheoremReport:
    identity_holds: bool
    identity_mismatch: Optional[int]
    point: Optional[int]
    in_start_petal: bool
    isolated: bool
    trace: tuple = ()

    @property
    def conclusion_holds(self) -> bool:
        return self.point is not None and self.in_start_petal and self.isolated


def petal_theorem_check(space, M, x0, b, gamma, K=1) -> PetalTheoremReport:
    """Petals through b restricted to M, compared with the Caristi balls of d(., b)/(K gamma).

    Then descends in M from x0 and checks the landing point a lies in
    P_gamma(x0, b) with P_gamma(a, b) meeting M only in a.  On spaces that
    are not metric the descent may leave the starting petal; that is
    reported, not hidden.
    """
    gamma, K = as_scalar(gamma), as_scalar(K)
    M = sorted(frozenset(space.index(m) for m in M))
    b = space.index(b)
    x0 = space.index(x0)
    if b in M:
        raise DomainError("b must lie outside M")
    if x0 not in M:
        raise DomainError("x0 must lie in M")
    sub = space.subspace(M)
    local = {g: i for i, g in enumerate(M)}
    phi = ScalarFunction([space.dist[m][b] / (K * gamma) for m in M], name="petal-phi")
    mismatch = None
    for m in M:
        p = petal(space, gamma, m, b, M).members
        ck = frozenset(M[i] for i in ck_ball(sub, phi, K, local[m]).members)
        if p != ck:
            mismatch = m
            break
    conv = ot_from_ck(sub, phi, K)
    # K phi(y) - K phi(x) is additive, so it always satisfies the relaxed
    # triangle condition with constant 1; descend with that.
    bif = ExtendedBiFunction(conv.bifunction.table, ONE)
    res = singleton_ball_descent(sub, bif, local[x0], check=False)
    a = M[res.point]
    in_start = a in petal(space, gamma, x0, b, M).members
    isolated = petal(space, gamma, a, b, M).members == {a}
    return PetalTheoremReport(
        mismatch is None, mismatch, a, in_start, isolated, tuple(M[i] for i in res.trace)
    )


@dataclass(frozen=True)
class BoundaryReport:
    zero_inf_hypothesis: bool
    zero_inf_witness: Optional[int]
    zero_inf_point: Optional[int]
    zero_inf_verified: Optional[bool]
    set_hypothesis: Optional[bool] = None
    set_witness: Optional[int] = None
    set_point: Optional[int] = None
    set_verified: Optional[bool] = None
    reading: str = "corrected"


def _has_move(space, phi, y):
    row, prow = space.dist[y], phi.table[y]
    return any(z != y and not prow[z].is_infinite and row[z] + prow[z] <= 0 for z in range(len(space)))


def ot_boundary_checks(space, phi, x0=0, A=None, *, literal=False) -> BoundaryReport:
    """Zero-infimum point and set-intersection consequences of singleton-ball descent.

    With ``A`` given, the set hypothesis asks every x in B_x0 outside A
    (or, with ``literal=True``, every x in B_x0) to admit y != x with
    d(x,y) <= -Phi(x,y).
    """
    _require_ot(space, phi)
    x0 = space.index(x0)
    B0 = ot_ball(space, phi, x0).members
    a = singleton_ball_descent(space, phi, x0, check=False).point
    witness = None
    for y in sorted(B0):
        if phi.row_inf(y) < 0 and not _has_move(space, phi, y):
            witness = y
            break
    if witness is None:
        zero_point, zero_ok = a, a in B0 and phi.row_inf(a) == 0
    else:
        zero_point, zero_ok = None, None
    report = dict(
        zero_inf_hypothesis=witness is None,
        zero_inf_witness=witness,
        zero_inf_point=zero_point,
        zero_inf_verified=zero_ok,
        reading="literal" if literal else "corrected",
    )
    if A is not None:
        A = frozenset(space.index(v) for v in A)
        scope = B0 if literal else B0 - A
        set_witness = next((x for x in sorted(scope) if not _has_move(space, phi, x)), None)
        report.update(set_hypothesis=set_witness is None, set_witness=set_witness)
        if set_witness is None:
            report.update(set_point=a, set_verified=a in B0 and a in A)
    return BoundaryReport(**report)


@dataclass(frozen=True)
class NestPotentialReport:
    passed: bool
    violation: Optional[tuple] = None  # (check, x, y)


def lemma2_checks(space, phi, x0, A) -> NestPotentialReport:
    """Distance bound and membership equivalences along a nest of balls centred in B_x0.

    For x, y in A: d(x,y) <= |Phi(x0,x) - Phi(x0,y)|, and
    y in B_x  <=>  Phi(x,y) <= Phi(y,x)  <=>  Phi(x0,y) <= Phi(x0,x).
    """
    _require_ot(space, phi)
    x0 = space.index(x0)
    A = sorted({space.index(v) for v in A})
    balls = ot_ball_system(space, phi)
    outside = [x for x in A if x not in balls[x0]]
    if outside:
        raise PreconditionError(f"center {space.points[outside[0]]} is not in B_x0")
    family = BallFamily(space, tuple(Ball(balls[x]) for x in A), name="nest")
    nest = is_nest(family, list(range(len(A))))
    if not nest.is_nest:
        i, j = nest.witness
        raise PreconditionError(f"balls of {space.points[A[i]]} and {space.points[A[j]]} are incomparable")
    for x in A:
        for y in A:
            lhs = space.dist[x][y]
            if lhs > abs(phi(x0, x) - phi(x0, y)):
                return NestPotentialReport(False, ("distance-bound", x, y))
            i = y in balls[x]
            ii = phi(x, y) <= phi(y, x)
            iii = phi(x0, y) <= phi(x0, x)
            if not (i == ii == iii):
                return NestPotentialReport(False, ("equivalence", x, y))
    return NestPotentialReport(True)


@dataclass(frozen=True)
class SigmaFixtureReport:
    name: str
    hypothesis_holds: bool
    scan_fixed_points: tuple = ()
    pipeline_point: Optional[int] = None
    agrees: Optional[bool] = None


def sigma_semicomplete_implication_check(fixtures) -> list:
    """For (name, space, h, f) fixtures with d(x, f x) <= h(x) - h(f x): find a fixed point twice.

    h maps into [0, +inf]; the inequality is read additively as
    d(x, f x) + h(f x) <= h(x).  The pipeline runs the Caristi engine with
    Phi(x,y) = h(y) - h(x) on the f-invariant set where h is finite.
    """
    out = []
    for name, space, h, f in fixtures:
        h = [as_scalar(v) for v in h]
        if any(v < 0 for v in h):
            raise MalformedInputError(f"fixture {name}: h must be nonnegative")
        finite = [x for x in range(len(space)) if not h[x].is_infinite]
        if not finite:
            raise MalformedInputError(f"fixture {name}: h is not proper")
        holds = all(space.dist[x][f(x)] + h[f(x)] <= h[x] for x in range(len(space)))
        if not holds:
            out.append(SigmaFixtureReport(name, False))
            continue
        scan = tuple(f.fixed_points())
        local = {g: i for i, g in enumerate(finite)}
        sub = space.subspace(finite)
        table = [[h[y] - h[x] for y in finite] for x in finite]
        sub_f = SelfMap([local[f(x)] for x in finite])
        res = caristi_fixed_point(sub, ExtendedBiFunction(table, ONE), sub_f, 0, check=False)
        point = finite[res.point] if res.hypothesis_holds else None
        out.append(SigmaFixtureReport(name, True, scan, point, point is not None and point in scan))
    return out
