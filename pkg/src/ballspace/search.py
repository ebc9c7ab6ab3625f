"""Seeded instance generators, property suites and counterexample search.

Trial ``t`` of a search with seed ``s`` draws from ``random.Random(s ^ t)``,
so any single trial can be replayed on its own.  A failing instance is
shrunk by deleting points and simplifying values while it keeps failing
with the same tag.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Iterator, Optional

from . import convergence as conv
from . import variational as var
from .balls import SelfMap, build_ball_family, check_count_condition
from .convergence import EventuallyPeriodicSequence, FiniteTopology
from .errors import BallspaceError, DomainError, PreconditionError
from .io import serialize
from .scalar import INF, ONE, ZERO, ExactScalar, as_scalar, smin
from .spaces import FiniteSemimetricSpace, discrete_space, min_b_constant

__all__ = [
    "DEFAULT_SEED",
    "Instance",
    "Outcome",
    "SUITES",
    "SearchSpec",
    "Suite",
    "Verdict",
    "counterexample_search",
    "default_seed",
    "mutant_suites",
    "random_metric_space",
    "random_ot_bifunction",
    "random_semimetric_space",
    "run_exhaustive",
    "serialize_instance",
    "shrink",
]

DEFAULT_SEED = 20240611


def default_seed() -> int:
    raw = os.environ.get("BALLSPACE_SEED")
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise DomainError(f"BALLSPACE_SEED must be an integer, got {raw!r}") from None


def trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(seed ^ trial)


# ---------------------------------------------------------------------------
# generators


def _labels(n):
    return [f"p{i}" for i in range(n)]


def _q(rng, lo, hi, den):
    return Fraction(rng.randint(lo * den, hi * den), den)


def _floyd(table):
    n = len(table)
    t = [row[:] for row in table]
    for k in range(n):
        tk = t[k]
        for i in range(n):
            tik = t[i][k]
            if tik.is_infinite:
                continue
            ti = t[i]
            for j in range(n):
                if not tk[j].is_infinite:
                    c = tik + tk[j]
                    if c < ti[j]:
                        ti[j] = c
    return t


def random_metric_space(rng: random.Random, n: int, name="X") -> FiniteSemimetricSpace:
    """A metric: either points of the line with coordinates in Q(sqrt 2), or a shortest-path closure."""
    if rng.random() < 0.3:
        coords = set()
        while len(coords) < n:
            coords.add(ExactScalar(_q(rng, -4, 4, 2), rng.choice([0, 0, 1, -1, Fraction(1, 2)])))
        coords = sorted(coords)
        return FiniteSemimetricSpace(_labels(n), [[abs(a - b) for b in coords] for a in coords], name)
    den = rng.choice([1, 2, 3])
    table = [[ZERO] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        table[i][j] = table[j][i] = as_scalar(Fraction(rng.randint(1, 6 * den), den))
    return FiniteSemimetricSpace(_labels(n), _floyd(table), name)


def random_semimetric_space(rng: random.Random, n: int, name="X") -> FiniteSemimetricSpace:
    """Symmetric positive table with no triangle inequality imposed."""
    den = rng.choice([1, 2])
    table = [[ZERO] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        table[i][j] = table[j][i] = as_scalar(Fraction(rng.randint(1, 8 * den), den))
    return FiniteSemimetricSpace(_labels(n), table, name)


def _random_quasi(rng, n, p_inf=0.1, top=3):
    """Nonnegative, zero diagonal, closed under the triangle inequality (entries may be +inf)."""
    t = [[ZERO if i == j else (INF if rng.random() < p_inf else as_scalar(rng.randint(0, top))) for j in range(n)]
         for i in range(n)]
    return _floyd(t)


def random_ot_bifunction(rng: random.Random, space: FiniteSemimetricSpace) -> var.ExtendedBiFunction:
    """A valid Oettli-Thera table for the space.

    Metric spaces get K = 1 and Phi(x,y) = psi(y) - psi(x) + q(x,y) with q a
    triangle-closed nonnegative table, which has nontrivial balls.  Other
    spaces get K >= K* and a nonnegative Phi (every admissible Phi is
    nonnegative once K > 1).
    """
    n = len(space)
    kstar = min_b_constant(space)
    if kstar == 1:
        dmax = max(space.realized_distances(), default=ONE)
        scale = rng.choice([1, 2, 3])
        psi = [dmax * _q(rng, 0, 3 * scale, 2) / scale for _ in range(n)]
        q = _random_quasi(rng, n, p_inf=rng.choice([0, 0.1, 0.3]), top=rng.choice([0, 1, 3]))
        table = [[ZERO if i == j else q[i][j] + (psi[j] - psi[i]) for j in range(n)] for i in range(n)]
        return var.ExtendedBiFunction(table, ONE, "Phi")
    K = kstar + rng.choice([0, 0, Fraction(1, 2), 1])
    q = _random_quasi(rng, n, p_inf=0.1)
    return var.ExtendedBiFunction(q, K, "Phi")


def random_space_for_ot(rng, n):
    return random_metric_space(rng, n) if rng.random() < 0.8 else random_semimetric_space(rng, n)


def random_nonidentity_map(rng, n) -> SelfMap:
    while True:
        table = tuple(rng.randrange(n) for _ in range(n))
        if any(table[i] != i for i in range(n)):
            return SelfMap(table)


# ---------------------------------------------------------------------------
# instances and suites


@dataclass(frozen=True)
class Instance:
    space: FiniteSemimetricSpace
    parts: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.space)


@dataclass(frozen=True)
class Outcome:
    ok: bool
    tag: str = ""
    detail: str = ""


@dataclass(frozen=True)
class SizeBounds:
    min_points: int = 1
    max_points: int = 8


@dataclass(frozen=True)
class Suite:
    id: str
    summary: str
    generate: Callable
    check: Callable
    exhaustive: Optional[Callable] = None
    mutant_of: Optional[str] = None
    confirm: Optional[Callable] = None  # genuine recomputation on a mutant counterexample


def _restrict_part(value, keep, index):
    """Restrict one instance component to the kept points; None marks an invalid restriction."""
    if isinstance(value, var.ExtendedBiFunction):
        return var.ExtendedBiFunction(tuple(tuple(value.table[i][j] for j in keep) for i in keep), value.K, value.name)
    if isinstance(value, var.ScalarFunction):
        return var.ScalarFunction(tuple(value.values[i] for i in keep), value.name)
    if isinstance(value, SelfMap):
        if any(value(i) not in index for i in keep):
            return None
        return SelfMap(tuple(index[value(i)] for i in keep), value.name)
    if isinstance(value, EventuallyPeriodicSequence):
        if not value.points() <= set(index):
            return None
        return EventuallyPeriodicSequence(tuple(index[i] for i in value.prefix), tuple(index[i] for i in value.cycle), value.name)
    if isinstance(value, FiniteTopology):
        return FiniteTopology(len(keep), frozenset(frozenset(index[i] for i in U if i in index) for U in value.open_sets), value.name)
    if isinstance(value, tuple) and value and value[0] == "point":
        return ("point", index[value[1]]) if value[1] in index else None
    if isinstance(value, frozenset):
        kept = frozenset(index[i] for i in value if i in index)
        return kept if kept else None
    return value


def restrict(inst: Instance, keep) -> Optional[Instance]:
    keep = sorted(keep)
    if not keep:
        return None
    index = {g: i for i, g in enumerate(keep)}
    parts = {}
    for k, v in inst.parts.items():
        r = _restrict_part(v, keep, index)
        if r is None:
            return None
        parts[k] = r
    return Instance(inst.space.subspace(keep), parts)


def _pt(inst, key):
    return inst.parts[key][1]


def _run_check(suite: Suite, inst: Instance) -> Optional[Outcome]:
    """Outcome, or None when the instance does not meet the suite's preconditions."""
    try:
        return suite.check(inst)
    except (PreconditionError, DomainError):
        return None
    except BallspaceError:
        return None


# -- variational suites -------------------------------------------------------


def _gen_ot(rng, b: SizeBounds):
    n = rng.randint(b.min_points, b.max_points)
    space = random_space_for_ot(rng, n)
    return Instance(space, {"phi": random_ot_bifunction(rng, space), "x0": ("point", rng.randrange(n))})


def _check_nesting(inst, ball_fn=None, subset_check=None):
    space, phi = inst.space, inst.parts["phi"]
    if ball_fn is None:
        rep = var.verify_lemma1(space, phi, subset_check=subset_check)
        if not rep.passed:
            return Outcome(False, rep.violation[0], f"{rep.violation}")
        sc = var.is_strongly_contractive(var.ot_ball_system(space, phi))
        if not sc.strongly_contractive:
            return Outcome(False, "strong-contractivity", f"{sc.witness}")
        return Outcome(True)
    var._require_ot(space, phi)
    balls = [ball_fn(space, phi, x) for x in range(len(space))]
    sc = var.is_strongly_contractive(balls)
    if not sc.strongly_contractive:
        return Outcome(False, f"condition-{sc.witness[0]}", f"{sc.witness}")
    return Outcome(True)


def _gen_ck(rng, b):
    n = rng.randint(b.min_points, b.max_points)
    space = random_metric_space(rng, n) if rng.random() < 0.7 else random_semimetric_space(rng, n)
    phi = var.ScalarFunction([_q(rng, 0, 6, rng.choice([1, 2, 4])) for _ in range(n)])
    K = rng.choice([ONE, ONE, as_scalar(Fraction(3, 2)), as_scalar(2), ExactScalar(0, 1)])
    return Instance(space, {"fn": phi, "K": K})


def _check_ck(inst):
    conv_ = var.ot_from_ck(inst.space, inst.parts["fn"], inst.parts["K"])
    if not conv_.balls_equal:
        return Outcome(False, "ball-mismatch", f"x = {conv_.mismatch}")
    if inst.parts["K"] == 1 and not conv_.conditions_hold:
        return Outcome(False, "ot-conditions", f"{conv_.ot_violation}")
    return Outcome(True)


def _descent_outcome(space, phi, x0, res):
    balls = var.ot_ball_system(space, phi)
    a = res.point
    if balls[a] != {a}:
        return Outcome(False, "not-singleton", f"B_{a} = {sorted(balls[a])}")
    if a not in balls[x0]:
        return Outcome(False, "outside-start", f"a = {a} not in B_{x0}")
    if res.moves > len(space) - 1:
        return Outcome(False, "too-many-moves", f"{res.moves} moves")
    return Outcome(True)


def _check_descent(inst, descend=None):
    space, phi, x0 = inst.space, inst.parts["phi"], _pt(inst, "x0")
    var._require_ot(space, phi)
    res = (descend or var.singleton_ball_descent)(space, phi, x0)
    return _descent_outcome(space, phi, x0, res)


def _argmin_map(space, phi, x0):
    balls = var.ot_ball_system(space, phi)
    row = phi.table[x0]
    return SelfMap(tuple(min(balls[x], key=lambda y: (row[y], y)) for x in range(len(space))))


def _check_caristi(inst):
    space, phi, x0 = inst.space, inst.parts["phi"], _pt(inst, "x0")
    f = _argmin_map(space, phi, x0)
    res = var.caristi_fixed_point(space, phi, f, x0)
    if not res.hypothesis_holds:
        return Outcome(False, "hypothesis", f"fails at {res.witness}")
    if f(res.point) != res.point:
        return Outcome(False, "not-fixed", f"f({res.point}) = {f(res.point)}")
    # set-valued form with F(x) = {f(x)} plus a random-free extra point: the whole ball
    F = var.ot_ball_system(space, phi)
    res2 = var.caristi_fixed_point(space, phi, F, x0)
    if not res2.hypothesis_holds or res2.point not in F[res2.point]:
        return Outcome(False, "set-valued", f"{res2}")
    return Outcome(True)


def _check_terminal(inst):
    rep = var.terminal_point_check(inst.space, inst.parts["phi"], _pt(inst, "x0"))
    return Outcome(rep.verified, "" if rep.verified else "terminal", f"a = {rep.point}")


def _gen_ekeland(rng, b):
    inst = _gen_ot(rng, b)
    phi, x0 = inst.parts["phi"], _pt(inst, "x0")
    gamma = as_scalar(Fraction(rng.randint(1, 8), rng.choice([1, 2, 4])))
    eps = -smin(ZERO, phi.row_inf(x0)) + rng.choice([0, 0, Fraction(1, 2)])
    parts = dict(inst.parts, gamma=gamma, eps=eps, delta=eps / gamma)
    return Instance(inst.space, parts)


def _check_ekeland(inst):
    p = inst.parts
    rep = var.ekeland_point(inst.space, p["phi"], p["gamma"], _pt(inst, "x0"), p["eps"], p["delta"])
    if rep.verified:
        return Outcome(True)
    bad = [k for k in ("within_delta", "strict_minimum", "terminal_inequality", "start_inequality") if not getattr(rep, k)]
    return Outcome(False, bad[0], f"a = {rep.point}")


def _gen_petal(rng, b, metric=False):
    n = rng.randint(max(2, b.min_points), max(2, b.max_points))
    space = random_metric_space(rng, n) if metric or rng.random() < 0.5 else random_semimetric_space(rng, n)
    bpt = rng.randrange(n)
    rest = [i for i in range(n) if i != bpt]
    M = frozenset(rng.sample(rest, rng.randint(1, len(rest))))
    x0 = rng.choice(sorted(M))
    gamma = as_scalar(Fraction(rng.randint(1, 12), rng.choice([1, 2, 4])))
    K = ONE if metric else min_b_constant(space) + rng.choice([0, Fraction(1, 2), 2])
    return Instance(space, {"M": M, "x0": ("point", x0), "b": ("point", bpt), "gamma": gamma, "K": K})


def _check_petal_identity(inst, petal_fn=None):
    p = inst.parts
    M = sorted(p["M"])
    b, gamma, K = _pt(inst, "b"), p["gamma"], p["K"]
    if b in p["M"]:
        return None
    if petal_fn is None:
        rep = var.petal_theorem_check(inst.space, M, _pt(inst, "x0"), b, gamma, K)
        return Outcome(rep.identity_holds, "" if rep.identity_holds else "identity", f"mismatch at {rep.identity_mismatch}")
    sub = inst.space.subspace(M)
    phi = var.ScalarFunction([inst.space.dist[m][b] / (K * gamma) for m in M])
    for i, m in enumerate(M):
        ck = frozenset(M[j] for j in var.ck_ball(sub, phi, K, i).members)
        if petal_fn(inst.space, gamma, m, b, M).members != ck:
            return Outcome(False, "identity", f"mismatch at {m}")
    return Outcome(True)


def _check_petal_conclusion(inst):
    p = inst.parts
    rep = var.petal_theorem_check(inst.space, sorted(p["M"]), _pt(inst, "x0"), _pt(inst, "b"), p["gamma"], p["K"])
    if not rep.conclusion_holds:
        return Outcome(False, "conclusion", f"a = {rep.point} in_start={rep.in_start_petal} isolated={rep.isolated}")
    return Outcome(True)


def _check_nest_potential(inst):
    space, phi, x0 = inst.space, inst.parts["phi"], _pt(inst, "x0")
    trace = var.singleton_ball_descent(space, phi, x0).trace
    rep = var.lemma2_checks(space, phi, x0, trace)
    return Outcome(rep.passed, "" if rep.passed else rep.violation[0], f"{rep.violation}")


def _check_boundary(inst):
    space, phi, x0 = inst.space, inst.parts["phi"], _pt(inst, "x0")
    n = len(space)
    A = frozenset(i for i in range(n) if (i * 7 + x0) % 3 == 0) or frozenset([x0])
    rep = var.ot_boundary_checks(space, phi, x0, A)
    if rep.zero_inf_hypothesis and not rep.zero_inf_verified:
        return Outcome(False, "zero-infimum", f"a = {rep.zero_inf_point}")
    if rep.set_hypothesis and not rep.set_verified:
        return Outcome(False, "meets-set", f"a = {rep.set_point}")
    return Outcome(True)


# -- ball-space suites --------------------------------------------------------


def _gen_count(rng, b):
    for _ in range(200):
        n = rng.randint(max(2, b.min_points), b.max_points)
        space = random_metric_space(rng, n) if rng.random() < 0.5 else random_semimetric_space(rng, n)
        f = random_nonidentity_map(rng, n)
        real = space.realized_distances()
        S = frozenset(rng.sample(real, rng.randint(1, min(3, len(real)))))
        if rng.random() < 0.3:
            S = S | {real[0] / 2}
        inst = Instance(space, {"map": f, "S": ("radii", tuple(sorted(S)))})
        if check_count_condition(space, f, S).holds:
            return inst
    raise PreconditionError("no instance satisfying the count condition in 200 draws")


def _check_count(inst):
    f = inst.parts["map"]
    if f.is_identity():
        return None
    rep = check_count_condition(inst.space, f, inst.parts["S"][1])
    if not rep.holds:
        return None
    return Outcome(bool(rep.meta_agrees), "" if rep.meta_agrees else "strict-hypothesis-held")


# -- convergence suites -------------------------------------------------------


def _top_space(n):
    return discrete_space([f"p{i}" for i in range(n)])


def _gen_top(rng, b):
    n = rng.randint(max(1, b.min_points), min(4, b.max_points))
    tops = _t0_cache(n)
    top = rng.choice(tops)
    seq = EventuallyPeriodicSequence(tuple(rng.randrange(n) for _ in range(rng.randint(0, 2))),
                                     tuple(rng.randrange(n) for _ in range(rng.randint(1, 3))))
    return Instance(_top_space(n), {"top": top, "seq": seq})


_T0 = {}


def _t0_cache(n):
    if n not in _T0:
        _T0[n] = conv.enumerate_t0_topologies(n)
    return _T0[n]


_CLOSED = {}


def _closed_family(top):
    fam = _CLOSED.get(top)
    if fam is None:
        if len(_CLOSED) > 4096:
            _CLOSED.clear()
        fam = _CLOSED[top] = conv.closed_set_family(top)
    return fam


def _check_top(inst, mutant_prefix=False):
    top, seq = inst.parts["top"], inst.parts["seq"]
    if not top.is_t0:
        return None
    t = conv.topological_limit(seq, top)
    b = conv.b_limit(seq, _closed_family(top), mutant_prefix=mutant_prefix).point
    if t != b:
        return Outcome(False, "disagree", f"topological {t} vs ball {b}")
    return Outcome(True)


def _exhaustive_top(b: SizeBounds):
    for n in range(max(1, b.min_points), min(4, b.max_points) + 1):
        space = _top_space(n)
        for top in _t0_cache(n):
            for seq in conv.enumerate_sequences(n, 2, 3):
                yield Instance(space, {"top": top, "seq": seq})


def _families_on(n):
    """All covering, point-separating families of nonempty subsets of an n-point set."""
    subsets = [frozenset(s) for r in range(1, n + 1) for s in combinations(range(n), r)]
    full = frozenset(range(n))
    for mask in range(1, 1 << len(subsets)):
        fam = [subsets[i] for i in range(len(subsets)) if mask >> i & 1]
        if frozenset().union(*fam) != full:
            continue
        if all(any(x in s and y not in s for s in fam) and any(y in s and x not in s for s in fam)
               for x, y in combinations(range(n), 2)):
            yield fam


def _exhaustive_laws(b: SizeBounds):
    from .balls import BallFamily

    for n in range(max(1, b.min_points), min(3, b.max_points) + 1):
        space = _top_space(n)
        for fam in _families_on(n):
            yield Instance(space, {"family": BallFamily.from_sets(space, fam)})


def _check_laws(inst):
    rep = conv.limit_operator_laws(inst.parts["family"], max_prefix=1, max_cycle=3)
    if rep.passed:
        return Outcome(True)
    law = rep.witnesses[0][0]
    return Outcome(False, law, f"{rep.witnesses[0]}")


def _gen_laws(rng, b):
    from .balls import BallFamily

    n = rng.randint(max(1, b.min_points), min(3, b.max_points))
    space = _top_space(n)
    fams = list(_families_on(n))
    return Instance(space, {"family": BallFamily.from_sets(space, rng.choice(fams))})


def _weak_orders(m):
    """Every assignment of levels 1..k to m items using each level (ordered set partitions)."""
    for k in range(1, m + 1):
        for levels in product(range(1, k + 1), repeat=m):
            if len(set(levels)) == k:
                yield levels


def _order_spaces(n):
    """One space per weak order of the pair distances; distances are the level numbers."""
    if n == 1:
        yield FiniteSemimetricSpace(["p0"], [[0]])
        return
    pairs = list(combinations(range(n), 2))
    for levels in _weak_orders(len(pairs)):
        table = [[0] * n for _ in range(n)]
        for (i, j), v in zip(pairs, levels):
            table[i][j] = table[j][i] = v
        yield FiniteSemimetricSpace(_labels(n), table)


def _cycle_set_sequences(n):
    """One sequence per nonempty cycle set; both limits depend on nothing else."""
    for r in range(1, n + 1):
        for s in combinations(range(n), r):
            yield EventuallyPeriodicSequence((), s)


def _exhaustive_filled(b: SizeBounds):
    for n in range(max(1, b.min_points), min(4, b.max_points) + 1):
        for space in _order_spaces(n):
            real = space.realized_distances() or [ONE]
            for r in range(1, len(real) + 1):
                for S in combinations(real, r):
                    if S[0] != real[0]:
                        continue
                    for seq in _cycle_set_sequences(n):
                        yield Instance(space, {"S": ("radii", S), "seq": seq})


def _gen_filled(rng, b):
    n = rng.randint(max(1, b.min_points), b.max_points)
    space = random_semimetric_space(rng, n) if rng.random() < 0.5 else random_metric_space(rng, n)
    real = space.realized_distances() or [ONE]
    extra = rng.sample(real, rng.randint(0, len(real)))
    S = tuple(sorted({real[0], *extra}))
    seq = EventuallyPeriodicSequence(tuple(rng.randrange(n) for _ in range(rng.randint(0, 2))),
                                     tuple(rng.randrange(n) for _ in range(rng.randint(1, 3))))
    return Instance(space, {"S": ("radii", S), "seq": seq})


_FILLED = [None, None]


def _check_filled(inst):
    key = (id(inst.space), inst.space, inst.parts["S"][1])
    if _FILLED[0] != key:
        _FILLED[:] = [key, build_ball_family(inst.space, inst.parts["S"][1], filled=True)]
    rep = conv.filled_family_equivalence_check(inst.space, inst.parts["S"][1], inst.parts["seq"], family=_FILLED[1])
    if rep.holds:
        return Outcome(True)
    return Outcome(False, "forward" if not rep.forward else "backward", f"semimetric {rep.semimetric} filled {rep.filled}")


def _gen_subseq(rng, b):
    n = rng.randint(max(1, b.min_points), min(6, b.max_points))
    space = random_semimetric_space(rng, n)
    seq = EventuallyPeriodicSequence(tuple(rng.randrange(n) for _ in range(rng.randint(0, 2))),
                                     tuple(rng.randrange(n) for _ in range(rng.randint(1, 3))))
    return Instance(space, {"seq": seq})


def _check_subseq(inst):
    rep = conv.bconv_implies_subseq_limit_check(inst.space, inst.parts["seq"])
    return Outcome(rep.consistent, "" if rep.consistent else "subsequence", f"b-limit {rep.b_limit}")


# -- mutants -------------------------------------------------------------------


def _mutant_strict_ball(space, phi, x):
    row, prow = space.dist[x], phi.table[x]
    return frozenset(y for y in range(len(space)) if not prow[y].is_infinite and row[y] + prow[y] < 0)


def _mutant_early_stop(space, phi, x0):
    """Moves once to the lowest-index other point of the ball and stops."""
    balls = var.ot_ball_system(space, phi)
    rest = sorted(balls[x0] - {x0})
    trace = (x0,) if not rest else (x0, rest[0])
    return var.DescentResult(trace[-1], trace, x0)


def _mutant_petal(space, gamma, a, b, M):
    d = space.dist
    return var.Petal(gamma, a, b, frozenset(y for y in M if d[y][a] + gamma * d[y][b] <= d[a][b]))


def _confirm_mutant_ball(inst):
    # the genuine balls pass where the strict-inequality balls fail
    return _check_nesting(inst).ok and not _check_nesting(inst, _mutant_strict_ball).ok


def _confirm_early_stop(inst):
    space, phi, x0 = inst.space, inst.parts["phi"], _pt(inst, "x0")
    bad = _mutant_early_stop(space, phi, x0).point
    return _check_descent(inst).ok and var.ot_ball(space, phi, bad).members != {bad}


def _confirm_prefix(inst):
    top, seq = inst.parts["top"], inst.parts["seq"]
    return _check_top(inst).ok and conv.topological_limit(seq, top) != conv.b_limit(
        seq, conv.closed_set_family(top), mutant_prefix=True).point


def _confirm_petal(inst):
    p = inst.parts
    M = sorted(p["M"])
    b = _pt(inst, "b")
    real = {m: var.petal(inst.space, p["gamma"], m, b, M).members for m in M}
    fake = {m: _mutant_petal(inst.space, p["gamma"], m, b, M).members for m in M}
    return _check_petal_identity(inst).ok and real != fake


SUITES = {}


def _register(suite: Suite):
    SUITES[suite.id] = suite


_register(Suite("ot-ball-nesting", "centre membership, nesting, strict shrinkage and strong contractivity of Oettli-Thera balls",
                _gen_ot, _check_nesting))
_register(Suite("ck-conversion", "Caristi-Kirk balls equal the balls of K(phi(y) - phi(x))", _gen_ck, _check_ck))
_register(Suite("singleton-descent", "descent ends on a singleton ball inside the starting ball", _gen_ot, _check_descent))
_register(Suite("caristi-fixed-point", "argmin maps satisfy the Caristi inequality and the engine finds their fixed point",
                _gen_ot, _check_caristi))
_register(Suite("terminal-point", "descent endpoint satisfies d(a,x) > -Phi(a,x) off a", _gen_ot, _check_terminal))
_register(Suite("ekeland-point", "scaled descent gives a strict minimiser within delta", _gen_ekeland, _check_ekeland))
_register(Suite("petal-identity", "petals through b restricted to M equal Caristi balls of d(., b)/(K gamma)",
                _gen_petal, _check_petal_identity))
_register(Suite("petal-conclusion-metric", "on metric spaces the descent lands in the start petal on an isolated point",
                lambda rng, b: _gen_petal(rng, b, metric=True), _check_petal_conclusion))
_register(Suite("nest-potential", "distance bound and membership equivalences along descent trajectories",
                _gen_ot, _check_nest_potential))
_register(Suite("ot-boundary", "zero-infimum point and set-meeting consequences of descent", _gen_ot, _check_boundary))
_register(Suite("count-condition", "the iterate-avoidance condition forces the strict contracting-ball hypothesis to fail",
                _gen_count, _check_count))
_register(Suite("topology-equivalence", "unique topological limit equals b-limit over all closed sets (T0, <= 4 points)",
                _gen_top, _check_top, _exhaustive_top))
_register(Suite("limit-laws", "constants converge, subsequences keep the limit, non-limits are witnessed (<= 3 points)",
                _gen_laws, _check_laws, _exhaustive_laws))
_register(Suite("filled-equivalence", "distance limit equals b-limit in the filled family (<= 4 points, all weak orders)",
                _gen_filled, _check_filled, _exhaustive_filled))
_register(Suite("closed-ball-subsequence", "b-limit over all closed balls forces the cycle to be the limit point",
                _gen_subseq, _check_subseq))

_register(Suite("mutant-strict-ball", "Oettli-Thera balls computed with < instead of <=", _gen_ot,
                lambda inst: _check_nesting(inst, _mutant_strict_ball), mutant_of="ot-ball-nesting",
                confirm=_confirm_mutant_ball))
_register(Suite("mutant-early-stop", "descent that stops after one move", _gen_ot,
                lambda inst: _check_descent(inst, _mutant_early_stop), mutant_of="singleton-descent",
                confirm=_confirm_early_stop))
_register(Suite("mutant-prefix-recurs", "b-limit that treats prefix points as recurring", _gen_top,
                lambda inst: _check_top(inst, mutant_prefix=True), mutant_of="topology-equivalence",
                confirm=_confirm_prefix))
_register(Suite("mutant-petal-swap", "petal with gamma on the wrong distance", _gen_petal,
                lambda inst: _check_petal_identity(inst, _mutant_petal), mutant_of="petal-identity",
                confirm=_confirm_petal))


def mutant_suites():
    return [s for s in SUITES.values() if s.mutant_of]


# ---------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class SearchSpec:
    lemma_id: str
    trials: int = 1000
    seed: int = DEFAULT_SEED
    min_points: int = 1
    max_points: int = 8
    exhaustive: bool = False

    @property
    def bounds(self):
        return SizeBounds(self.min_points, self.max_points)


@dataclass(frozen=True)
class Verdict:
    suite: str
    seed: int
    trials: int
    checked: int
    skipped: int
    counterexample: Optional[Instance] = None
    original: Optional[Instance] = None
    trial: Optional[int] = None
    outcome: Optional[Outcome] = None
    confirmed: Optional[bool] = None

    @property
    def found(self) -> bool:
        return self.counterexample is not None


def _simplify_candidates(inst: Instance):
    """Instances with one value replaced by something simpler."""
    for key, v in inst.parts.items():
        if isinstance(v, var.ExtendedBiFunction):
            n = len(v)
            for i, j in product(range(n), repeat=2):
                cur = v.table[i][j]
                if i == j or cur == 0:
                    continue
                for new in (ZERO, as_scalar(int(float(cur))) if not cur.is_infinite else ONE):
                    if new == cur:
                        continue
                    rows = [list(r) for r in v.table]
                    rows[i][j] = new
                    yield replace(inst, parts=dict(inst.parts, **{key: var.ExtendedBiFunction(rows, v.K, v.name)}))
        elif isinstance(v, var.ScalarFunction):
            for i, cur in enumerate(v.values):
                if cur != 0:
                    vals = list(v.values)
                    vals[i] = ZERO
                    yield replace(inst, parts=dict(inst.parts, **{key: var.ScalarFunction(vals, v.name)}))
        elif isinstance(v, ExactScalar) and v != 1 and not v.is_infinite and v > 1:
            yield replace(inst, parts=dict(inst.parts, **{key: ONE}))


def shrink(suite: Suite, inst: Instance, tag: str, budget: int = 2000) -> Instance:
    """Greedy point deletion, then value simplification, keeping the failure tag."""

    def still_fails(cand):
        out = _run_check(suite, cand)
        return out is not None and not out.ok and out.tag == tag

    steps = 0
    improved = True
    while improved and steps < budget:
        improved = False
        for p in reversed(range(inst.size)):
            cand = restrict(inst, [i for i in range(inst.size) if i != p])
            steps += 1
            if cand is not None and still_fails(cand):
                inst, improved = cand, True
                break
        if improved:
            continue
        for cand in _simplify_candidates(inst):
            steps += 1
            if steps >= budget:
                break
            if still_fails(cand):
                inst, improved = cand, True
                break
    return inst


def _instances(suite: Suite, spec: SearchSpec) -> Iterator:
    if spec.exhaustive:
        if suite.exhaustive is None:
            raise DomainError(f"suite {suite.id} has no exhaustive mode")
        for t, inst in enumerate(suite.exhaustive(spec.bounds)):
            yield t, inst
        return
    for t in range(spec.trials):
        try:
            yield t, suite.generate(trial_rng(spec.seed, t), spec.bounds)
        except PreconditionError:
            yield t, None


def counterexample_search(spec: SearchSpec) -> Verdict:
    try:
        suite = SUITES[spec.lemma_id]
    except KeyError:
        raise DomainError(f"unknown suite {spec.lemma_id!r}; known: {', '.join(SUITES)}") from None
    checked = skipped = 0
    total = 0
    for t, inst in _instances(suite, spec):
        total += 1
        out = None if inst is None else _run_check(suite, inst)
        if out is None:
            skipped += 1
            continue
        checked += 1
        if not out.ok:
            small = shrink(suite, inst, out.tag)
            final = _run_check(suite, small)
            confirmed = suite.confirm(small) if suite.confirm else None
            return Verdict(suite.id, spec.seed, total, checked, skipped, small, inst, t, final, confirmed)
    return Verdict(suite.id, spec.seed, total, checked, skipped)


def run_exhaustive(suite_id: str, max_points: int) -> Verdict:
    return counterexample_search(SearchSpec(suite_id, seed=0, max_points=max_points, exhaustive=True))


def serialize_instance(inst: Instance) -> str:
    """Every component in its file format, scalars and points as key lines."""
    space = inst.space
    out = [serialize(space)]
    for key in sorted(inst.parts):
        v = inst.parts[key]
        if isinstance(v, (var.ExtendedBiFunction, var.ScalarFunction, SelfMap, EventuallyPeriodicSequence, FiniteTopology)):
            v = replace(v, name=key) if hasattr(v, "name") else v
            out.append(serialize(v, space=space))
        elif key == "family":
            out.append(serialize(replace(v, name=key)))
        elif isinstance(v, tuple) and v and v[0] == "point":
            out.append(f"# {key} = {space.points[v[1]]}\n")
        elif isinstance(v, tuple) and v and v[0] == "radii":
            out.append(f"# {key} = {' '.join(str(r) for r in v[1])}\n")
        elif isinstance(v, frozenset):
            out.append(f"# {key} = {' '.join(space.labels(v))}\n")
        else:
            out.append(f"# {key} = {v}\n")
    return "".join(out)
