"""Command line entry point: ``ballspace <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import balls as bl
from . import convergence as conv
from . import fixtures as fx
from . import search
from . import variational as var
from .errors import BallspaceError, DomainError, MalformedInputError
from .io import attach_oracles, parse, parse_raw_space, serialize
from .report import Report, emit_report, error_report
from .scalar import format_scalar, parse_scalar
from .spaces import TriangleLaw, check_g_condition, min_b_constant, verify_semimetric

__all__ = ["build_parser", "main"]


def _scalar(text):
    try:
        return parse_scalar(text)
    except BallspaceError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _labels(space, members):
    return "{" + ",".join(space.labels(members)) + "}"


def _space(args):
    if not args.space:
        raise DomainError("--space is required")
    return parse(args.space, "space")


def _point(space, label, default=0):
    return default if label is None else space.index(label)


def _family(args, space):
    if args.family:
        return parse(args.family, "family", space=space)
    if getattr(args, "radii", None):
        return bl.build_ball_family(space, args.radii, filled=getattr(args, "filled", False))
    raise DomainError("give --family or --radii")


# -- subcommands --------------------------------------------------------------


def cmd_check(args) -> Report:
    raw = parse_raw_space(Path(args.space).read_text(encoding="utf-8"), path=args.space)
    rep = Report(f"check {raw.name}")
    sr = verify_semimetric(raw.table)
    rep.fact("points", len(raw.points))
    for cond, what in (("S1", "zero-self-distance-and-positivity"), ("S2", "symmetry")):
        bad = [v for v in sr.violations if v.condition == cond]
        wit = "" if not bad else f"({','.join(raw.points[i] for i in bad[0].indices)}): {bad[0].detail}"
        rep.claim(f"{cond}-{what}", "", not bad, wit)
    if sr.valid and args.law:
        space = parse(args.space, "space")
        law = {"b_metric": lambda: TriangleLaw.b_metric(args.K),
               "max_law": TriangleLaw.max_law,
               "power_mean": lambda: TriangleLaw.power_mean(args.p, args.K)}[args.law]()
        g = check_g_condition(space, law)
        wit = "" if g.holds else f"({','.join(space.points[i] for i in g.witness)}) {g.detail}"
        rep.claim(f"triangle-law {law}", "", g.holds, wit)
    return rep


def cmd_kstar(args) -> Report:
    space = _space(args)
    return Report(f"kstar {space.name}").fact("K*", format_scalar(min_b_constant(space)))


def cmd_balls(args) -> Report:
    space = _space(args)
    if args.family:
        fam = parse(args.family, "family", space=space)
        rep = Report(f"balls {fam.name}")
        for k in range(len(fam)):
            rep.fact(f"ball.{k}", fam.describe(k))
        return rep
    if not args.radii:
        raise DomainError("give --family or --radii")
    rep = Report(f"balls {space.name} {args.mode}")
    for x in range(len(space)):
        for r in sorted(set(args.radii)):
            b = bl.ball(space, x, r, args.mode)
            rep.fact(f"ball.{space.points[x]}.{format_scalar(r)}", _labels(space, b.members))
    return rep


def cmd_nests(args) -> Report:
    space = _space(args)
    fam = _family(args, space)
    rep = Report(f"nests {fam.name}")
    rep.fact("maximal_nests", bl.count_maximal_nests(fam))
    ok = True
    for k, chain in enumerate(bl.enumerate_maximal_nests(fam, limit=args.limit)):
        ok = ok and bl.is_nest(fam, chain).is_nest
        rep.fact(f"nest.{k}", " > ".join(fam.describe(i) for i in chain))
    rep.claim("chains-are-nests", "", ok)
    return rep


def cmd_spherical(args) -> Report:
    space = _space(args)
    fam = _family(args, space)
    sr = bl.is_spherically_complete(fam)
    wit = sr.note
    if not sr.complete:
        bad = [n for n, inter in sr.nest_intersections if not inter]
        wit = wit or (f"nest {bad[0]} has empty intersection" if bad else "")
    return Report(f"spherical {fam.name}").claim("spherically-complete", "", sr.complete, wit)


def cmd_fixedpoint(args) -> Report:
    space = _space(args)
    if not args.map:
        raise DomainError("--map is required")
    f = parse(args.map, "map", space=space)
    if args.engine == "ps":
        fam = _family(args, space)
        res = bl.theorem_ps_engine(fam, f, args.variant, args.mode)
        rep = Report(f"fixedpoint ps variant={args.variant} mode={args.mode}")
        rep.fact("hypothesis", "holds" if res.hypothesis_holds else "fails")
        if res.witness is not None:
            rep.fact("witness", f"f-closed set {_labels(space, res.witness)} has no qualifying ball")
        for T, x in res.fixed_points:
            rep.fact(f"fixed.{'.'.join(space.labels(T))}", space.points[x])
        held = (not res.hypothesis_holds) or all(f(x) == x for _, x in res.fixed_points)
        return rep.claim("hypothesis-implies-fixed-point", "", held)
    if not args.bifn:
        raise DomainError("--bifn is required for the caristi engine")
    phi = parse(args.bifn, "bifn", space=space)
    x0 = _point(space, args.x0)
    res = var.caristi_fixed_point(space, phi, f, x0)
    rep = Report("fixedpoint caristi")
    if not res.hypothesis_holds:
        x = res.witness
        return rep.claim("caristi-inequality", "", False,
                         f"d({space.points[x]}, f x) > -Phi({space.points[x]}, f x) with f x = {space.points[f(x)]}")
    rep.fact("fixed_point", space.points[res.point])
    rep.fact("trace", " -> ".join(space.points[i] for i in res.descent.trace))
    return rep.claim("caristi-inequality", "", True).claim("fixed", "", f(res.point) == res.point)


def cmd_ekeland(args) -> Report:
    space = _space(args)
    if not args.bifn:
        raise DomainError("--bifn is required")
    phi = parse(args.bifn, "bifn", space=space)
    x0 = _point(space, args.x0)
    res = var.ekeland_point(space, phi, args.gamma, x0, args.eps, args.delta)
    rep = Report(f"ekeland gamma={format_scalar(args.gamma)}")
    rep.fact("point", space.points[res.point])
    rep.fact("trace", " -> ".join(space.points[i] for i in res.descent.trace))
    for name in ("within_delta", "strict_minimum", "terminal_inequality", "start_inequality"):
        rep.claim(name.replace("_", "-"), "", getattr(res, name))
    return rep


def cmd_petal(args) -> Report:
    space = _space(args)
    a, b = space.index(args.a), space.index(args.b)
    M = sorted(space.index(t) for t in args.subset) if args.subset else None
    p = var.petal(space, args.gamma, a, b, M)
    rep = Report(f"petal gamma={format_scalar(args.gamma)} a={args.a} b={args.b}")
    rep.fact("members", _labels(space, p.members))
    if M is not None and a in M and b not in M:
        K = args.K if args.K is not None else min_b_constant(space)
        t = var.petal_theorem_check(space, M, a, b, args.gamma, K)
        rep.fact("K", format_scalar(K))
        mis = "" if t.identity_holds else f"at {space.points[t.identity_mismatch]}"
        rep.claim("petal-equals-caristi-ball", "", t.identity_holds, mis)
        if t.point is not None:
            rep.fact("descent_point", space.points[t.point])
        rep.fact("isolated_point_in_start_petal", "yes" if t.conclusion_holds else "no")
    return rep


def cmd_bconverge(args) -> Report:
    space = _space(args)
    fam = _family(args, space)
    if args.oracle:
        fam = attach_oracles(fam, parse(args.oracle, "fixture-oracle"))
    if args.seq:
        seq = parse(args.seq, "seq", space=space)
        name = seq.name
    elif args.seq_name:
        seq = name = args.seq_name
    else:
        raise DomainError("give --seq or --seq-name")
    lim = conv.b_limit(seq if not args.oracle or not args.seq_name else name, fam)
    rep = Report(f"bconverge {name} in {fam.name}")
    rep.fact("b_limit", "none" if lim.point is None else space.points[lim.point])
    if lim.reason:
        rep.fact("reason", lim.reason)
    rep.fact("intersection", _labels(space, lim.intersection))
    if not isinstance(seq, str):
        s = conv.semimetric_limit(seq, space)
        rep.fact("distance_limit", "none" if s is None else space.points[s])
    return rep


def cmd_toptest(args) -> Report:
    if not 0 <= args.max_points <= 5:
        raise DomainError("--max-points must be between 0 and 5")
    rep = Report(f"toptest max-points={args.max_points}")
    for n in range(args.max_points + 1):
        tops = conv.enumerate_t0_topologies(n)
        rep.fact(f"t0_topologies.{n}", len(tops))
        if n == 0:
            continue
        checked, bad = 0, None
        for top in tops:
            fam = conv.closed_set_family(top)
            for seq in conv.enumerate_sequences(n, args.max_prefix, args.max_cycle):
                checked += 1
                t = conv.topological_limit(seq, top)
                if t != conv.b_limit(seq, fam).point and bad is None:
                    bad = (top, seq, t)
        wit = f"sequences={checked}" if bad is None else f"{bad[1]} in {sorted(map(sorted, bad[0].open_sets))}"
        rep.claim(f"limits-agree.{n}-points", "", bad is None, wit)
    return rep


def cmd_doubling(args) -> Report:
    space = _space(args)
    radii = args.radii or conv.closed_ball_radii(space)
    res = conv.doubling_number(space, radii)
    rep = Report(f"doubling {space.name}")
    rep.fact("radii", " ".join(format_scalar(r) for r in sorted(set(radii))))
    rep.fact("N", res.N)
    return rep


def _fixture_params(items):
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"parameter {item!r} is not key=value")
        if key == "grid":
            out[key] = fx.saturn_grid_from_text(value.split(","))
        else:
            try:
                out[key] = int(value)
            except ValueError:
                raise DomainError(f"parameter {key} must be an integer") from None
    return out


def cmd_fixture(args) -> Report:
    if args.action == "list":
        rep = Report("fixtures")
        for name, builder in fx.CATALOG.items():
            rep.fact(name, (builder.__doc__ or "").strip().splitlines()[0] if builder.__doc__ else "")
        return rep
    if not args.name:
        raise DomainError("fixture run needs a fixture name")
    try:
        results = fx.run_fixture(args.name, **_fixture_params(args.param))
    except TypeError as exc:
        raise DomainError(f"bad fixture parameters: {exc}") from None
    rep = Report(f"fixture {args.name}")
    for r in results:
        rep.claim(r.id, r.citation, r.passed, r.witness)
    return rep


def cmd_hunt(args) -> Report:
    if args.list:
        rep = Report("suites")
        for s in search.SUITES.values():
            rep.fact(s.id, s.summary + (f" (mutant of {s.mutant_of})" if s.mutant_of else ""))
        return rep
    if not args.suite:
        raise DomainError("--suite is required")
    seed = args.seed if args.seed is not None else search.default_seed()
    spec = search.SearchSpec(args.suite, args.trials, seed, args.min_points, args.max_points, args.exhaustive)
    v = search.counterexample_search(spec)
    rep = Report(f"hunt {args.suite}")
    rep.fact("seed", seed)
    rep.fact("mode", "exhaustive" if args.exhaustive else "random")
    rep.fact("instances", v.trials)
    rep.fact("checked", v.checked)
    rep.fact("skipped", v.skipped)
    if not v.found:
        return rep.claim("no-counterexample", "", True)
    rep.fact("trial", v.trial)
    rep.fact("points_before_shrink", v.original.size)
    rep.fact("points_after_shrink", v.counterexample.size)
    if v.confirmed is not None:
        rep.fact("confirmed_by_genuine_checker", "yes" if v.confirmed else "no")
    wit = f"{v.outcome.tag}: {v.outcome.detail}\n{search.serialize_instance(v.counterexample)}"
    return rep.claim("no-counterexample", "", False, wit.rstrip("\n"))


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="ballspace", description="Finite ball spaces, fixed points and b-convergence.",
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=func)
        return sp

    sp = add("check", cmd_check, help="validate a space file")
    sp.add_argument("--space", required=True)
    sp.add_argument("--law", choices=("b_metric", "max_law", "power_mean"))
    sp.add_argument("--K", type=_scalar, default=1)
    sp.add_argument("--p", type=int, default=1)

    sp = add("kstar", cmd_kstar, help="smallest relaxed-triangle constant")
    sp.add_argument("--space", required=True)

    sp = add("balls", cmd_balls, help="list balls")
    sp.add_argument("--space", required=True)
    sp.add_argument("--family")
    sp.add_argument("--radii", nargs="+", type=_scalar)
    sp.add_argument("--mode", choices=("closed", "open", "open_complement"), default="closed")

    for name, func in (("nests", cmd_nests), ("spherical", cmd_spherical)):
        sp = add(name, func, help=f"{name} of a ball family")
        sp.add_argument("--space", required=True)
        sp.add_argument("--family")
        sp.add_argument("--radii", nargs="+", type=_scalar)
        sp.add_argument("--filled", action="store_true")
        if name == "nests":
            sp.add_argument("--limit", type=int, default=64)

    sp = add("fixedpoint", cmd_fixedpoint, help="fixed point engines")
    sp.add_argument("engine", choices=("ps", "caristi"))
    sp.add_argument("--space", required=True)
    sp.add_argument("--family")
    sp.add_argument("--radii", nargs="+", type=_scalar)
    sp.add_argument("--filled", action="store_true")
    sp.add_argument("--map")
    sp.add_argument("--bifn")
    sp.add_argument("--x0")
    sp.add_argument("--variant", choices=("i", "ii"), default="i")
    sp.add_argument("--mode", choices=("strict", "kuhlmann"), default="strict")

    sp = add("ekeland", cmd_ekeland, help="strict minimiser by scaled descent")
    sp.add_argument("--space", required=True)
    sp.add_argument("--bifn", required=True)
    sp.add_argument("--x0")
    sp.add_argument("--gamma", type=_scalar, required=True)
    sp.add_argument("--eps", type=_scalar, required=True)
    sp.add_argument("--delta", type=_scalar, required=True)

    sp = add("petal", cmd_petal, help="petal of a and b, optionally inside a subset")
    sp.add_argument("--space", required=True)
    sp.add_argument("--gamma", type=_scalar, required=True)
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--subset", nargs="+")
    sp.add_argument("--K", type=_scalar)

    sp = add("bconverge", cmd_bconverge, help="b-limit of a sequence")
    sp.add_argument("--space", required=True)
    sp.add_argument("--seq")
    sp.add_argument("--seq-name")
    sp.add_argument("--family")
    sp.add_argument("--radii", nargs="+", type=_scalar)
    sp.add_argument("--filled", action="store_true")
    sp.add_argument("--oracle")

    sp = add("toptest", cmd_toptest, help="exhaustive topological versus b-limit comparison")
    sp.add_argument("--max-points", type=int, default=4)
    sp.add_argument("--max-prefix", type=int, default=2)
    sp.add_argument("--max-cycle", type=int, default=3)

    sp = add("doubling", cmd_doubling, help="exact doubling number")
    sp.add_argument("--space", required=True)
    sp.add_argument("--radii", nargs="+", type=_scalar)

    sp = add("fixture", cmd_fixture, help="worked examples")
    sp.add_argument("action", choices=("list", "run"))
    sp.add_argument("name", nargs="?")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")

    sp = add("hunt", cmd_hunt, help="randomized or exhaustive counterexample search")
    sp.add_argument("--suite")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=lambda s: int(s, 0))
    sp.add_argument("--min-points", type=int, default=1)
    sp.add_argument("--max-points", type=int, default=8)
    sp.add_argument("--exhaustive", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = getattr(args, "format", "text")
    try:
        rep = args.func(args)
    except BallspaceError as exc:
        rep = error_report(args.command, exc)
    except OSError as exc:
        rep = error_report(args.command, MalformedInputError(f"{exc.filename}: {exc.strerror}"))
    sys.stdout.write(emit_report(rep, fmt))
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
