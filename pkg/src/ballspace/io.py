"""Line-based text formats for every input type.

``#`` starts a comment and tokens are whitespace separated.  The first
line names the kind; every kind except ``space`` and ``fixture-oracle`` is
declared ``over`` a space and needs that space to be loaded:

    space <name>                      points <label>...   dist <a> <b> <scalar>
    family <name> over <space>        radii <scalar>...   [filled]   (or ball <label>... lines)
    map <name> over <space>           send <x> <f(x)>
    fn <name> over <space>            val <x> <scalar>
    bifn <name> over <space> K <k>    val <x> <y> <scalar|inf>
    seq <name> over <space>           prefix <label>...   cycle <label>...
    topology <name> over <space>      open <label>...     (empty set and X implicit)
    oracle <seq> ball <index> inf_often <true|false>  # derivation note

Ball indices in oracle files are 0-based positions in the family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .balls import BallFamily, SelfMap, build_ball_family
from .convergence import EventuallyPeriodicSequence, FiniteTopology
from .errors import DomainError, InvariantError, MalformedInputError, ParseError
from .scalar import ZERO, format_scalar, parse_scalar
from .spaces import Ball, FiniteSemimetricSpace
from .variational import ExtendedBiFunction, ScalarFunction

__all__ = [
    "KINDS",
    "OracleTable",
    "RawSpace",
    "attach_oracles",
    "normalize",
    "parse",
    "parse_raw_space",
    "parse_text",
    "serialize",
]

KINDS = ("space", "family", "map", "fn", "bifn", "seq", "topology", "fixture-oracle")
_OVER_KINDS = ("family", "map", "fn", "bifn", "seq", "topology")


@dataclass(frozen=True)
class _Line:
    number: int
    tokens: tuple  # ((column, text), ...)
    comment: str = ""

    @property
    def directive(self):
        return self.tokens[0][1]

    def args(self):
        return [t for _, t in self.tokens[1:]]

    def col(self, k):
        if k < len(self.tokens):
            return self.tokens[k][0]
        last_col, last = self.tokens[-1]
        return last_col + len(last)


def _lex(text: str) -> list:
    out = []
    for n, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        toks = []
        col = 0
        while col < len(body):
            if body[col].isspace():
                col += 1
                continue
            end = col
            while end < len(body) and not body[end].isspace():
                end += 1
            toks.append((col + 1, body[col:end]))
            col = end
        if toks:
            out.append(_Line(n, tuple(toks), comment.strip()))
    return out


class _Reader:
    def __init__(self, text, kind, path=None):
        self.path = str(path) if path is not None else None
        self.kind = kind
        self.lines = _lex(text)
        if not self.lines:
            raise self.error("empty file", 1, 1)
        self.head = self.lines[0]
        self.body = self.lines[1:]

    def error(self, message, line=None, column=None):
        return ParseError(message, line, column, self.path)

    def header(self, space: Optional[FiniteSemimetricSpace], extra=()):
        """Check '<kind> <name> [over <space>] [extra...]' and return name plus extra values."""
        h = self.head
        if h.directive != self.kind:
            raise self.error(f"expected a '{self.kind}' header, found {h.directive!r}", h.number, 1)
        want = 2 + (2 if self.kind in _OVER_KINDS else 0) + 2 * len(extra)
        if len(h.tokens) != want:
            shape = f"{self.kind} <name>" + (" over <space>" if self.kind in _OVER_KINDS else "")
            shape += "".join(f" {k} <value>" for k in extra)
            raise self.error(f"header must read '{shape}'", h.number, h.col(min(len(h.tokens), want)))
        name = h.tokens[1][1]
        pos = 2
        if self.kind in _OVER_KINDS:
            if h.tokens[2][1] != "over":
                raise self.error("expected 'over <space>'", h.number, h.col(2))
            over = h.tokens[3][1]
            if space is None:
                raise DomainError(f"a {self.kind} file is read over a space; load space {over!r} first")
            if over != space.name:
                raise self.error(f"file is over space {over!r} but space {space.name!r} was given", h.number, h.col(3))
            pos = 4
        values = []
        for key in extra:
            if h.tokens[pos][1] != key:
                raise self.error(f"expected '{key}'", h.number, h.col(pos))
            values.append((h, pos + 1))
            pos += 2
        return name, values

    def scalar(self, line: _Line, k: int):
        if k >= len(line.tokens):
            raise self.error("missing value", line.number, line.col(k))
        return parse_scalar(line.tokens[k][1], line=line.number, column=line.tokens[k][0])

    def expect_args(self, line, count, what):
        if len(line.tokens) - 1 != count:
            raise self.error(f"'{line.directive}' takes {what}", line.number, line.col(min(len(line.tokens), count + 1)))

    def only(self, allowed):
        for line in self.body:
            if line.directive not in allowed:
                raise self.error(f"unknown directive {line.directive!r} in a {self.kind} file", line.number, 1)

    def single(self, directive) -> Optional[_Line]:
        found = [l for l in self.body if l.directive == directive]
        if len(found) > 1:
            raise self.error(f"duplicate '{directive}' line", found[1].number, 1)
        return found[0] if found else None

    def label(self, line, k, labels) -> int:
        lab = line.tokens[k][1]
        try:
            return labels.index(lab)
        except ValueError:
            raise self.error(f"unknown point {lab!r}", line.number, line.col(k)) from None

    def labels_from(self, line, start, labels) -> list:
        return [self.label(line, k, labels) for k in range(start, len(line.tokens))]

    def end(self):
        return (self.lines[-1].number, 1)


@dataclass(frozen=True)
class RawSpace:
    name: str
    points: tuple
    table: tuple


def _read_space(r: _Reader) -> RawSpace:
    h = r.head
    if h.directive != "space" or len(h.tokens) != 2:
        raise r.error("expected header 'space <name>'", h.number, 1)
    r.only({"points", "dist"})
    pline = r.single("points")
    if pline is None or len(pline.tokens) < 2:
        raise r.error("missing 'points' line", h.number, 1)
    labels = tuple(pline.args())
    for k, lab in enumerate(labels, start=1):
        if labels.index(lab) != k - 1:
            raise r.error(f"duplicate point label {lab!r}", pline.number, pline.col(k))
    n = len(labels)
    table = [[None] * n for _ in range(n)]
    for i in range(n):
        table[i][i] = ZERO
    for line in r.body:
        if line.directive != "dist":
            continue
        r.expect_args(line, 3, "two labels and a scalar")
        i, j = r.label(line, 1, labels), r.label(line, 2, labels)
        if i == j:
            raise r.error("diagonal distances are implicitly zero", line.number, line.col(2))
        if table[i][j] is not None:
            raise r.error(f"duplicate dist for pair ({labels[i]}, {labels[j]})", line.number, 1)
        table[i][j] = table[j][i] = r.scalar(line, 3)
    for i in range(n):
        for j in range(i + 1, n):
            if table[i][j] is None:
                raise r.error(f"missing dist for pair ({labels[i]}, {labels[j]})", *r.end())
    return RawSpace(h.tokens[1][1], labels, tuple(tuple(row) for row in table))


def parse_raw_space(text: str, path=None) -> RawSpace:
    """The space table as written, without checking the semimetric conditions."""
    return _read_space(_Reader(text, "space", path))


@dataclass(frozen=True)
class OracleTable:
    """Per sequence: ball index -> recurs flag, plus the derivation note of each line."""

    flags: dict
    notes: dict = field(default_factory=dict)


def _read_oracles(r: _Reader) -> OracleTable:
    flags, notes = {}, {}
    for line in r.lines:
        if line.directive != "oracle":
            raise r.error(f"fixture-oracle lines start with 'oracle', not {line.directive!r}", line.number, 1)
        if len(line.tokens) != 6 or line.tokens[2][1] != "ball" or line.tokens[4][1] != "inf_often":
            raise r.error("expected 'oracle <seq> ball <index> inf_often <true|false>'", line.number, 1)
        seq = line.tokens[1][1]
        idx_text = line.tokens[3][1]
        if not idx_text.isdigit():
            raise r.error(f"ball index must be a nonnegative integer, not {idx_text!r}", line.number, line.col(3))
        value = line.tokens[5][1]
        if value not in ("true", "false"):
            raise r.error(f"inf_often must be true or false, not {value!r}", line.number, line.col(5))
        idx = int(idx_text)
        per = flags.setdefault(seq, {})
        if idx in per:
            raise r.error(f"duplicate oracle for {seq} ball {idx}", line.number, 1)
        per[idx] = value == "true"
        notes.setdefault(seq, {})[idx] = line.comment
    return OracleTable(flags, notes)


def attach_oracles(family: BallFamily, table: OracleTable) -> BallFamily:
    for seq, per in table.flags.items():
        missing = [k for k in range(len(family)) if k not in per]
        extra = [k for k in per if k >= len(family)]
        if missing or extra:
            raise InvariantError(
                f"oracle for {seq} must cover balls 0..{len(family) - 1} exactly"
                + (f"; missing {missing[0]}" if missing else f"; unknown {extra[0]}")
            )
        family = family.with_oracle(seq, [per[k] for k in range(len(family))])
    return family


def _invariant(r: _Reader, name, exc: Exception):
    where = f"{r.path}: " if r.path else ""
    return InvariantError(f"{where}{r.kind} {name}: {exc}")


def parse_text(text: str, kind: str, *, space: Optional[FiniteSemimetricSpace] = None, path=None):
    if kind not in KINDS:
        raise DomainError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    r = _Reader(text, kind, path)

    if kind == "space":
        raw = _read_space(r)
        try:
            return FiniteSemimetricSpace(raw.points, raw.table, name=raw.name)
        except InvariantError as exc:
            raise _invariant(r, raw.name, exc) from None

    if kind == "fixture-oracle":
        return _read_oracles(r)

    if kind == "bifn":
        name, [(h, kpos)] = r.header(space, extra=("K",))
        K = r.scalar(h, kpos)
    else:
        name, _ = r.header(space)
    labels = space.points
    n = len(labels)

    if kind == "family":
        r.only({"radii", "filled", "ball"})
        rline = r.single("radii")
        fline = r.single("filled")
        explicit = [l for l in r.body if l.directive == "ball"]
        if rline is not None and explicit:
            raise r.error("use either a 'radii' line or 'ball' lines, not both", explicit[0].number, 1)
        if fline is not None and len(fline.tokens) != 1:
            raise r.error("'filled' takes no arguments", fline.number, fline.col(1))
        try:
            if rline is not None:
                if len(rline.tokens) < 2:
                    raise r.error("'radii' needs at least one radius", rline.number, rline.col(1))
                radii = [r.scalar(rline, k) for k in range(1, len(rline.tokens))]
                return build_ball_family(space, radii, filled=fline is not None, name=name)
            if fline is not None:
                raise r.error("'filled' needs a 'radii' line", fline.number, 1)
            if not explicit:
                raise r.error("family needs a 'radii' line or 'ball' lines", *r.end())
            balls = []
            for line in explicit:
                members = frozenset(r.labels_from(line, 1, labels))
                if not members:
                    raise r.error("a ball must be nonempty", line.number, line.col(1))
                balls.append(Ball(members))
            return BallFamily(space, tuple(balls), name=name)
        except (InvariantError, DomainError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise _invariant(r, name, exc) from None

    if kind == "map":
        r.only({"send"})
        table = [None] * n
        for line in r.body:
            r.expect_args(line, 2, "a point and its image")
            x, y = r.label(line, 1, labels), r.label(line, 2, labels)
            if table[x] is not None:
                raise r.error(f"duplicate image for {labels[x]}", line.number, 1)
            table[x] = y
        missing = [labels[i] for i in range(n) if table[i] is None]
        if missing:
            raise r.error(f"no 'send' line for {missing[0]}", *r.end())
        return SelfMap(tuple(table), name, labels)

    if kind in ("fn", "bifn"):
        r.only({"val"})
        arity = 1 if kind == "fn" else 2
        vals = {}
        for line in r.body:
            r.expect_args(line, arity + 1, "point labels and a scalar" if arity == 2 else "a point and a scalar")
            key = tuple(r.label(line, k, labels) for k in range(1, arity + 1))
            if key in vals:
                raise r.error(f"duplicate val for {' '.join(labels[i] for i in key)}", line.number, 1)
            vals[key] = r.scalar(line, arity + 1)
        if kind == "fn":
            missing = [labels[i] for i in range(n) if (i,) not in vals]
            if missing:
                raise r.error(f"no 'val' line for {missing[0]}", *r.end())
            try:
                return ScalarFunction(tuple(vals[(i,)] for i in range(n)), name, labels)
            except InvariantError as exc:
                raise _invariant(r, name, exc) from None
        for i in range(n):
            vals.setdefault((i, i), ZERO)
            for j in range(n):
                if (i, j) not in vals:
                    raise r.error(f"no 'val' line for pair ({labels[i]}, {labels[j]})", *r.end())
        try:
            return ExtendedBiFunction(tuple(tuple(vals[(i, j)] for j in range(n)) for i in range(n)), K, name, labels)
        except DomainError as exc:
            raise _invariant(r, name, exc) from None

    if kind == "seq":
        r.only({"prefix", "cycle"})
        pline, cline = r.single("prefix"), r.single("cycle")
        if cline is None or len(cline.tokens) < 2:
            raise r.error("sequence needs a nonempty 'cycle' line", (cline or r.head).number, 1)
        prefix = () if pline is None else tuple(r.labels_from(pline, 1, labels))
        return EventuallyPeriodicSequence(prefix, tuple(r.labels_from(cline, 1, labels)), name, labels)

    if kind == "topology":
        r.only({"open"})
        opens = [frozenset(r.labels_from(line, 1, labels)) for line in r.body]
        try:
            return FiniteTopology(n, frozenset(opens), name, labels)
        except InvariantError as exc:
            raise _invariant(r, name, exc) from None
    raise AssertionError(kind)


def parse(path, kind: str, *, space: Optional[FiniteSemimetricSpace] = None):
    """Load and validate a file of the given kind."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_text(text, kind, space=space, path=path)


# ---------------------------------------------------------------------------
# serialization


def serialize(obj, kind: Optional[str] = None, *, space: Optional[FiniteSemimetricSpace] = None) -> str:
    """Canonical text of ``obj``; kinds declared over a space need ``space``."""
    kind = kind or _kind_of(obj)
    out = []
    if kind in _OVER_KINDS and kind != "family":
        if space is None:
            raise DomainError(f"serializing a {kind} needs its space")
    if kind == "family":
        space = obj.space
    labels = space.points if space is not None else ()

    if kind == "space":
        out += [f"space {obj.name}", "points " + " ".join(obj.points)]
        n = len(obj)
        for i in range(n):
            for j in range(i + 1, n):
                out.append(f"dist {obj.points[i]} {obj.points[j]} {format_scalar(obj.dist[i][j])}")
    elif kind == "family":
        out.append(f"family {obj.name} over {space.name}")
        if obj.radii:
            out.append("radii " + " ".join(format_scalar(r) for r in obj.radii))
            if obj.filled:
                out.append("filled")
        else:
            out += ["ball " + " ".join(space.labels(b.members)) for b in obj.balls]
    elif kind == "map":
        out.append(f"map {obj.name} over {space.name}")
        out += [f"send {labels[x]} {labels[y]}" for x, y in enumerate(obj.table)]
    elif kind == "fn":
        out.append(f"fn {obj.name} over {space.name}")
        out += [f"val {labels[x]} {format_scalar(v)}" for x, v in enumerate(obj.values)]
    elif kind == "bifn":
        out.append(f"bifn {obj.name} over {space.name} K {format_scalar(obj.K)}")
        for x, row in enumerate(obj.table):
            for y, v in enumerate(row):
                if x != y or v != 0:
                    out.append(f"val {labels[x]} {labels[y]} {format_scalar(v)}")
    elif kind == "seq":
        out.append(f"seq {obj.name} over {space.name}")
        if obj.prefix:
            out.append("prefix " + " ".join(labels[i] for i in obj.prefix))
        out.append("cycle " + " ".join(labels[i] for i in obj.cycle))
    elif kind == "topology":
        out.append(f"topology {obj.name} over {space.name}")
        full = frozenset(range(obj.n))
        for U in sorted(obj.open_sets, key=lambda s: (len(s), sorted(s))):
            if U and U != full:
                out.append("open " + " ".join(labels[i] for i in sorted(U)))
    elif kind == "fixture-oracle":
        for seq in obj.flags:
            for idx in sorted(obj.flags[seq]):
                note = obj.notes.get(seq, {}).get(idx, "")
                value = "true" if obj.flags[seq][idx] else "false"
                out.append(f"oracle {seq} ball {idx} inf_often {value}" + (f"  # {note}" if note else ""))
    else:
        raise DomainError(f"cannot serialize kind {kind!r}")
    return "\n".join(out) + "\n"


def _kind_of(obj) -> str:
    for cls, kind in (
        (FiniteSemimetricSpace, "space"),
        (BallFamily, "family"),
        (SelfMap, "map"),
        (ScalarFunction, "fn"),
        (ExtendedBiFunction, "bifn"),
        (EventuallyPeriodicSequence, "seq"),
        (FiniteTopology, "topology"),
        (OracleTable, "fixture-oracle"),
    ):
        if isinstance(obj, cls):
            return kind
    raise DomainError(f"no file format for {type(obj).__name__}")


def normalize(text: str) -> str:
    """Comments and blank lines dropped, runs of whitespace collapsed."""
    kept = (" ".join(raw.partition("#")[0].split()) for raw in text.splitlines())
    return "\n".join(line for line in kept if line)
