"""Rendering of check results as text or as line-oriented key=value records.

Exit codes: 0 when every claim passes, 1 when some claim fails or an input
misses a precondition of the requested check, 2 when the input could not be
read at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

__all__ = ["Report", "ReportItem", "emit_report", "error_report"]


@dataclass(frozen=True)
class ReportItem:
    id: str
    citation: str
    passed: bool
    witness: str = ""


@dataclass
class Report:
    title: str
    items: list = field(default_factory=list)
    facts: list = field(default_factory=list)  # (key, value) pairs in display order
    error: Optional[str] = None
    error_code: int = 2

    def claim(self, id, citation, passed, witness=""):
        self.items.append(ReportItem(id, citation, bool(passed), str(witness)))
        return self

    def fact(self, key, value):
        self.facts.append((key, str(value)))
        return self

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return self.error_code
        return 0 if all(i.passed for i in self.items) else 1

    def ordered_items(self):
        # failing claims first, otherwise stable
        return sorted(self.items, key=lambda i: i.passed)


def error_report(title, exc) -> Report:
    return Report(title, error=str(exc), error_code=getattr(exc, "exit_code", 2))


def _flat(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\n", "\\n")


def _coerce(results) -> Report:
    if isinstance(results, Report):
        return results
    rep = Report("results")
    for r in results:
        rep.claim(r.id, getattr(r, "citation", ""), r.passed, getattr(r, "witness", ""))
    return rep


def emit_report(results, format: str = "text") -> str:
    """Render a Report (or an iterable of claim results) in the requested format."""
    rep = _coerce(results)
    if format == "structured":
        return _structured(rep)
    if format == "text":
        return _text(rep)
    raise ValueError(f"unknown report format {format!r}")


def _structured(rep: Report) -> str:
    lines = [f"report={_flat(rep.title)}", f"exit_code={rep.exit_code}"]
    if rep.error is not None:
        lines.append(f"error={_flat(rep.error)}")
        return "\n".join(lines) + "\n"
    for k, v in rep.facts:
        lines.append(f"fact.{k}={_flat(v)}")
    items = rep.ordered_items()
    lines.append(f"claims={len(items)}")
    lines.append(f"failed={sum(not i.passed for i in items)}")
    for i in items:
        lines += [
            f"claim.id={_flat(i.id)}",
            f"claim.citation={_flat(i.citation)}",
            f"claim.verdict={'pass' if i.passed else 'fail'}",
            f"claim.witness={_flat(i.witness)}",
        ]
    return "\n".join(lines) + "\n"


def _text(rep: Report) -> str:
    out = [rep.title]
    if rep.error is not None:
        out.append(f"error: {rep.error}")
        return "\n".join(out) + "\n"
    if rep.facts:
        width = max(len(k) for k, _ in rep.facts)
        out += [f"  {k.ljust(width)}  {v}" for k, v in rep.facts]
    items = rep.ordered_items()
    if items:
        width = max(len(i.id) for i in items)
        for i in items:
            line = f"  {'PASS' if i.passed else 'FAIL'}  {i.id.ljust(width)}"
            if i.witness:
                line += f"  {i.witness}"
            out.append(line)
            if i.citation:
                out.append(f"        [{i.citation}]")
        failed = sum(not i.passed for i in items)
        out.append(f"{len(items) - failed}/{len(items)} claims pass")
    return "\n".join(out) + "\n"
