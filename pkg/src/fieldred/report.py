"""Plain-text reports: sections separated by ``---`` lines, one ``key: value`` per line."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return {True: "true", False: "false", None: "none"}[value]
    if isinstance(value, (np.integer,)):
        return str(int(value))
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{fmt(k)}: {fmt(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(fmt(v) for v in value) + "]"
    return str(value)


class Report:
    def __init__(self):
        self.sections: list[tuple[str, list]] = []

    def section(self, name: str, items=None, lines=None):
        body = [(k, v) for k, v in (items or {}).items()]
        self.sections.append((name, body, list(lines or [])))
        return self

    def render(self) -> str:
        out = []
        for i, (name, body, lines) in enumerate(self.sections):
            if i:
                out.append("---")
            out.append(f"section: {name}")
            out += [f"{k}: {fmt(v)}" for k, v in body]
            out += lines
        return "\n".join(out) + "\n"

    def to_payload(self) -> list:
        return [[name, [[k, fmt(v)] for k, v in body], lines] for name, body, lines in self.sections]

    @classmethod
    def from_payload(cls, payload) -> "Report":
        rep = cls()
        for name, body, lines in payload:
            rep.sections.append((name, [(k, _Raw(v)) for k, v in body], list(lines)))
        return rep


class _Raw(str):
    """Already formatted value (restored from the cache)."""
