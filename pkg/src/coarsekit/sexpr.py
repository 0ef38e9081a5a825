"""Parenthesized node-labeled trees: tokenizer, parser and canonical renderer.

Atoms are integers, fractions ``p/q``, symbols and double-quoted strings.
``;`` starts a comment that runs to the end of the line. Lists keep the
line/column of their opening parenthesis and of each child so later stages can
report errors at the right place.
"""
from __future__ import annotations

import re
from fractions import Fraction


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        self.msg, self.line, self.col = msg, line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + msg)


class Symbol(str):
    """A bare identifier (distinct from a quoted string)."""

    __slots__ = ()

    def __repr__(self):
        return f"Symbol({str.__repr__(self)})"


class Node(tuple):
    """A list node; compares like a tuple, carries source positions."""

    def __new__(cls, items=(), pos=None, child_pos=None):
        obj = super().__new__(cls, items)
        obj.pos = pos
        obj.child_pos = child_pos or [None] * len(obj)
        return obj

    @property
    def head(self):
        return self[0] if self and isinstance(self[0], Symbol) else None

    def where(self, i=None):
        """(line, col) of the node or of child ``i``."""
        if i is not None and 0 <= i < len(self.child_pos) and self.child_pos[i] is not None:
            return self.child_pos[i]
        return self.pos or (None, None)


def sym(name: str) -> Symbol:
    return Symbol(name)


def node(*items) -> Node:
    return Node(items)


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>;[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<atom>[^\s();"]+)
""", re.VERBOSE)

_INT = re.compile(r"-?\d+\Z")
_FRAC = re.compile(r"-?\d+/\d+\Z")


def _atom(text):
    if _INT.match(text):
        return int(text)
    if _FRAC.match(text):
        p, q = text.split("/")
        if int(q) == 0:
            raise ValueError("zero denominator")
        return Fraction(int(p), int(q))
    return Symbol(text)


def _unescape(body):
    return re.sub(r"\\(.)", r"\1", body)


def tokenize(text: str):
    """Yield (kind, value, line, col)."""
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        col = i - line_start + 1
        if kind == "string":
            yield "atom", _unescape(m.group()[1:-1]), line, col
        elif kind == "atom":
            try:
                yield "atom", _atom(m.group()), line, col
            except ValueError as exc:
                raise ParseError(f"bad atom {m.group()!r}: {exc}", line, col) from None
        elif kind in ("open", "close"):
            yield kind, None, line, col
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = i + chunk.rindex("\n") + 1
        i = m.end()


def parse(text: str) -> list:
    """All top-level terms of ``text``."""
    stack = [([], [], None)]
    for kind, value, line, col in tokenize(text):
        if kind == "open":
            stack.append(([], [], (line, col)))
        elif kind == "close":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            items, poss, start = stack.pop()
            stack[-1][0].append(Node(items, start, poss))
            stack[-1][1].append(start)
        else:
            stack[-1][0].append(value)
            stack[-1][1].append((line, col))
    if len(stack) > 1:
        line, col = stack[-1][2]
        raise ParseError("unclosed '('", line, col)
    return stack[0][0]


def parse_one(text: str):
    terms = parse(text)
    if len(terms) != 1:
        raise ParseError(f"expected one term, found {len(terms)}", 1, 1)
    return terms[0]


def _render_atom(x):
    if isinstance(x, bool):
        raise TypeError("booleans have no textual form; use symbols")
    if isinstance(x, Symbol) and x and _TOKEN.fullmatch(x) and _TOKEN.fullmatch(x).lastgroup == "atom" \
            and not (_INT.match(x) or _FRAC.match(x)):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, str):
        return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot render {type(x).__name__}")


def render(term) -> str:
    """Canonical single-line text; ``parse_one(render(t)) == t``."""
    if isinstance(term, tuple):
        return "(" + " ".join(render(t) for t in term) + ")"
    return _render_atom(term)


def render_all(terms) -> str:
    return "\n".join(render(t) for t in terms) + ("\n" if terms else "")
