"""A small s-expression reader with source positions.

Atoms are runs of identifier characters (including ``~`` occurrence marks
and ``'`` primes); ``;`` starts a line comment.  The reader produces
``Atom`` and ``SList`` nodes carrying line/column for diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

ATOM_CHARS = set(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_'~+*-."
)


@dataclass(frozen=True)
class Atom:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int


def tokenize(text: str):
    line, col = 1, 1
    i = 0
    out = []
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            out.append((c, line, col))
            col += 1
            i += 1
        elif c in ATOM_CHARS:
            start = i
            startcol = col
            while i < n and text[i] in ATOM_CHARS:
                i += 1
                col += 1
            out.append((text[start:i], line, startcol))
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    return out


def parse_all(text: str) -> list:
    """All top-level forms in the text."""
    tokens = tokenize(text)
    pos = 0
    out = []

    def parse_one():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input", 0, 0,
                             expected=("(", "atom"))
        tok, line, col = tokens[pos]
        if tok == "(":
            pos += 1
            items = []
            while True:
                if pos >= len(tokens):
                    raise ParseError("unclosed parenthesis", line, col,
                                     expected=(")",))
                if tokens[pos][0] == ")":
                    pos += 1
                    return SList(tuple(items), line, col)
                items.append(parse_one())
        if tok == ")":
            raise ParseError("unmatched closing parenthesis", line, col)
        pos += 1
        return Atom(tok, line, col)

    while pos < len(tokens):
        out.append(parse_one())
    return out


def expect_list(node, what: str) -> SList:
    if not isinstance(node, SList):
        raise ParseError(f"expected {what}, found atom {node.text!r}",
                         node.line, node.col, expected=("(",))
    return node


def expect_atom(node, what: str) -> Atom:
    if not isinstance(node, Atom):
        raise ParseError(f"expected {what}, found a list", node.line, node.col)
    return node
