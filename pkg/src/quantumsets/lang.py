"""Concrete syntax and AST for first-order formulas over the membership relation.

Grammar, loosest binding first::

    formula  := iff
    iff      := implies ( "<->" iff )?           right associative
    implies  := or ( "->" implies )?             right associative
    or       := and ( "|" and )*                 left associative
    and      := unary ( "&" unary )*             left associative
    unary    := "!" unary | quantifier | atom | "(" formula ")"
    quantifier := ("forall" | "exists") NAME ( "in" NAME )? "." formula
    atom     := NAME "in" NAME | NAME "=" NAME

A quantifier body extends as far to the right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import ParseError

__all__ = [
    "Membership",
    "Equality",
    "Not",
    "And",
    "Or",
    "Implies",
    "Iff",
    "BoundedForall",
    "BoundedExists",
    "Forall",
    "Exists",
    "Formula",
    "parse",
    "to_text",
    "free_vars",
    "is_delta0",
    "KEYWORDS",
]

KEYWORDS = frozenset({"forall", "exists", "in"})


@dataclass(frozen=True)
class Membership:
    element: str
    container: str


@dataclass(frozen=True)
class Equality:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class BoundedForall:
    var: str
    bound: str
    body: "Formula"


@dataclass(frozen=True)
class BoundedExists:
    var: str
    bound: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[
    Membership, Equality, Not, And, Or, Implies, Iff,
    BoundedForall, BoundedExists, Forall, Exists,
]

_BINARY = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
_QUANTIFIERS = (BoundedForall, BoundedExists, Forall, Exists)

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><->|->|[!&|().=])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "name", "kw", "op" or "end"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = pos + chunk.rindex("\n") + 1
        else:
            word = m.group()
            if kind == "name" and word in KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, word, line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, message, tok=None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.col)

    def accept(self, text):
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")

    def name(self):
        tok = self.tok
        if tok.kind != "name":
            found = tok.text or "end of input"
            self.fail(f"expected an identifier, found {found!r}")
        self.i += 1
        return tok.text

    def formula(self):
        left = self.implies()
        if self.accept("<->"):
            return Iff(left, self.formula())
        return left

    def implies(self):
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implies())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.accept("|"):
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.accept("&"):
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.tok
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "kw" and tok.text in ("forall", "exists"):
            return self.quantifier()
        left = self.name()
        if self.accept("in"):
            return Membership(left, self.name())
        if self.accept("="):
            return Equality(left, self.name())
        self.fail(f"expected 'in' or '=' after {left!r}")

    def quantifier(self):
        universal = self.tok.text == "forall"
        self.i += 1
        var_tok = self.tok
        var = self.name()
        if var in self.bound:
            self.fail(f"variable {var!r} is already bound", var_tok)
        bound = self.name() if self.accept("in") else None
        self.expect(".")
        self.bound.append(var)
        try:
            body = self.formula()
        finally:
            self.bound.pop()
        if bound is None:
            return Forall(var, body) if universal else Exists(var, body)
        return BoundedForall(var, bound, body) if universal else BoundedExists(var, bound, body)


def parse(text: str) -> Formula:
    """Parse ``text`` into a formula, raising :class:`ParseError` with a position."""
    p = _Parser(text)
    result = p.formula()
    if p.tok.kind != "end":
        p.fail(f"unexpected {p.tok.text!r}")
    return result


_LEVEL = {Iff: 0, Implies: 1, Or: 2, And: 3}


def to_text(phi: Formula) -> str:
    """Print a formula so that :func:`parse` gives it back unchanged."""
    return _show(phi, top=True)


def _show(phi, top=False):
    if isinstance(phi, Membership):
        return f"{phi.element} in {phi.container}"
    if isinstance(phi, Equality):
        return f"{phi.left} = {phi.right}"
    if isinstance(phi, Not):
        return "!" + _operand(phi.body, 4)
    if isinstance(phi, _QUANTIFIERS):
        word = "forall" if isinstance(phi, (BoundedForall, Forall)) else "exists"
        head = f"{word} {phi.var}"
        if isinstance(phi, (BoundedForall, BoundedExists)):
            head += f" in {phi.bound}"
        text = f"{head} . {_show(phi.body, top=True)}"
        return text if top else f"({text})"
    level = _LEVEL[type(phi)]
    op = _BINARY[type(phi)]
    if isinstance(phi, (And, Or)):
        left, right = _operand(phi.left, level), _operand(phi.right, level + 1)
    else:
        left, right = _operand(phi.left, level + 1), _operand(phi.right, level)
    return f"{left} {op} {right}"


def _operand(phi, min_level):
    # quantifiers always get parentheses when they are operands
    if isinstance(phi, _QUANTIFIERS):
        return _show(phi)
    if type(phi) in _LEVEL and _LEVEL[type(phi)] < min_level:
        return f"({_show(phi, top=True)})"
    return _show(phi, top=True)


def free_vars(phi: Formula) -> frozenset[str]:
    """Names occurring free; constants count, since both are plain names."""
    if isinstance(phi, Membership):
        return frozenset({phi.element, phi.container})
    if isinstance(phi, Equality):
        return frozenset({phi.left, phi.right})
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, (BoundedForall, BoundedExists)):
        return (free_vars(phi.body) - {phi.var}) | {phi.bound}
    if isinstance(phi, (Forall, Exists)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def is_delta0(phi: Formula) -> bool:
    if isinstance(phi, (Forall, Exists)):
        return False
    if isinstance(phi, (Membership, Equality)):
        return True
    if isinstance(phi, Not):
        return is_delta0(phi.body)
    if isinstance(phi, (BoundedForall, BoundedExists)):
        return is_delta0(phi.body)
    return is_delta0(phi.left) and is_delta0(phi.right)
