"""Topology expressions: bases combined by expansions.

Grammar (whitespace-insensitive)::

    expr := base | "L(" expr ")" | "L^" int "(" expr ")"
          | "Deg(" expr "," int ")" | "Pow(" expr "," int ")"
          | "Prod(" expr "," expr ")" | "Undir(" expr ")"
    base := Name [ "(" int { "," int } ")" ]
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .bases import ARITY, BaseParamError, BaseSpec, Family, base_spec


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


@dataclass(frozen=True)
class Base:
    family: Family
    params: tuple[int, ...] = ()

    @property
    def spec(self) -> BaseSpec:
        return base_spec(self.family, self.params)


@dataclass(frozen=True)
class Line:
    inner: "Expr"


@dataclass(frozen=True)
class Deg:
    inner: "Expr"
    n: int


@dataclass(frozen=True)
class Pow:
    inner: "Expr"
    n: int


@dataclass(frozen=True)
class Prod:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Undir:
    inner: "Expr"


Expr = Union[Base, Line, Deg, Pow, Prod, Undir]


def to_text(e: Expr) -> str:
    if isinstance(e, Base):
        if not e.params:
            return e.family.value
        return f"{e.family.value}({','.join(map(str, e.params))})"
    if isinstance(e, Line):
        return f"L({to_text(e.inner)})"
    if isinstance(e, Deg):
        return f"Deg({to_text(e.inner)},{e.n})"
    if isinstance(e, Pow):
        return f"Pow({to_text(e.inner)},{e.n})"
    if isinstance(e, Prod):
        return f"Prod({to_text(e.left)},{to_text(e.right)})"
    if isinstance(e, Undir):
        return f"Undir({to_text(e.inner)})"
    raise TypeError(f"not an expression: {e!r}")


def size(e: Expr) -> int:
    """Number of nodes in the expression tree."""
    if isinstance(e, Base):
        return 1
    if isinstance(e, Prod):
        return 1 + size(e.left) + size(e.right)
    return 1 + size(e.inner)


def depth(e: Expr) -> int:
    if isinstance(e, Base):
        return 0
    if isinstance(e, Prod):
        return 1 + max(depth(e.left), depth(e.right))
    return 1 + depth(e.inner)


def line_count(e: Expr) -> int:
    if isinstance(e, Base):
        return 0
    if isinstance(e, Prod):
        return line_count(e.left) + line_count(e.right)
    return (1 if isinstance(e, Line) else 0) + line_count(e.inner)


def shape(e: Expr) -> tuple[int, int]:
    """(N, d) derived bottom-up."""
    if isinstance(e, Base):
        spec = e.spec
        return spec.n_nodes, spec.degree
    if isinstance(e, Line):
        n, d = shape(e.inner)
        return d * n, d
    if isinstance(e, Deg):
        n, d = shape(e.inner)
        return e.n * n, e.n * d
    if isinstance(e, Pow):
        n, d = shape(e.inner)
        return n**e.n, e.n * d
    if isinstance(e, Prod):
        n1, d1 = shape(e.left)
        n2, d2 = shape(e.right)
        return n1 * n2, d1 + d2
    if isinstance(e, Undir):
        n, d = shape(e.inner)
        return n, 2 * d
    raise TypeError(f"not an expression: {e!r}")


_FAMILIES = {f.value: f for f in Family}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            raise ParseError(f"expected {ch!r}, found {found}", self.pos)
        self.pos += 1

    def name(self) -> tuple[str, int]:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalnum():
            self.pos += 1
        if start == self.pos:
            raise ParseError("expected a name", start)
        return self.text[start:self.pos], start

    def integer(self) -> int:
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        digits = self.text[start:self.pos]
        if not digits.lstrip("+-"):
            raise ParseError("expected an integer", start)
        return int(digits)

    def positive(self, what: str) -> int:
        at = self.pos
        v = self.integer()
        if v < 1:
            raise ParseError(f"{what} must be >= 1", at)
        return v

    def expr(self) -> Expr:
        word, at = self.name()
        if word == "L":
            times = 1
            if self.peek() == "^":
                self.pos += 1
                times = self.positive("line exponent")
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            for _ in range(times):
                inner = Line(inner)
            return inner
        if word in ("Deg", "Pow"):
            self.expect("(")
            inner = self.expr()
            self.expect(",")
            n = self.positive("expansion factor")
            self.expect(")")
            return Deg(inner, n) if word == "Deg" else Pow(inner, n)
        if word == "Prod":
            self.expect("(")
            left = self.expr()
            self.expect(",")
            right = self.expr()
            self.expect(")")
            return Prod(left, right)
        if word == "Undir":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Undir(inner)
        if word not in _FAMILIES:
            raise ParseError(f"unknown topology {word!r}", at)
        family = _FAMILIES[word]
        params: list[int] = []
        if self.peek() == "(":
            self.pos += 1
            if self.peek() != ")":
                params.append(self.integer())
                while self.peek() == ",":
                    self.pos += 1
                    params.append(self.integer())
            self.expect(")")
        if len(params) != ARITY[family]:
            raise ParseError(f"{word} takes {ARITY[family]} parameter(s), got {len(params)}", at)
        try:
            base_spec(family, params)
        except BaseParamError as exc:
            raise ParseError(str(exc), at) from None
        return Base(family, tuple(params))


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    p.skip()
    if p.pos != len(text):
        raise ParseError(f"unexpected {text[p.pos]!r}", p.pos)
    return e
