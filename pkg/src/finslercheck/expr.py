"""Parsing and jet evaluation of user-supplied scalar formulas.

Grammar (whitespace insignificant, no implicit multiplication):

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?        right-associative
    exponent := '-' exponent | power        must fold to a number
    atom     := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

NUMBER is a decimal or scientific-notation literal.  A bare NAME must be
one of the declared variables; NAME '(' ... ')' must be one of the
functions sqrt, sin, cos, exp, log, abs.  '^' binds tighter than unary
minus and takes a constant exponent, so jets stay exact for the
half-integer powers that metric formulas use.

This text format is the public contract for the f/g/h and F fields of
config files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .jets import Jet, JetDomainError, absval, cos, exp, log, powc, sin, sqrt

FUNCTIONS = {"sqrt": sqrt, "sin": sin, "cos": cos, "exp": exp, "log": log, "abs": absval}


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownVariableError(ParseError):
    def __init__(self, name: str, offset: int):
        ParseError.__init__(self, f"unknown variable '{name}'", offset)
        self.name = name


class UnknownFunctionError(ParseError):
    def __init__(self, name: str, offset: int):
        ParseError.__init__(self, f"unknown function '{name}'", offset)
        self.name = name


class EvalDomainError(ValueError):
    """A jet domain error, annotated with where in the source it happened."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    arg: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    offset: int = field(default=0, compare=False)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(source) - len(stripped))
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, source: str, allowed_vars: set[str]):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0
        self.allowed = set(allowed_vars)

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _eat_op(self, *ops: str):
        t = self._peek()
        if t is not None and t[0] == "op" and t[1] in ops:
            self.pos += 1
            return t
        return None

    def _expect_op(self, op: str):
        if self._eat_op(op) is None:
            t = self._peek()
            offset = t[2] if t else len(self.source)
            raise ParseError(f"expected '{op}'", offset)

    def parse(self):
        if not self.tokens:
            raise ParseError("empty expression", 0)
        node = self.expr()
        t = self._peek()
        if t is not None:
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return node

    def expr(self):
        node = self.term()
        while True:
            t = self._eat_op("+", "-")
            if t is None:
                return node
            node = BinOp(t[1], node, self.term(), offset=t[2])

    def term(self):
        node = self.unary()
        while True:
            t = self._eat_op("*", "/")
            if t is None:
                return node
            node = BinOp(t[1], node, self.unary(), offset=t[2])

    def unary(self):
        t = self._eat_op("-")
        if t is not None:
            return Neg(self.unary(), offset=t[2])
        return self.power()

    def power(self):
        base = self.atom()
        t = self._eat_op("^")
        if t is None:
            return base
        exponent_node = self._exponent()
        return Pow(base, _fold_constant(exponent_node), offset=t[2])

    def _exponent(self):
        t = self._eat_op("-")
        if t is not None:
            return Neg(self._exponent(), offset=t[2])
        return self.power()

    def atom(self):
        t = self._peek()
        if t is None:
            raise ParseError("unexpected end of input", len(self.source))
        kind, text, offset = t
        if kind == "num":
            self.pos += 1
            return Const(float(text), offset=offset)
        if kind == "name":
            self.pos += 1
            if self._eat_op("("):
                if text not in FUNCTIONS:
                    raise UnknownFunctionError(text, offset)
                arg = self.expr()
                self._expect_op(")")
                return Call(text, arg, offset=offset)
            if text not in self.allowed:
                raise UnknownVariableError(text, offset)
            return Var(text, offset=offset)
        if text == "(":
            self.pos += 1
            node = self.expr()
            self._expect_op(")")
            return node
        raise ParseError(f"unexpected token {text!r}", offset)


def _fold_constant(node) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Neg):
        return -_fold_constant(node.arg)
    if isinstance(node, BinOp):
        a, b = _fold_constant(node.left), _fold_constant(node.right)
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b}[node.op]
    if isinstance(node, Pow):
        return _fold_constant(node.base) ** node.exponent
    offset = getattr(node, "offset", 0)
    raise ParseError("exponent must be a constant", offset)


def parse(source: str, allowed_vars: set[str]):
    """Parse a formula into an AST over the declared variable names."""
    return _Parser(source, allowed_vars).parse()


def variables(node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Const,)):
        return set()
    if isinstance(node, Neg):
        return variables(node.arg)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Pow):
        return variables(node.base)
    if isinstance(node, Call):
        return variables(node.arg)
    raise TypeError(f"not an AST node: {node!r}")


def serialize(node) -> str:
    """Canonical text form; parse(serialize(e)) is structurally identical to e."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{serialize(node.arg)})"
    if isinstance(node, BinOp):
        return f"({serialize(node.left)} {node.op} {serialize(node.right)})"
    if isinstance(node, Pow):
        return f"({serialize(node.base)} ^ {repr(node.exponent)})"
    if isinstance(node, Call):
        return f"{node.fn}({serialize(node.arg)})"
    raise TypeError(f"not an AST node: {node!r}")


def evaluate(node, bindings: dict[str, Jet], nvars: int | None = None, order: int | None = None):
    """Evaluate an AST over jet bindings by structural recursion.

    Jet shape is taken from the bindings unless given explicitly (needed
    only for expressions with no variables and no bindings).
    """
    if bindings:
        sample = next(iter(bindings.values()))
        nvars, order = sample.nvars, sample.order
        for v in bindings.values():
            if v.nvars != nvars or v.order != order:
                raise ValueError("all bound jets must share nvars and order")
    elif nvars is None or order is None:
        raise ValueError("need nvars and order to evaluate a variable-free expression")

    def ev(n):
        try:
            if isinstance(n, Const):
                return Jet.constant(n.value, nvars, order)
            if isinstance(n, Var):
                try:
                    return bindings[n.name]
                except KeyError:
                    raise UnknownVariableError(n.name, n.offset) from None
            if isinstance(n, Neg):
                return -ev(n.arg)
            if isinstance(n, BinOp):
                a, b = ev(n.left), ev(n.right)
                if n.op == "+":
                    return a + b
                if n.op == "-":
                    return a - b
                if n.op == "*":
                    return a * b
                return a / b
            if isinstance(n, Pow):
                return powc(ev(n.base), n.exponent)
            if isinstance(n, Call):
                return FUNCTIONS[n.fn](ev(n.arg))
        except JetDomainError as err:
            raise EvalDomainError(str(err), n.offset) from err
        raise TypeError(f"not an AST node: {n!r}")

    return ev(node)
