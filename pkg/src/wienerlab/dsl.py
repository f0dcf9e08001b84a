"""Small expression language for cylinder functionals of the increments.

Surface syntax::

    expr    := term (("+" | "-") term)*
    term    := factor ("*" factor)*
    factor  := "-" factor | atom
    atom    := NUMBER | x<i> | h<k> "(" x<i> ")" | "(" expr ")"
    input   := expr | "[" expr ("," expr)* "]"

``x<i>`` is the i-th Gaussian increment, ``h<k>(x<i>)`` the k-th Hermite
polynomial of it, and a bracketed list is a vector functional.  Operators
have the usual precedence; ``*`` is the pointwise product, which in the
chaos algebra expands through the Hermite linearization.

Parsing reports syntax errors with line, column, and the expected token
set; groups left unclosed are reported at the opening bracket.  Lowering
into the algebra happens against a configured ambient dimension and degree
cap, and violations carry the source span of the offending node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .chaos import ChaosPoly, DEGREE_CAP, DegreeCapExceeded, hermite_product
from .malliavin import VField


class DslError(ValueError):
    """Base for parse and lowering failures."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class DslSyntaxError(DslError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message}; expected {', '.join(self.expected)}"
        super().__init__(message, line, col)


class DslSemanticError(DslError):
    """The expression parsed but violates the configured dimension or cap."""


# ----------------------------------------------------------------- tokens

_TOKEN_RE = re.compile(
    r"(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<symbol>[+\-*()\[\],])"
    r"|(?P<space>[ \t]+)"
    r"|(?P<newline>\n)"
)


@dataclass(frozen=True)
class Token:
    kind: str  # number, var, herm, symbol, end
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        pos = m.end()
        if m.lastgroup == "space":
            col += len(m.group())
            continue
        if m.lastgroup == "newline":
            line += 1
            col = 1
            continue
        tok_text = m.group()
        if m.lastgroup == "number":
            tokens.append(Token("number", tok_text, line, col))
        elif m.lastgroup == "name":
            if re.fullmatch(r"x\d+", tok_text):
                tokens.append(Token("var", tok_text, line, col))
            elif re.fullmatch(r"h\d+", tok_text):
                tokens.append(Token("herm", tok_text, line, col))
            else:
                raise DslSyntaxError(
                    f"unknown name {tok_text!r}", line, col,
                    expected=("x<i>", "h<k>(x<i>)", "number"),
                )
        else:
            tokens.append(Token(tok_text, tok_text, line, col))
        col += len(tok_text)
    tokens.append(Token("end", "", line, col))
    return tokens


# -------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Literal:
    value: float
    span: tuple[int, int] = field(compare=False, default=(0, 0))


@dataclass(frozen=True)
class Variable:
    index: int
    span: tuple[int, int] = field(compare=False, default=(0, 0))


@dataclass(frozen=True)
class Hermite:
    order: int
    index: int
    span: tuple[int, int] = field(compare=False, default=(0, 0))


@dataclass(frozen=True)
class Unary:
    operand: object
    span: tuple[int, int] = field(compare=False, default=(0, 0))


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object
    span: tuple[int, int] = field(compare=False, default=(0, 0))


@dataclass(frozen=True)
class Vector:
    items: tuple
    span: tuple[int, int] = field(compare=False, default=(0, 0))


FunctionalExpr = (Literal, Variable, Hermite, Unary, Binary, Vector)


# ------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.open_groups: list[Token] = []

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected) -> None:
        tok = self.peek()
        if tok.kind == "end" and self.open_groups:
            opener = self.open_groups[-1]
            raise DslSyntaxError(
                f"unclosed {opener.text!r}", opener.line, opener.col,
                expected=expected,
            )
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise DslSyntaxError(f"unexpected {what}", tok.line, tok.col, expected=expected)

    def expect(self, kind: str, expected) -> Token:
        if self.peek().kind != kind:
            self.fail(expected)
        return self.advance()

    def parse_input(self):
        if self.peek().kind == "[":
            node = self.parse_vector()
        else:
            node = self.parse_expr()
        if self.peek().kind != "end":
            self.fail(("operator", "end of input"))
        return node

    def parse_vector(self) -> Vector:
        opener = self.advance()
        self.open_groups.append(opener)
        items = [self.parse_expr()]
        while self.peek().kind == ",":
            self.advance()
            items.append(self.parse_expr())
        if self.peek().kind != "]":
            self.fail(("','", "']'"))
        self.advance()
        self.open_groups.pop()
        return Vector(tuple(items), span=(opener.line, opener.col))

    def parse_expr(self):
        node = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            right = self.parse_term()
            node = Binary(op.kind, node, right, span=(op.line, op.col))
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.peek().kind == "*":
            op = self.advance()
            right = self.parse_factor()
            node = Binary("*", node, right, span=(op.line, op.col))
        return node

    def parse_factor(self):
        if self.peek().kind == "-":
            op = self.advance()
            return Unary(self.parse_factor(), span=(op.line, op.col))
        return self.parse_atom()

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Literal(float(tok.text), span=(tok.line, tok.col))
        if tok.kind == "var":
            self.advance()
            return Variable(int(tok.text[1:]), span=(tok.line, tok.col))
        if tok.kind == "herm":
            self.advance()
            self.expect("(", ("'('",))
            self.open_groups.append(tok)
            var = self.peek()
            if var.kind != "var":
                self.fail(("x<i>",))
            self.advance()
            if self.peek().kind != ")":
                self.fail(("')'",))
            self.advance()
            self.open_groups.pop()
            return Hermite(int(tok.text[1:]), int(var.text[1:]), span=(tok.line, tok.col))
        if tok.kind == "(":
            self.advance()
            self.open_groups.append(tok)
            node = self.parse_expr()
            if self.peek().kind != ")":
                self.fail(("')'", "operator"))
            self.advance()
            self.open_groups.pop()
            return node
        self.fail(("number", "x<i>", "h<k>(x<i>)", "'('", "'-'"))


def parse_functional(text: str):
    """Parse source text into a functional expression tree."""
    return _Parser(_tokenize(text)).parse_input()


# ----------------------------------------------------------------- printer


def _precedence(node) -> int:
    if isinstance(node, Binary):
        return 1 if node.op in ("+", "-") else 2
    if isinstance(node, Unary):
        return 3
    return 4


def _format_value(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _print_node(node) -> str:
    if isinstance(node, Literal):
        if node.value < 0:
            return f"-{_format_value(-node.value)}"
        return _format_value(node.value)
    if isinstance(node, Variable):
        return f"x{node.index}"
    if isinstance(node, Hermite):
        return f"h{node.order}(x{node.index})"
    if isinstance(node, Unary):
        inner = _print_node(node.operand)
        if _precedence(node.operand) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Binary):
        prec = _precedence(node)
        left = _print_node(node.left)
        if _precedence(node.left) < prec:
            left = f"({left})"
        right = _print_node(node.right)
        if _precedence(node.right) <= prec:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Vector):
        return "[" + ", ".join(_print_node(item) for item in node.items) + "]"
    raise TypeError(f"not a functional node: {node!r}")


def print_functional(node) -> str:
    """Canonical text form; parsing it reproduces the tree structurally."""
    return _print_node(node)


# ---------------------------------------------------------------- lowering


def _check_index(index: int, n: int, span) -> None:
    if index < 1:
        raise DslSemanticError(f"variable index must be at least 1, got x{index}", *span)
    if index > n:
        raise DslSemanticError(
            f"variable x{index} exceeds the configured dimension n={n}", *span
        )


def lower(node, n: int, *, cap: int | None = None):
    """Evaluate the tree in the chaos algebra over n coordinates.

    Scalar expressions produce a ChaosPoly, vector literals a VField.
    Dimension and degree-cap violations raise :class:`DslSemanticError`
    pointing at the offending source span.  The cap can only tighten the
    algebra's hard degree cap, never exceed it.
    """
    limit = DEGREE_CAP if cap is None else min(int(cap), DEGREE_CAP)
    if isinstance(node, Vector):
        return VField(tuple(_lower_scalar(item, n, limit) for item in node.items))
    return _lower_scalar(node, n, limit)


def _lower_scalar(node, n: int, cap: int) -> ChaosPoly:
    if isinstance(node, Literal):
        return ChaosPoly.constant(n, node.value)
    if isinstance(node, Variable):
        _check_index(node.index, n, node.span)
        return ChaosPoly.coordinate(n, node.index)
    if isinstance(node, Hermite):
        _check_index(node.index, n, node.span)
        if node.order > cap:
            raise DslSemanticError(
                f"Hermite order {node.order} exceeds the degree cap {cap}", *node.span
            )
        return ChaosPoly.hermite(n, node.index, node.order)
    if isinstance(node, Unary):
        return _lower_scalar(node.operand, n, cap) * -1.0
    if isinstance(node, Binary):
        left = _lower_scalar(node.left, n, cap)
        right = _lower_scalar(node.right, n, cap)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        try:
            return hermite_product(left, right, cap=cap)
        except DegreeCapExceeded as exc:
            raise DslSemanticError(
                f"product exceeds the degree cap {cap} (degree {exc.degree})",
                *node.span,
            ) from exc
    if isinstance(node, Vector):
        raise DslSemanticError("vector literals cannot be nested", *node.span)
    raise TypeError(f"not a functional node: {node!r}")
