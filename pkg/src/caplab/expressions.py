"""Radial expressions: parsing, evaluation, symbolic differentiation.

Expressions are one-variable functions of the radial distance r, written
in a small fixed grammar:

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = "-" unary | power ;
    power  = atom [ "^" unary ] ;
    atom   = NUMBER | "r" | "pi" | "e"
           | FUNC "(" expr ")" | "(" expr ")" ;
    FUNC   = "exp" | "log" | "sin" | "cos" | "sinh" | "cosh"
           | "tanh" | "coth" | "sqrt" ;

"+", "-", "*", "/" associate to the left, "^" to the right, and "^" binds
tighter than unary minus (so "-r^2" is -(r^2) and "r^-2" is allowed).
NUMBER accepts decimal and scientific notation.  There are no user-defined
functions or variables other than r.

Trees are immutable.  Construction goes through smart constructors that
apply light, purely local simplification (constant folding of arithmetic
on two literals, 0*x -> 0, 1*x -> x, x+0 -> x, x-0 -> x, x/1 -> x,
x^1 -> x, -(-x) -> x).  Nothing smarter is attempted, so derivative trees
are reproducible across runs and platforms.  Printing uses minimal
parentheses and round-trips: parsing the printed form of any tree yields
a structurally identical tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import DomainError, ExpressionSyntaxError, UnknownIdentifier

__all__ = [
    "RadialExpr",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "parse",
    "evaluate",
    "differentiate",
    "to_string",
    "constant",
    "variable",
    "constant_value",
    "log_of",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "tanh", "coth", "sqrt")
_CONSTANTS = {"pi": math.pi, "e": math.e}


# --------------------------------------------------------------------------
# AST nodes


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    """The radial variable r."""


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a name from FUNCTIONS
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Unary, Binary]


@dataclass(frozen=True)
class RadialExpr:
    """An immutable expression tree in the radial variable r."""

    root: Node

    def __call__(self, r: float) -> float:
        return evaluate(self, r)

    def derivative(self) -> "RadialExpr":
        return differentiate(self)

    def __str__(self) -> str:
        return to_string(self)


# --------------------------------------------------------------------------
# Smart constructors (light local simplification only)


def _const(value: float) -> Const:
    if not math.isfinite(value):
        raise ValueError(f"non-finite constant {value!r}")
    if value == 0.0:
        value = 0.0  # normalize -0.0 away
    return Const(value)


def _is_const(node: Node, value: Optional[float] = None) -> bool:
    if not isinstance(node, Const):
        return False
    return value is None or node.value == value


def _neg(a: Node) -> Node:
    if isinstance(a, Const):
        return _const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def _add(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _const(a.value + b.value)
    return Binary("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return _const(a.value - b.value)
    return Binary("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        prod = a.value * b.value
        if math.isfinite(prod):
            return _const(prod)
    return Binary("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return _const(0.0)
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        quot = a.value / b.value
        if math.isfinite(quot):
            return _const(quot)
    return Binary("/", a, b)


def _pow(a: Node, b: Node) -> Node:
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        try:
            val = a.value ** b.value
        except (OverflowError, ValueError, ZeroDivisionError):
            val = math.nan
        if isinstance(val, float) and math.isfinite(val):
            return _const(val)
    return Binary("^", a, b)


def _func(op: str, a: Node) -> Node:
    return Unary(op, a)


def constant(value: float) -> RadialExpr:
    """Expression holding a single literal value."""
    return RadialExpr(_const(value))


def variable() -> RadialExpr:
    """The bare expression r."""
    return RadialExpr(Var())


def constant_value(expr: RadialExpr) -> Optional[float]:
    """The literal value if the tree is a single constant, else None."""
    if isinstance(expr.root, Const):
        return expr.root.value
    return None


# --------------------------------------------------------------------------
# Tokenizer / parser

_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        if self.pos >= len(self.text):
            return ""
        return self.text[self.pos]

    def _expect(self, char: str) -> None:
        self._skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != char:
            raise ExpressionSyntaxError(self.pos, f"'{char}'")
        self.pos += 1

    def parse(self) -> Node:
        node = self.expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise ExpressionSyntaxError(self.pos, "end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            ch = self._peek()
            if ch == "+":
                self.pos += 1
                node = _add(node, self.term())
            elif ch == "-":
                self.pos += 1
                node = _sub(node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            ch = self._peek()
            if ch == "*":
                self.pos += 1
                node = _mul(node, self.unary())
            elif ch == "/":
                self.pos += 1
                node = _div(node, self.unary())
            else:
                return node

    def unary(self) -> Node:
        if self._peek() == "-":
            self.pos += 1
            return _neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self._peek() == "^":
            self.pos += 1
            return _pow(base, self.unary())
        return base

    def atom(self) -> Node:
        self._skip_ws()
        if self.pos >= len(self.text):
            raise ExpressionSyntaxError(self.pos, "expression")
        ch = self.text[self.pos]
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self._expect(")")
            return node
        m = _NUMBER_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return _const(float(m.group()))
        m = _IDENT_RE.match(self.text, self.pos)
        if m:
            name = m.group()
            start = self.pos
            self.pos = m.end()
            if name == "r":
                return Var()
            if name in _CONSTANTS:
                return _const(_CONSTANTS[name])
            if name in FUNCTIONS:
                self._expect("(")
                node = self.expr()
                self._expect(")")
                return _func(name, node)
            raise UnknownIdentifier(name, start)
        raise ExpressionSyntaxError(self.pos, "expression")


def parse(text: str) -> RadialExpr:
    """Parse expression text into a RadialExpr.

    Raises ExpressionSyntaxError on malformed input and UnknownIdentifier
    for any name other than r, pi, e, or a built-in function.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError(0, "expression")
    return RadialExpr(_Parser(text).parse())


# --------------------------------------------------------------------------
# Evaluation


def _eval(node: Node, r: float) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return r
    if isinstance(node, Unary):
        v = _eval(node.arg, r)
        op = node.op
        try:
            if op == "neg":
                out = -v
            elif op == "exp":
                out = math.exp(v)
            elif op == "log":
                if v <= 0.0:
                    raise DomainError(r, f"log of non-positive value {v!r}")
                out = math.log(v)
            elif op == "sqrt":
                if v < 0.0:
                    raise DomainError(r, f"sqrt of negative value {v!r}")
                out = math.sqrt(v)
            elif op == "sin":
                out = math.sin(v)
            elif op == "cos":
                out = math.cos(v)
            elif op == "sinh":
                out = math.sinh(v)
            elif op == "cosh":
                out = math.cosh(v)
            elif op == "tanh":
                out = math.tanh(v)
            elif op == "coth":
                if v == 0.0:
                    raise DomainError(r, "coth at zero argument")
                out = 1.0 / math.tanh(v)
            else:  # pragma: no cover - constructors forbid this
                raise AssertionError(f"unknown unary op {op!r}")
        except OverflowError:
            raise DomainError(r, f"{op} overflow on argument {v!r}", overflow=True) from None
        return out
    assert isinstance(node, Binary)
    a = _eval(node.left, r)
    b = _eval(node.right, r)
    op = node.op
    if op == "+":
        out = a + b
    elif op == "-":
        out = a - b
    elif op == "*":
        out = a * b
    elif op == "/":
        if b == 0.0:
            raise DomainError(r, "division by zero")
        out = a / b
    else:  # "^"
        if a == 0.0 and b < 0.0:
            raise DomainError(r, "zero raised to a negative power")
        try:
            out = a ** b
        except (OverflowError, ZeroDivisionError):
            raise DomainError(r, f"power overflow on {a!r}^{b!r}", overflow=True) from None
        except ValueError:
            raise DomainError(r, f"negative base {a!r} with non-integer exponent {b!r}") from None
        if isinstance(out, complex):
            raise DomainError(r, f"negative base {a!r} with non-integer exponent {b!r}")
    if not math.isfinite(out):
        raise DomainError(r, f"non-finite intermediate in {op!r}", overflow=True)
    return out


def evaluate(expr: RadialExpr, r: float) -> float:
    """Value of the expression at radius r, in double precision.

    Raises DomainError when a sub-expression is undefined at r (with
    overflow=True when the failure is an overflow rather than a genuine
    domain violation).
    """
    return _eval(expr.root, r)


# --------------------------------------------------------------------------
# Symbolic differentiation


def _diff(node: Node) -> Node:
    if isinstance(node, Const):
        return _const(0.0)
    if isinstance(node, Var):
        return _const(1.0)
    if isinstance(node, Unary):
        u = node.arg
        du = _diff(u)
        op = node.op
        if op == "neg":
            return _neg(du)
        if op == "exp":
            return _mul(Unary("exp", u), du)
        if op == "log":
            return _div(du, u)
        if op == "sqrt":
            return _div(du, _mul(_const(2.0), Unary("sqrt", u)))
        if op == "sin":
            return _mul(Unary("cos", u), du)
        if op == "cos":
            return _neg(_mul(Unary("sin", u), du))
        if op == "sinh":
            return _mul(Unary("cosh", u), du)
        if op == "cosh":
            return _mul(Unary("sinh", u), du)
        if op == "tanh":
            return _mul(_sub(_const(1.0), _pow(Unary("tanh", u), _const(2.0))), du)
        if op == "coth":
            return _mul(_sub(_const(1.0), _pow(Unary("coth", u), _const(2.0))), du)
        raise AssertionError(f"unknown unary op {op!r}")  # pragma: no cover
    assert isinstance(node, Binary)
    a, b = node.left, node.right
    da, db = _diff(a), _diff(b)
    op = node.op
    if op == "+":
        return _add(da, db)
    if op == "-":
        return _sub(da, db)
    if op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, _const(2.0)))
    # power rule; the general form needs log of the base
    if isinstance(b, Const):
        return _mul(_mul(b, _pow(a, _const(b.value - 1.0))), da)
    inner = _add(_mul(db, Unary("log", a)), _div(_mul(b, da), a))
    return _mul(Binary("^", a, b), inner)


def differentiate(expr: RadialExpr) -> RadialExpr:
    """Symbolic derivative d/dr with light simplification."""
    return RadialExpr(_diff(expr.root))


# --------------------------------------------------------------------------
# Printing with minimal parentheses

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5

_BINARY_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def _prec(node: Node) -> int:
    if isinstance(node, Const):
        # negative literals print with a leading minus and bind like unary minus
        return _PREC_NEG if node.value < 0.0 else _PREC_ATOM
    if isinstance(node, Var):
        return _PREC_ATOM
    if isinstance(node, Unary):
        return _PREC_NEG if node.op == "neg" else _PREC_ATOM
    return _BINARY_PREC[node.op]


def _fmt_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _to_str(node: Node) -> str:
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return "r"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = _to_str(node.arg)
            if _prec(node.arg) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({_to_str(node.arg)})"
    assert isinstance(node, Binary)
    op = node.op
    prec = _BINARY_PREC[op]
    left = _to_str(node.left)
    right = _to_str(node.right)
    if op == "^":
        # grammar slots: base is an atom, exponent is a unary
        if _prec(node.left) < _PREC_ATOM:
            left = f"({left})"
        if _prec(node.right) < _PREC_NEG:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < prec:
        left = f"({left})"
    # equal precedence on the right is parenthesized even for + and * so the
    # printed form re-parses to the same (left-associated) tree shape
    if _prec(node.right) <= prec:
        right = f"({right})"
    return f"{left}{op}{right}"


def to_string(expr: RadialExpr) -> str:
    """ASCII form with minimal parentheses; parses back to an identical tree."""
    return _to_str(expr.root)


# --------------------------------------------------------------------------
# Structural log transform (best effort)


def _log_node(node: Node) -> Optional[Node]:
    if isinstance(node, Const):
        if node.value <= 0.0:
            return None
        return _const(math.log(node.value))
    if isinstance(node, Var):
        return Unary("log", Var())
    if isinstance(node, Unary):
        if node.op == "exp":
            return node.arg
        if node.op == "sqrt":
            la = _log_node(node.arg)
            return None if la is None else _div(la, _const(2.0))
        return None
    assert isinstance(node, Binary)
    if node.op == "*":
        la, lb = _log_node(node.left), _log_node(node.right)
        if la is None or lb is None:
            return None
        return _add(la, lb)
    if node.op == "/":
        la, lb = _log_node(node.left), _log_node(node.right)
        if la is None or lb is None:
            return None
        return _sub(la, lb)
    if node.op == "^":
        la = _log_node(node.left)
        return None if la is None else _mul(node.right, la)
    return None


def log_of(expr: RadialExpr) -> Optional[RadialExpr]:
    """Expression for log(expr) when one can be read off the tree structure.

    Covers products, quotients, powers, exp and sqrt; returns None when the
    logarithm has no such structural form.  Useful for evaluating the log of
    rapidly growing expressions without overflowing the expression itself.
    """
    node = _log_node(expr.root)
    return None if node is None else RadialExpr(node)
