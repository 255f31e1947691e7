"""Scalar expression language for vector-field components.

Grammar (whitespace is insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?
    atom    := NUMBER | VAR | FUNC "(" expr ")" | "(" expr ")"
    VAR     := "x" DIGITS            (1-based: x1 .. xn)
    FUNC    := "sqrt" | "sin" | "cos" | "exp" | "ln"
    NUMBER  := DIGITS ["." DIGITS] [("e" | "E") ["+" | "-"] DIGITS]

``^`` binds tighter than unary minus, so ``-x1^2`` is ``-(x1^2)``; ``^`` is
right-associative, everything else is left-associative.  Unary minus applied
directly to a numeric literal yields a negative constant.

Trees are immutable.  :func:`to_text` prints with minimal parentheses and
``parse_expr(to_text(e), n) == e`` for every tree produced by
:func:`parse_expr` or :func:`diff_expr`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .errors import (
    DomainError,
    ExprSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
)

__all__ = [
    "Const", "Var", "Unary", "Binary", "Expr", "FUNCTIONS",
    "parse_expr", "to_text", "eval_expr", "compile_expr", "diff_expr",
    "variables",
]

FUNCTIONS = ("sqrt", "sin", "cos", "exp", "ln")
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Unary:
    """``op`` is ``"neg"`` or one of :data:`FUNCTIONS`."""

    op: str
    child: "Expr"

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return to_text(self)


Expr = Union[Const, Var, Unary, Binary]


# ---------------------------------------------------------------------------
# Tokenizer and parser

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)
_VAR_RE = re.compile(r"x(\d+)\Z")


def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.lastgroup is None:
            bad = len(text) - len(text[pos:].lstrip())
            raise ExprSyntaxError(
                f"unexpected character {text[bad]!r}", _byte_offset(text, bad))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, n):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def error(self, message, cls=ExprSyntaxError, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2]
        return cls(message, _byte_offset(self.text, pos))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.peek()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise self.error(f"expected {value!r}, found {found}")
        self.take()

    def parse(self):
        e = self.expr()
        kind, val, _ = self.peek()
        if kind != "end":
            raise self.error(f"unexpected token {val!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            e = Binary(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            e = Binary(op, e, self.unary())
        return e

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            child = self.unary()
            if isinstance(child, Const):
                return Const(-child.value)
            return Unary("neg", child)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            value = float(val)
            if not math.isfinite(value):
                raise self.error("numeric literal overflows", pos=pos)
            return Const(value)
        if kind == "name":
            m = _VAR_RE.match(val)
            if m:
                index = int(m.group(1))
                if not 1 <= index <= self.n:
                    raise self.error(
                        f"variable index out of range: {val} (dimension {self.n})",
                        VariableIndexError, pos)
                return Var(index)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(val, arg)
            raise self.error(f"unknown identifier {val!r}", UnknownIdentifierError, pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        self.i -= 1
        found = "end of input" if kind == "end" else repr(val)
        raise self.error(f"expected operand, found {found}")


def parse_expr(text: str, n: int) -> Expr:
    """Parse ``text`` into an expression over variables ``x1 .. xn``."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, n).parse()


# ---------------------------------------------------------------------------
# Printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e):
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return 3 if e.op == "neg" else 5
    if isinstance(e, Const):
        return 3 if math.copysign(1.0, e.value) < 0 else 5
    return 5


def _fmt_const(v):
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v)) if v != 0 else ("-0" if math.copysign(1.0, v) < 0 else "0")
    return repr(v)


def to_text(e: Expr) -> str:
    """Print ``e`` in the input grammar with minimal parentheses."""
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.child, _prec(e.child) < 3)
        return f"{e.op}({to_text(e.child)})"
    p = _PREC[e.op]
    if e.op == "^":
        left = _wrap(e.left, _prec(e.left) <= 4)
        right = _wrap(e.right, _prec(e.right) < 3)
        return f"{left}^{right}"
    left = _wrap(e.left, _prec(e.left) < p)
    right = _wrap(e.right, _prec(e.right) <= p)
    if p == 1:
        return f"{left} {e.op} {right}"
    return f"{left}{e.op}{right}"


def _wrap(e, paren):
    s = to_text(e)
    return f"({s})" if paren else s


# ---------------------------------------------------------------------------
# Evaluation

def _pow(a, b, node):
    if b.is_integer():
        if a == 0.0 and b < 0:
            raise DomainError("zero raised to a negative power", node)
    elif a <= 0.0:
        raise DomainError("non-integer power of a non-positive base", node)
    try:
        return a ** b
    except OverflowError:
        raise DomainError("overflow", node) from None


def _apply_unary(op, a, node):
    if op == "neg":
        return -a
    if op == "sqrt":
        if a < 0.0:
            raise DomainError("sqrt of a negative number", node)
        return math.sqrt(a)
    if op == "ln":
        if a <= 0.0:
            raise DomainError("ln of a non-positive number", node)
        return math.log(a)
    if op == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            raise DomainError("overflow", node) from None
    if op == "sin":
        return math.sin(a)
    return math.cos(a)


def _apply_binary(op, a, b, node):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0.0:
            raise DomainError("division by zero", node)
        return a / b
    return _pow(a, b, node)


def _checked(v, node):
    if not math.isfinite(v):
        raise DomainError("non-finite result", node)
    return v


def eval_expr(e: Expr, x: Sequence[float]) -> float:
    """Evaluate ``e`` at the state ``x`` (``x[0]`` is ``x1``).

    Raises :class:`DomainError` naming the offending sub-expression when an
    argument leaves a function's domain.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(x[e.index - 1])
    if isinstance(e, Unary):
        return _checked(_apply_unary(e.op, eval_expr(e.child, x), e), e)
    a = eval_expr(e.left, x)
    b = eval_expr(e.right, x)
    return _checked(_apply_binary(e.op, a, b, e), e)


def compile_expr(e: Expr) -> Callable[[Sequence[float]], float]:
    """Compile ``e`` into a closure computing the same values as :func:`eval_expr`.

    Closures avoid re-dispatching on node type at every call, which matters
    inside integrators.
    """
    if isinstance(e, Const):
        v = e.value
        return lambda x: v
    if isinstance(e, Var):
        k = e.index - 1
        return lambda x: float(x[k])
    if isinstance(e, Unary):
        f = compile_expr(e.child)
        op = e.op
        if op == "neg":
            return lambda x: -f(x)
        if op in ("sin", "cos"):
            fn = math.sin if op == "sin" else math.cos
            return lambda x: _checked(fn(f(x)), e)
        return lambda x: _checked(_apply_unary(op, f(x), e), e)
    fa = compile_expr(e.left)
    fb = compile_expr(e.right)
    op = e.op
    if op == "+":
        return lambda x: _checked(fa(x) + fb(x), e)
    if op == "-":
        return lambda x: _checked(fa(x) - fb(x), e)
    if op == "*":
        return lambda x: _checked(fa(x) * fb(x), e)
    return lambda x: _checked(_apply_binary(op, fa(x), fb(x), e), e)


def variables(e: Expr) -> set:
    """Set of variable indices referenced by ``e``."""
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Unary):
        return variables(e.child)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    return set()


# ---------------------------------------------------------------------------
# Simplifying constructors: constant folding and identity elimination only.

ZERO = Const(0.0)
ONE = Const(1.0)


def _is(e, value):
    return isinstance(e, Const) and e.value == value


def _fold(fn, *args):
    try:
        v = fn(*args)
    except (DomainError, OverflowError, ZeroDivisionError):
        return None
    return Const(v) if math.isfinite(v) else None


def neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.child
    return Unary("neg", a)


def func(op, a):
    if isinstance(a, Const):
        folded = _fold(_apply_unary, op, a.value, None)
        if folded is not None:
            return folded
    return Unary(op, a)


def add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value) if math.isfinite(a.value + b.value) else Binary("+", a, b)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(b, Unary) and b.op == "neg":
        return sub(a, b.child)
    if isinstance(b, Const) and b.value < 0:
        return Binary("-", a, Const(-b.value))
    return Binary("+", a, b)


def sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value) if math.isfinite(a.value - b.value) else Binary("-", a, b)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(b, Unary) and b.op == "neg":
        return add(a, b.child)
    return Binary("-", a, b)


def mul(a, b):
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value) if math.isfinite(a.value * b.value) else Binary("*", a, b)
    if _is(a, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(a, -1.0):
        return neg(b)
    if isinstance(a, Unary) and a.op == "neg":
        return neg(mul(a.child, b))
    if isinstance(b, Unary) and b.op == "neg":
        return neg(mul(a, b.child))
    if isinstance(a, Const) and isinstance(b, Binary) and b.op == "*" and isinstance(b.left, Const):
        return mul(Const(a.value * b.left.value), b.right)
    if isinstance(a, Const) and a.value < 0:
        return neg(mul(Const(-a.value), b))
    return Binary("*", a, b)


def div(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(_apply_binary, "/", a.value, b.value, None)
        return folded if folded is not None else Binary("/", a, b)
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    if isinstance(a, Unary) and a.op == "neg":
        return neg(div(a.child, b))
    if isinstance(b, Const):
        if b.value < 0:
            return neg(div(a, Const(-b.value)))
        if isinstance(a, Binary) and a.op == "*" and isinstance(a.left, Const) and b.value != 0:
            return mul(Const(a.left.value / b.value), a.right)
    return Binary("/", a, b)


def power(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(_pow, a.value, b.value, None)
        return folded if folded is not None else Binary("^", a, b)
    if _is(b, 1.0):
        return a
    if _is(b, 0.0) or _is(a, 1.0):
        return ONE
    return Binary("^", a, b)


# ---------------------------------------------------------------------------
# Differentiation

def diff_expr(e: Expr, var: int) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``x<var>`` (1-based)."""
    if var < 1:
        raise ValueError(f"variable index must be >= 1, got {var}")
    return _diff(e, var)


def _diff(e, var):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == var else ZERO
    if isinstance(e, Unary):
        u = e.child
        du = _diff(u, var)
        if _is(du, 0.0):
            return ZERO
        if e.op == "neg":
            return neg(du)
        if e.op == "sqrt":
            return div(du, mul(Const(2.0), e))
        if e.op == "sin":
            return mul(func("cos", u), du)
        if e.op == "cos":
            return neg(mul(func("sin", u), du))
        if e.op == "exp":
            return mul(e, du)
        return div(du, u)  # ln

    u, v = e.left, e.right
    du, dv = _diff(u, var), _diff(v, var)
    if e.op == "+":
        return add(du, dv)
    if e.op == "-":
        return sub(du, dv)
    if e.op == "*":
        return add(mul(du, v), mul(u, dv))
    if e.op == "/":
        if _is(dv, 0.0):
            return div(du, v)
        return div(sub(mul(du, v), mul(u, dv)), power(v, Const(2.0)))
    # power
    if _is(dv, 0.0):
        if _is(du, 0.0):
            return ZERO
        exponent = sub(v, ONE)
        return mul(mul(v, power(u, exponent)), du)
    return mul(e, add(mul(dv, func("ln", u)), div(mul(v, du), u)))
