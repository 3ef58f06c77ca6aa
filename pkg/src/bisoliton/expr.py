"""Single-variable real expressions: parsing, evaluation, symbolic derivatives.

Grammar (whitespace insensitive, precedence high to low)::

    atom    := NUMBER | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'
    power   := atom ['^' unary]            right associative
    unary   := '-' unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

so ``-r^2`` is ``-(r^2)`` and ``2^-r`` is ``2^(-r)``.  There is no implicit
multiplication: ``2r`` is a syntax error.

``abs`` is accepted but its derivative ``u' * u / abs(u)`` is undefined at
zero, so it is a poor choice for generating functions.

Evaluation accepts floats or numpy arrays and raises :class:`DomainError`
instead of returning NaN or inf.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownIdentifier

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call", "FUNCTIONS",
    "parse", "evaluate", "differentiate", "to_string",
    "num", "add", "sub", "mul", "div", "neg", "power",
]

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs")

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


class Expr:
    """Immutable expression tree node.  Subclasses are frozen dataclasses."""

    def __call__(self, x):
        return evaluate(self, x)

    def __str__(self):
        return to_string(self)

    @cached_property
    def is_constant(self) -> bool:
        return not any(isinstance(n, Var) for n in self.walk())

    @cached_property
    def derivative(self) -> Expr:
        return differentiate(self)

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    def children(self):
        return ()


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def __repr__(self):
        return f"Num({self.value!r})"


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unsupported function {self.func!r}")

    def children(self):
        return (self.arg,)


# --------------------------------------------------------------------------
# tokenizer and parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    toks = []
    pos = 0
    n = len(src)
    while True:
        while pos < n and src[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}",
                                  len(src[:pos].encode()),
                                  {"number", "identifier", "operator"})
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), len(src[:start].encode())))
        pos = m.end()
    toks.append(("end", "", len(src.encode())))
    return toks


_ATOM_START = {"number", "identifier", "'('", "'-'"}


class _Parser:
    def __init__(self, src, var):
        self.toks = _tokenize(src)
        self.i = 0
        self.var = var

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {text or 'end of input'!r}", off, {f"'{op}'"})
        self.take()

    def parse(self):
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", off,
                                  {"'+'", "'-'", "'*'", "'/'", "'^'", "end"})
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, off = self.take()
        if kind == "number":
            return Num(float(text))
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text == self.var:
                return Var(text)
            if text == "pi":
                return Num(math.pi)
            raise UnknownIdentifier(text, off)
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", off, _ATOM_START)


def parse(src: str, var: str = "x") -> Expr:
    """Parse ``src`` as an expression in the single variable ``var``."""
    if var in FUNCTIONS or var == "pi" or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", var):
        raise ValueError(f"invalid variable name {var!r}")
    return _Parser(src, var).parse()


# --------------------------------------------------------------------------
# evaluation

_UFUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
}


def evaluate(e: Expr, x):
    """Evaluate ``e`` at ``x`` (float or array).  Returns float for scalar input."""
    xa = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(e, xa)
    out = np.broadcast_to(out, xa.shape)
    return float(out) if out.ndim == 0 else np.array(out)


def _finite(val, node):
    if not np.all(np.isfinite(val)):
        raise DomainError("non-finite result (overflow)", node)
    return val


def _eval(e, x):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.arg, x)
    if isinstance(e, Call):
        a = _eval(e.arg, x)
        if e.func == "log" and np.any(np.asarray(a) <= 0):
            raise DomainError("log of non-positive value", e)
        if e.func == "sqrt" and np.any(np.asarray(a) < 0):
            raise DomainError("sqrt of negative value", e)
        if e.func == "tan" and np.any(np.cos(a) == 0):
            raise DomainError("tan at a pole", e)
        return _finite(_UFUNCS[e.func](a), e)
    if isinstance(e, BinOp):
        a = _eval(e.left, x)
        b = _eval(e.right, x)
        op = e.op
        if op == "+":
            return _finite(a + b, e)
        if op == "-":
            return _finite(a - b, e)
        if op == "*":
            return _finite(a * b, e)
        if op == "/":
            if np.any(np.asarray(b) == 0):
                raise DomainError("division by zero", e)
            return _finite(a / b, e)
        if op == "^":
            return _finite(_pow(a, b, e), e)
    raise TypeError(f"not an expression node: {e!r}")


def _pow(a, b, node):
    a_arr = np.asarray(a)
    if node.right.is_constant:
        c = float(b)
        if c == int(c):
            if c < 0 and np.any(a_arr == 0):
                raise DomainError("zero raised to a negative power", node)
            return np.power(a, c)
        if np.any(a_arr < 0):
            raise DomainError("negative base with non-integer exponent", node)
        if c < 0 and np.any(a_arr == 0):
            raise DomainError("zero raised to a negative power", node)
        return np.power(a, c)
    if np.any(a_arr <= 0):
        raise DomainError("variable exponent requires a positive base", node)
    return np.power(a, b)


# --------------------------------------------------------------------------
# smart constructors (light simplification)

ZERO = Num(0.0)
ONE = Num(1.0)


def num(v) -> Num:
    return Num(float(v))


def _is(e, v):
    return isinstance(e, Num) and e.value == v


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return BinOp("+", a, b)


def sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if a == b:
        return ZERO
    return BinOp("-", a, b)


def mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    if isinstance(b, BinOp) and b.op == "/" and _is(b.left, 1):
        return div(a, b.right)
    if isinstance(a, BinOp) and a.op == "/" and _is(a.left, 1):
        return div(b, a.right)
    if isinstance(b, Num) and not isinstance(a, Num):
        a, b = b, a
    return BinOp("*", a, b)


def div(a, b):
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    return BinOp("/", a, b)


def power(a, b):
    if _is(b, 1):
        return a
    if _is(b, 0):
        return ONE
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            return Num(evaluate(BinOp("^", a, b), 0.0))
        except DomainError:
            pass
    return BinOp("^", a, b)


def call(f, a):
    return Call(f, a)


# --------------------------------------------------------------------------
# differentiation

def differentiate(e: Expr) -> Expr:
    """Exact symbolic derivative with respect to the (single) variable."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return neg(differentiate(e.arg))
    if isinstance(e, BinOp):
        u, v = e.left, e.right
        du, dv = differentiate(u), differentiate(v)
        if e.op == "+":
            return add(du, dv)
        if e.op == "-":
            return sub(du, dv)
        if e.op == "*":
            return add(mul(du, v), mul(u, dv))
        if e.op == "/":
            if v.is_constant:
                return div(du, v)
            return div(sub(mul(du, v), mul(u, dv)), power(v, Num(2.0)))
        if e.op == "^":
            if v.is_constant:
                # d(u^c) = c u^(c-1) u'
                return mul(mul(v, power(u, sub(v, ONE))), du)
            # d(u^v) = u^v (v' log u + v u'/u)
            return mul(e, add(mul(dv, Call("log", u)), div(mul(v, du), u)))
    if isinstance(e, Call):
        u = e.arg
        du = differentiate(u)
        f = e.func
        if f == "sin":
            d = Call("cos", u)
        elif f == "cos":
            d = neg(Call("sin", u))
        elif f == "tan":
            d = div(ONE, power(Call("cos", u), Num(2.0)))
        elif f == "sinh":
            d = Call("cosh", u)
        elif f == "cosh":
            d = Call("sinh", u)
        elif f == "tanh":
            d = sub(ONE, power(Call("tanh", u), Num(2.0)))
        elif f == "exp":
            d = e
        elif f == "log":
            return div(du, u)
        elif f == "sqrt":
            return div(du, mul(Num(2.0), e))
        elif f == "abs":
            # sign(u); undefined at u = 0
            return div(mul(du, u), e)
        return mul(d, du)
    raise TypeError(f"not an expression node: {e!r}")


# --------------------------------------------------------------------------
# printing

def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _show(e):
    """Return (text, precedence)."""
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return (s, _PREC_NEG) if e.value < 0 or s.startswith("-") else (s, _PREC_ATOM)
    if isinstance(e, Var):
        return e.name, _PREC_ATOM
    if isinstance(e, Call):
        return f"{e.func}({_show(e.arg)[0]})", _PREC_ATOM
    if isinstance(e, Neg):
        s, p = _show(e.arg)
        return "-" + (f"({s})" if p < _PREC_NEG else s), _PREC_NEG
    if isinstance(e, BinOp):
        ls, lp = _show(e.left)
        rs, rp = _show(e.right)
        if e.op == "^":
            if lp <= _PREC_POW:
                ls = f"({ls})"
            if rp < _PREC_NEG:
                rs = f"({rs})"
            return f"{ls}^{rs}", _PREC_POW
        prec = _PREC_ADD if e.op in "+-" else _PREC_MUL
        if lp < prec:
            ls = f"({ls})"
        if rp <= prec:
            rs = f"({rs})"
        sep = f" {e.op} " if prec == _PREC_ADD else e.op
        return f"{ls}{sep}{rs}", prec
    raise TypeError(f"not an expression node: {e!r}")


def to_string(e: Expr) -> str:
    """Infix text that parses back to the same tree."""
    return _show(e)[0]
