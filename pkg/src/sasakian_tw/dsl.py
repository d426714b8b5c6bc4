"""Level-set function language.

Grammar (EBNF)::

    expr    = term , { ( "+" | "-" ) , term } ;
    term    = unary , { ( "*" | "/" ) , unary } ;
    unary   = "-" , unary | power ;
    power   = primary , [ "^" , unary ] ;
    primary = number | variable | function , "(" , expr , ")" | "(" , expr , ")" ;
    function = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)`` and a level
set written as ``-x^2 + 1`` has the normal of ``-(x^2) + 1``.  ``^`` is right
associative: ``2^3^2 == 2^9``.

Variables are ``x, y, z`` when ``m == 1`` and ``x1..xm, y1..ym, z`` otherwise,
matching the chart ordering ``(x_1..x_m, y_1..y_m, z)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from . import jets
from .jets import Jet3, JetDomainError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")


class ParseError(ValueError):
    """Malformed source.  ``offset`` is a UTF-8 byte offset, line/column are 1-based."""

    def __init__(self, kind: str, message: str, src: str, index: int):
        self.kind = kind
        self.index = index
        self.offset = len(src[:index].encode("utf-8"))
        self.line = src.count("\n", 0, index) + 1
        self.column = index - (src.rfind("\n", 0, index) + 1) + 1
        self.detail = message
        super().__init__(f"{kind} at line {self.line}, column {self.column}: {message}")


class EvalError(ArithmeticError):
    """Expression undefined at the requested point."""


# -- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


def Pow(a, b):
    return BinOp("^", a, b)


def variable_names(m: int) -> dict[str, int]:
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return {"x": 0, "y": 1, "z": 2}
    names = {f"x{i + 1}": i for i in range(m)}
    names.update({f"y{i + 1}": m + i for i in range(m)})
    names["z"] = 2 * m
    return names


# -- lexer ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    index: int


def tokenize(src: str) -> list[Token]:
    tokens = []
    i = 0
    while i < len(src):
        mt = _TOKEN_RE.match(src, i)
        if mt is None:
            raise ParseError("lexical error", f"unexpected character {src[i]!r}", src, i)
        kind = mt.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, mt.group(), i))
        i = mt.end()
    tokens.append(Token("end", "", len(src)))
    return tokens


# -- parser ---------------------------------------------------------------


class _Parser:
    def __init__(self, src: str, m: int):
        self.src = src
        self.names = variable_names(m)
        self.tokens = tokenize(src)
        self.pos = 0
        self.open_parens: list[int] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, kind: str, message: str, index: int | None = None):
        return ParseError(kind, message, self.src, self.tok.index if index is None else index)

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error("syntax error", "empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            if self.tok.text == ")":
                raise self.error("unbalanced parentheses", "unmatched ')'")
            raise self.error("syntax error", f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            value = float(t.text)
            if not math.isfinite(value):
                raise self.error("lexical error", f"numeric literal {t.text!r} out of range", t.index)
            return Num(value)
        if t.kind == "ident":
            self.advance()
            if t.text in FUNCTIONS:
                return self.call(t)
            if t.text in self.names:
                if self.tok.kind == "op" and self.tok.text == "(":
                    raise self.error("arity error", f"{t.text!r} is a variable, not a function", t.index)
                return Var(t.text, self.names[t.text])
            raise self.error("unknown identifier", f"{t.text!r}", t.index)
        if t.kind == "op" and t.text == "(":
            self.advance()
            self.open_parens.append(t.index)
            node = self.expr()
            self.close_paren()
            return node
        if t.kind == "end":
            if self.open_parens:
                raise self.error("unbalanced parentheses", "'(' is never closed", self.open_parens[-1])
            raise self.error("syntax error", "unexpected end of input")
        if t.text == ")":
            raise self.error("unbalanced parentheses", "unmatched ')'")
        raise self.error("syntax error", f"unexpected {t.text!r}")

    def close_paren(self):
        if self.tok.kind == "op" and self.tok.text == ")":
            self.advance()
            self.open_parens.pop()
            return
        if self.tok.kind == "end":
            raise self.error("unbalanced parentheses", "'(' is never closed", self.open_parens[-1])
        raise self.error("syntax error", f"expected ')' but found {self.tok.text!r}")

    def call(self, name_tok: Token) -> Expr:
        if not (self.tok.kind == "op" and self.tok.text == "("):
            raise self.error("arity error", f"function {name_tok.text!r} requires one argument", name_tok.index)
        open_tok = self.advance()
        if self.tok.kind == "op" and self.tok.text == ")":
            raise self.error("arity error", f"{name_tok.text}() takes 1 argument, got 0", name_tok.index)
        self.open_parens.append(open_tok.index)
        arg = self.expr()
        nargs = 1
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            self.expr()
            nargs += 1
        if nargs != 1:
            raise self.error("arity error", f"{name_tok.text}() takes 1 argument, got {nargs}", name_tok.index)
        self.close_paren()
        return Call(name_tok.text, arg)


def parse(src: str, m: int = 1) -> Expr:
    """Parse ``src`` into an expression tree over the chart variables for ``m``."""
    if not isinstance(src, str):
        raise TypeError("source must be a string")
    return _Parser(src, m).parse()


# -- printing -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    if isinstance(e, Num) and e.value < 0:
        return 0
    return _ATOM


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_source(e: Expr) -> str:
    """Canonical source; ``parse(to_source(e)) == e`` for parsed trees."""
    if isinstance(e, Num):
        s = _fmt_num(abs(e.value))
        return f"(-{s})" if e.value < 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if _prec(e.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[e.op]
    left, right = to_source(e.left), to_source(e.right)
    if e.op == "^":
        if _prec(e.left) <= p:
            left = f"({left})"
        if _prec(e.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    sep = " " if p == 1 else ""
    return f"{left}{sep}{e.op}{sep}{right}"


# -- evaluation -----------------------------------------------------------


def _integer_exponent(e: Expr) -> int | None:
    # variable-free exponents are folded so 2^(3^2) stays an exact integer power
    if variables(e):
        return None
    try:
        v = _eval(e, [], FloatOps, float)
    except (EvalError, OverflowError, ZeroDivisionError):
        return None
    if math.isfinite(v) and v.is_integer() and abs(v) <= 64:
        return int(v)
    return None


class FloatOps:
    """Plain float evaluation with explicit domain checks."""

    @staticmethod
    def lift(v):
        return float(v)

    @staticmethod
    def div(a, b):
        if abs(b) < 1e-300:
            raise EvalError("division by a value below 1e-300")
        return a / b

    @staticmethod
    def powi(a, n):
        if n < 0 and abs(a) < 1e-300:
            raise EvalError("negative power of zero")
        return a**n

    @staticmethod
    def powr(a, r):
        if a <= 0.0:
            raise EvalError(f"real power of non-positive base {a!r}")
        return math.exp(r * math.log(a))

    @staticmethod
    def call(name, a):
        if name == "log" and a <= 0.0:
            raise EvalError(f"log of non-positive value {a!r}")
        if name == "sqrt" and a < 0.0:
            raise EvalError(f"sqrt of negative value {a!r}")
        try:
            return getattr(math, name)(a)
        except OverflowError as exc:
            raise EvalError(f"{name} overflow") from exc


class JetOps:
    @staticmethod
    def div(a, b):
        return a / b

    @staticmethod
    def powi(a, n):
        return jets.powi(a, n)

    @staticmethod
    def powr(a, r):
        return jets.powr(a, r)

    @staticmethod
    def call(name, a):
        return getattr(jets, name)(a)


class JaxOps:
    """Traceable evaluation; partiality is detected afterwards by finiteness checks."""

    @staticmethod
    def div(a, b):
        return a / b

    @staticmethod
    def powi(a, n):
        return a**n

    @staticmethod
    def powr(a, r):
        import jax.numpy as jnp

        return jnp.exp(r * jnp.log(a))

    @staticmethod
    def call(name, a):
        import jax.numpy as jnp

        return getattr(jnp, name)(a)


def _eval(e: Expr, coords, ops, const):
    if isinstance(e, Num):
        return const(e.value)
    if isinstance(e, Var):
        return coords[e.index]
    if isinstance(e, Neg):
        return -_eval(e.operand, coords, ops, const)
    if isinstance(e, Call):
        return ops.call(e.func, _eval(e.arg, coords, ops, const))
    a = _eval(e.left, coords, ops, const)
    if e.op == "^":
        n = _integer_exponent(e.right)
        if n is not None:
            return ops.powi(a, n)
        return ops.powr(a, _eval(e.right, coords, ops, const))
    b = _eval(e.right, coords, ops, const)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    return ops.div(a, b)


def _check_dim(e: Expr, n: int):
    for v in variables(e):
        if v.index >= n:
            raise EvalError(f"variable {v.name} outside a point of dimension {n}")


def variables(e: Expr) -> set[Var]:
    if isinstance(e, Var):
        return {e}
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, Call):
        return variables(e.arg)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    return set()


def evaluate(e: Expr, p) -> float:
    coords = [float(c) for c in p]
    _check_dim(e, len(coords))
    try:
        out = _eval(e, coords, FloatOps, float)
    except (OverflowError, ZeroDivisionError) as exc:
        raise EvalError(str(exc)) from exc
    if not math.isfinite(out):
        raise EvalError("non-finite value")
    return out


def eval_jet(e: Expr, p, order: int = 1, direction=None) -> Jet3:
    """Taylor jet of ``t -> e(p + t * direction)`` up to ``order`` (0..3)."""
    if not 0 <= order <= jets.MAX_ORDER:
        raise ValueError("order must be in 0..3")
    pts = [float(c) for c in p]
    _check_dim(e, len(pts))
    if direction is None:
        direction = [0.0] * len(pts)
    coords = [Jet3.variable(c, float(d), order) for c, d in zip(pts, direction)]
    try:
        out = _eval(e, coords, JetOps, lambda v: Jet3.constant(v, order))
    except JetDomainError as exc:
        raise EvalError(str(exc)) from exc
    except (OverflowError, ZeroDivisionError) as exc:
        raise EvalError(str(exc)) from exc
    if not all(math.isfinite(c) for c in out.coeffs):
        raise EvalError("non-finite jet coefficient")
    return out


def jet_gradient(e: Expr, p) -> list[float]:
    """Coordinate gradient from first-order jets along each axis."""
    n = len(p)
    return [eval_jet(e, p, 1, [1.0 if j == i else 0.0 for j in range(n)]).derivative(1) for i in range(n)]


def compile_jax(e: Expr):
    """Return ``p -> value`` built from jax.numpy primitives (traceable)."""

    def fn(p):
        return _eval(e, p, JaxOps, lambda v: v)

    return fn
