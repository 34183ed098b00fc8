"""Small expression language for frame components.

Grammar (whitespace insignificant)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

so ``^`` binds tighter than unary minus, which binds tighter than ``*``/``/``.
``^`` is right associative.

Expressions evaluate over plain floats, :class:`Dual` numbers (one directional
derivative) or :class:`Jet` values (full gradient and Hessian).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifier(ParseError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the domain of an elementary function."""

    def __init__(self, message: str, point: Mapping[str, float] | None = None):
        if point:
            where = ", ".join(f"{k}={v!r}" for k, v in point.items())
            message = f"{message} at ({where})"
        super().__init__(message)
        self.point = dict(point) if point else None


# --------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError("Num literals are finite and non-negative; use Neg")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str  # 'pi' or 'e'


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Const, Neg, BinOp, Call]

CONSTANTS = {"pi": math.pi, "e": math.e}


def _need_nonzero(value: float, what: str):
    if abs(value) <= 1e-14:
        raise DomainError(f"{what} is singular")


def _f_tan(x):
    _need_nonzero(math.cos(x), "tan")
    return math.tan(x)


def _f_cot(x):
    _need_nonzero(math.sin(x), "cot")
    return math.cos(x) / math.sin(x)


def _f_sec(x):
    _need_nonzero(math.cos(x), "sec")
    return 1.0 / math.cos(x)


def _f_csc(x):
    _need_nonzero(math.sin(x), "csc")
    return 1.0 / math.sin(x)


def _f_log(x):
    if x <= 0:
        raise DomainError("log of non-positive value")
    return math.log(x)


def _f_sqrt(x):
    if x < 0:
        raise DomainError("sqrt of negative value")
    return math.sqrt(x)


def _f_sqrt_d(x):
    if x <= 0:
        raise DomainError("sqrt is not differentiable at non-positive values")
    return 0.5 / math.sqrt(x)


# name -> (f, f', f'')
FUNCTIONS: dict[str, tuple[Callable[[float], float], ...]] = {
    "sin": (math.sin, math.cos, lambda x: -math.sin(x)),
    "cos": (math.cos, lambda x: -math.sin(x), lambda x: -math.cos(x)),
    "tan": (_f_tan, lambda x: _f_sec(x) ** 2, lambda x: 2 * _f_sec(x) ** 2 * _f_tan(x)),
    "cot": (_f_cot, lambda x: -_f_csc(x) ** 2, lambda x: 2 * _f_csc(x) ** 2 * _f_cot(x)),
    "sec": (_f_sec, lambda x: _f_sec(x) * _f_tan(x),
            lambda x: _f_sec(x) * (_f_tan(x) ** 2 + _f_sec(x) ** 2)),
    "csc": (_f_csc, lambda x: -_f_csc(x) * _f_cot(x),
            lambda x: _f_csc(x) * (_f_cot(x) ** 2 + _f_csc(x) ** 2)),
    "exp": (math.exp, math.exp, math.exp),
    "log": (_f_log, lambda x: 1.0 / x, lambda x: -1.0 / (x * x)),
    "sqrt": (_f_sqrt, _f_sqrt_d, lambda x: -0.25 * x ** -1.5),
    "sinh": (math.sinh, math.cosh, math.sinh),
    "cosh": (math.cosh, math.sinh, math.cosh),
    "tanh": (math.tanh, lambda x: 1 - math.tanh(x) ** 2,
             lambda x: -2 * math.tanh(x) * (1 - math.tanh(x) ** 2)),
}

RESERVED = frozenset(FUNCTIONS) | frozenset(CONSTANTS)


# ------------------------------------------------------------------ parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


class _Parser:
    def __init__(self, source: str, variables: Iterable[str] | None):
        self.src = source
        self.vars = None if variables is None else frozenset(variables)
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            if source[pos:].strip() == "":
                break
            m = _TOKEN.match(source, pos)
            if m is None or m.end() == pos:
                start = pos + len(source[pos:]) - len(source[pos:].lstrip())
                raise ParseError(f"unexpected character {source[start]!r}", self._bytes(start))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("eof", "", len(source)))
        self.i = 0

    def _bytes(self, index: int) -> int:
        return len(self.src[:index].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text or kind != "op":
            found = "end of input" if kind == "eof" else repr(val)
            raise ParseError(f"expected {text!r}, found {found}", self._bytes(pos))

    def error(self, message: str):
        raise ParseError(message, self._bytes(self.peek()[2]))

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {val!r}", self._bytes(pos))
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[0:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek()[0:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                if self.peek()[0:2] != ("op", "("):
                    self.error(f"function {val!r} needs a parenthesised argument")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in CONSTANTS:
                return Const(val)
            if self.vars is not None and val not in self.vars:
                raise UnknownIdentifier(val, self._bytes(pos))
            return Var(val)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "eof" else repr(val)
        raise ParseError(f"unexpected {found}", self._bytes(pos))


def parse(source: str, variables: Iterable[str] | None = None) -> Expr:
    """Parse ``source``. If ``variables`` is given, other names are rejected."""
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    return _Parser(source, variables).parse()


# ----------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY, _POWER, _ATOM = 3, 4, 5


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _POWER if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY
    return _ATOM


def to_text(node: Expr) -> str:
    """Render with the minimal parentheses needed to parse back to ``node``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return "-" + (f"({inner})" if _prec(node.arg) < _UNARY else inner)
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) < _ATOM:
            left = f"({left})"
        if _prec(node.right) < _UNARY:
            right = f"({right})"
        return f"{left}^{right}"
    p = _PREC[node.op]
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


def variables_of(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return variables_of(node.arg)
    if isinstance(node, BinOp):
        return variables_of(node.left) | variables_of(node.right)
    return set()


def is_constant(node: Expr) -> bool:
    return not variables_of(node)


def product(factor: Expr, node: Expr) -> Expr:
    """``factor * node`` with the trivial cases folded."""
    if node == Num(0.0) or factor == Num(1.0):
        return node
    return BinOp("*", factor, node)


# ----------------------------------------------------------- number types


@dataclass(frozen=True)
class Dual:
    """Dual number ``primal + tangent*eps`` (one directional derivative)."""

    primal: float
    tangent: float

    def apply(self, f, df, d2f=None) -> "Dual":
        return Dual(f(self.primal), df(self.primal) * self.tangent)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.primal + other.primal, self.tangent + other.tangent)
        return Dual(self.primal + other, self.tangent)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.primal, -self.tangent)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.primal * other.primal,
                        self.primal * other.tangent + self.tangent * other.primal)
        return Dual(self.primal * other, self.tangent * other)

    __rmul__ = __mul__


class Jet:
    """Second-order multivariate Taylor jet: value, gradient and Hessian."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = value
        self.grad = grad
        self.hess = hess

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "Jet":
        g = np.zeros(n)
        g[index] = 1.0
        return cls(float(value), g, np.zeros((n, n)))

    @property
    def primal(self) -> float:
        return self.value

    def apply(self, f, df, d2f) -> "Jet":
        a = self.value
        d1 = df(a)
        d2 = d2f(a)
        return Jet(f(a), d1 * self.grad,
                   d1 * self.hess + d2 * np.outer(self.grad, self.grad))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value, self.grad + other.grad,
                       self.hess + other.hess)
        return Jet(self.value + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            cross = np.outer(self.grad, other.grad)
            return Jet(self.value * other.value,
                       self.value * other.grad + other.value * self.grad,
                       self.value * other.hess + other.value * self.hess
                       + cross + cross.T)
        return Jet(self.value * other, self.grad * other, self.hess * other)

    __rmul__ = __mul__


Number = Union[float, Dual, Jet]


def _primal(x: Number) -> float:
    return x if isinstance(x, float) else x.primal


def _reciprocal(x: Number) -> Number:
    if _primal(x) == 0.0:
        raise DomainError("division by zero")
    if isinstance(x, float):
        return 1.0 / x
    return x.apply(lambda a: 1.0 / a, lambda a: -1.0 / (a * a),
                   lambda a: 2.0 / (a * a * a))


def _power(base: Number, exponent: Number) -> Number:
    b = _primal(base)
    if isinstance(exponent, float):
        p = exponent
        integral = p == int(p)
        if b < 0 and not integral:
            raise DomainError("non-integer power of a negative base")
        if b == 0 and p < 0:
            raise DomainError("division by zero")
        if isinstance(base, float):
            return base ** p
        if p == 0:
            return 1.0

        def d1(a):
            return p * a ** (p - 1) if p != 1 else 1.0

        def d2(a):
            if p == 1:
                return 0.0
            if p == 2:
                return 2.0
            return p * (p - 1) * a ** (p - 2)

        return base.apply(lambda a: a ** p, d1, d2)
    # variable exponent: x^y = exp(y log x), defined for x > 0 only
    if b <= 0:
        raise DomainError("variable exponent needs a positive base")
    return _call("exp", exponent * _call("log", base))


def _call(name: str, x: Number) -> Number:
    f, df, d2f = FUNCTIONS[name]
    if isinstance(x, float):
        return f(x)
    f(x.primal)  # domain check
    return x.apply(f, df, d2f)


def _eval(node: Expr, env: Mapping[str, Number]) -> Number:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise ExprError(f"variable {node.name!r} is not bound") from None
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval(node.arg, env)
    if isinstance(node, Call):
        return _call(node.func, _eval(node.arg, env))
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    op = node.op
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if isinstance(right, float):
            if right == 0.0:
                raise DomainError("division by zero")
            return left * (1.0 / right)
        return left * _reciprocal(right)
    return _power(left, right)


def evaluate_number(node: Expr, env: Mapping[str, Number]) -> Number:
    """Evaluate over any supported number type; domain errors carry the point."""
    try:
        value = _eval(node, env)
    except DomainError as exc:
        if exc.point is not None:
            raise
        point = {k: _primal(v) for k, v in env.items()}
        raise DomainError(str(exc), point) from None
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        point = {k: _primal(v) for k, v in env.items()}
        raise DomainError(str(exc), point) from None
    return value


def evaluate(node: Expr, point: Mapping[str, float]) -> float:
    value = evaluate_number(node, {k: float(v) for k, v in point.items()})
    return float(value) if isinstance(value, float) else value.primal


def eval_dual(node: Expr, point: Mapping[str, float],
              direction: Mapping[str, float]) -> Dual:
    """Value and directional derivative along ``direction`` (name -> component)."""
    env = {k: Dual(float(v), float(direction.get(k, 0.0))) for k, v in point.items()}
    value = evaluate_number(node, env)
    if isinstance(value, float):
        return Dual(value, 0.0)
    return value


def eval_jet(node: Expr, names: tuple[str, ...], coords: np.ndarray) -> Jet:
    """Value, gradient and Hessian with respect to the coordinates ``names``."""
    n = len(names)
    env = {name: Jet.variable(coords[i], i, n) for i, name in enumerate(names)}
    value = evaluate_number(node, env)
    if isinstance(value, float):
        return Jet(value, np.zeros(n), np.zeros((n, n)))
    return value
