"""Expression language for holomorphic functions of ``z`` and ``t``.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER ['i'] | 'i' | 'z' | 't' | NAME
            | ('exp' | 'log' | 'sqrt') '(' expr ')' | '(' expr ')'

Any other identifier is a named parameter. There is deliberately no
conjugation, so every expression is holomorphic in ``z`` away from branch
cuts (principal branches throughout).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import HALF_PLANE, Domain, HoloMap
from .errors import DSLSyntaxError, EvaluationError, SingularityError, UnboundParameterError

FUNCTIONS = ("exp", "log", "sqrt")
VARIABLES = ("z", "t")
INT_POW_TOL = 1e-12
INT_POW_MAX = 16


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tok = None
        self.tok_start = 0
        self._advance()

    def _error(self, msg, expected):
        offset = len(self.text[: self.tok_start].encode("utf-8"))
        raise DSLSyntaxError(msg, self.text, offset, expected)

    def _advance(self):
        m = _TOKEN.match(self.text, self.pos)
        rest = self.text[self.pos:]
        if not rest.strip():
            self.tok_start = len(self.text)
            self.tok = ("end", None)
            self.pos = len(self.text)
            return
        if m is None or m.end() == self.pos:
            self.tok_start = self.pos + (len(rest) - len(rest.lstrip()))
            self.tok = ("bad", rest.lstrip()[:1])
            return
        self.tok_start = m.start(m.lastgroup if m.lastgroup != "imag" else "num")
        self.pos = m.end()
        if m.group("num") is not None:
            v = float(m.group("num"))
            self.tok = ("num", complex(0, v) if m.group("imag") else complex(v))
        elif m.group("name") is not None:
            self.tok = ("name", m.group("name"))
        else:
            self.tok = ("op", m.group("op"))

    def _is_op(self, ch):
        return self.tok[0] == "op" and self.tok[1] == ch

    def _expect(self, ch):
        if not self._is_op(ch):
            self._error(f"unexpected {self._describe()}", [repr(ch)])
        self._advance()

    def _describe(self):
        kind, val = self.tok
        if kind == "end":
            return "end of input"
        return f"{val!r}" if kind != "num" else "number"

    def parse(self) -> Expr:
        if not self.text.strip():
            self._error("empty expression", ["expression"])
        e = self.expr()
        if self.tok[0] != "end":
            self._error(f"unexpected {self._describe()}", ["'+'", "'-'", "'*'", "'/'", "'^'", "end"])
        return e

    def expr(self):
        left = self.term()
        while self._is_op("+") or self._is_op("-"):
            op = self.tok[1]
            self._advance()
            left = Bin(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self._is_op("*") or self._is_op("/"):
            op = self.tok[1]
            self._advance()
            left = Bin(op, left, self.unary())
        return left

    def unary(self):
        if self._is_op("-"):
            self._advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self._is_op("^"):
            self._advance()
            return Bin("^", base, self.unary())
        return base

    _ATOM_START = ["number", "identifier", "'('", "'-'"]

    def atom(self):
        kind, val = self.tok
        if kind == "num":
            self._advance()
            return Num(val)
        if kind == "name":
            self._advance()
            if val in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(val, arg)
            if val == "i":
                return Num(1j)
            if val in VARIABLES:
                return Var(val)
            return Param(val)
        if self._is_op("("):
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        self._error(f"unexpected {self._describe()}", self._ATOM_START)


def parse(text: str) -> Expr:
    return _Parser(text).parse()


# ---------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Num):
        v = e.value
        if (v.real != 0 and v.imag != 0) or v.real < 0 or v.imag < 0 or (v.real == 0 and v.imag == 0 and str(v.real).startswith("-")):
            return 0
    return 5


def _fmt_num(v: complex) -> str:
    if v.imag == 0:
        return repr(abs(v.real)) if v.real >= 0 else f"-{repr(-v.real)}"
    if v.real == 0:
        return f"{repr(abs(v.imag))}i" if v.imag > 0 else f"-{repr(-v.imag)}i"
    sign = "+" if v.imag >= 0 else "-"
    return f"{repr(v.real)} {sign} {repr(abs(v.imag))}i"


def to_string(e: Expr) -> str:
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return f"({s})" if _prec(e) == 0 else s
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 3 else f"-({inner})"
    p = _PREC[e.op]
    ls, rs = to_string(e.left), to_string(e.right)
    if e.op == "^":
        if _prec(e.left) <= 4:
            ls = f"({ls})"
        if _prec(e.right) < 3:
            rs = f"({rs})"
        return f"{ls}^{rs}"
    if _prec(e.left) < p:
        ls = f"({ls})"
    if _prec(e.right) <= p:
        rs = f"({rs})"
    return f"{ls} {e.op} {rs}" if p == 1 else f"{ls}*{rs}" if e.op == "*" else f"{ls}/{rs}"


Expr.__str__ = lambda self: to_string(self)


# ---------------------------------------------------------------- evaluation


def free_parameters(e: Expr) -> set:
    if isinstance(e, Param):
        return {e.name}
    if isinstance(e, (Neg, Call)):
        return free_parameters(e.arg)
    if isinstance(e, Bin):
        return free_parameters(e.left) | free_parameters(e.right)
    return set()


def depends_on(e: Expr, var: str) -> bool:
    if isinstance(e, Var):
        return e.name == var
    if isinstance(e, (Neg, Call)):
        return depends_on(e.arg, var)
    if isinstance(e, Bin):
        return depends_on(e.left, var) or depends_on(e.right, var)
    return False


def _int_exponent(w):
    if np.ndim(w) != 0:
        return None
    w = complex(w)
    n = round(w.real)
    if abs(w - n) <= INT_POW_TOL and abs(n) <= INT_POW_MAX:
        return int(n)
    return None


def _ipow(b, n: int):
    if n == 0:
        return np.ones_like(b)
    acc = None
    base = b
    m = abs(n)
    while m:
        if m & 1:
            acc = base if acc is None else acc * base
        m >>= 1
        if m:
            base = base * base
    return 1.0 / acc if n < 0 else acc


def _has_zero(a) -> bool:
    return bool(np.any(np.asarray(a) == 0))


def _ev(e: Expr, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundParameterError(f"variable {e.name!r} is not bound")
        return env[e.name]
    if isinstance(e, Param):
        if e.name not in env:
            raise UnboundParameterError(f"parameter {e.name!r} is not bound")
        return env[e.name]
    if isinstance(e, Neg):
        return -_ev(e.arg, env)
    if isinstance(e, Call):
        a = _ev(e.arg, env)
        if e.fn == "exp":
            return np.exp(a)
        if _has_zero(a):
            raise SingularityError(f"{e.fn} evaluated at 0")
        return np.log(a) if e.fn == "log" else np.sqrt(a)
    a = _ev(e.left, env)
    b = _ev(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return a / b
    n = _int_exponent(b)
    if n is not None:
        return _ipow(np.asarray(a, dtype=complex), n)
    if _has_zero(a):
        raise SingularityError("non-integer power evaluated at 0")
    return np.exp(b * np.log(a))


def evaluate(e: Expr, bindings: Mapping):
    env = {k: (np.asarray(v, dtype=complex) if np.ndim(v) else complex(v)) for k, v in bindings.items()}
    with np.errstate(all="ignore"):
        out = _ev(e, env)
    out = np.asarray(out, dtype=complex)
    if out.ndim == 0:
        return complex(out)
    return out


# alias kept for callers that prefer the longer name
eval_expr = evaluate


# ---------------------------------------------------------------- differentiation

ZERO = Num(0)
ONE = Num(1)


def _is(e, v):
    return isinstance(e, Num) and e.value == v


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Bin("+", a, b)


def sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    return Bin("-", a, b)


def mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
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
    return Bin("*", a, b)


def div(a, b):
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    if _is(a, 0):
        return ZERO
    if _is(b, 1):
        return a
    return Bin("/", a, b)


def power(a, b):
    if _is(b, 1):
        return a
    if _is(b, 0):
        return ONE
    return Bin("^", a, b)


def differentiate(e: Expr, var: str = "z") -> Expr:
    if var not in VARIABLES:
        raise ValueError("can only differentiate with respect to z or t")
    if isinstance(e, (Num, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, var))
    if isinstance(e, Call):
        du = differentiate(e.arg, var)
        if _is(du, 0):
            return ZERO
        if e.fn == "exp":
            return mul(e, du)
        if e.fn == "log":
            return div(du, e.arg)
        return div(du, mul(Num(2), e))
    u, v = e.left, e.right
    du, dv = differentiate(u, var), differentiate(v, var)
    if e.op == "+":
        return add(du, dv)
    if e.op == "-":
        return sub(du, dv)
    if e.op == "*":
        return add(mul(du, v), mul(u, dv))
    if e.op == "/":
        return div(sub(mul(du, v), mul(u, dv)), power(v, Num(2)))
    if not depends_on(v, var):
        if _is(du, 0):
            return ZERO
        return mul(mul(v, power(u, sub(v, ONE))), du)
    # general case: u^v = exp(v log u)
    return mul(e, add(mul(dv, Call("log", u)), div(mul(v, du), u)))


# ---------------------------------------------------------------- adapters


def _as_expr(e) -> Expr:
    return parse(e) if isinstance(e, str) else e


def compile_expr(e, params: Mapping | None = None, t: float | None = None):
    """Return a vectorized callable.

    With ``t`` given the callable takes ``z`` only; otherwise ``(z, t)``.
    """
    e = _as_expr(e)
    params = dict(params or {})
    missing = free_parameters(e) - set(params)
    if missing:
        raise UnboundParameterError(f"unbound parameter(s): {', '.join(sorted(missing))}")
    if t is not None:
        return lambda z: evaluate(e, {**params, "z": z, "t": t})
    return lambda z, tt=0.0: evaluate(e, {**params, "z": z, "t": tt})


def holomap_from_expr(e, params: Mapping | None = None, domain: Domain = HALF_PLANE,
                      t: float = 0.0, name: str | None = None) -> HoloMap:
    """HoloMap with symbolic first three derivatives."""
    e = _as_expr(e)
    d1 = differentiate(e)
    d2 = differentiate(d1)
    d3 = differentiate(d2)

    def wrap(x):
        f = compile_expr(x, params, t)
        return lambda z: _finite(f(z))

    return HoloMap(wrap(e), domain, wrap(d1), wrap(d2), wrap(d3), name=name or to_string(e))


def _finite(w):
    if not np.all(np.isfinite(w)):
        raise EvaluationError("expression evaluated to a non-finite value")
    return w
