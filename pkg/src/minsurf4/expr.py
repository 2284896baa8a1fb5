"""Holomorphic expressions: parsing, rendering and forward-mode evaluation.

Expressions are parsed into a small immutable tree and evaluated on complex
numbers (or numpy arrays of them) as :class:`Jet` pairs carrying the value
and the exact first derivative.  Singular evaluations never leak ``inf`` or
``nan`` to the caller: scalar evaluation raises :class:`SingularityError`,
array evaluation returns a per-element singularity code.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | 'z' | 'i' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Num", "Var", "Const", "Neg", "BinOp", "Call", "Node",
    "ExprError", "ParseError", "UnknownIdentifierError", "SingularityError",
    "Jet", "HoloFn", "parse", "render", "compose", "eval_jet", "eval_jet_array",
    "FUNCTIONS", "CONSTANTS", "EPS_POLE",
    "OK", "POLE", "BRANCH_POINT", "NONFINITE", "DERIVATIVE_ZERO", "KIND_NAMES",
]

EPS_POLE = 1e-300
MAX_DEPTH = 100
_MAX_INT_EXPONENT = 2**31

FUNCTIONS = ("exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh")
CONSTANTS = {"i": 1j, "pi": math.pi, "e": math.e}

# singularity codes used by array evaluation
OK, POLE, BRANCH_POINT, NONFINITE, DERIVATIVE_ZERO = 0, 1, 2, 3, 4
KIND_NAMES = {
    POLE: "pole",
    BRANCH_POINT: "branch point",
    NONFINITE: "non-finite value",
    DERIVATIVE_ZERO: "derivative zero",
}


# --------------------------------------------------------------------------
# tree

@dataclass(frozen=True)
class Num:
    """Non-negative real literal; signs are carried by :class:`Neg`."""
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Const, Neg, BinOp, Call]


# --------------------------------------------------------------------------
# errors

class ExprError(ValueError):
    """Base class for malformed expressions."""

    def __init__(self, message, offset, expected=()):
        self.message = message
        self.offset = offset
        self.expected = tuple(expected)
        text = f"{message} at offset {offset}"
        if self.expected:
            text += ", expected " + " or ".join(self.expected)
        super().__init__(text)


class ParseError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class SingularityError(ArithmeticError):
    """Evaluation hit a pole, a branch point or a critical point."""

    def __init__(self, kind, z, source=None, which=None):
        self.kind = kind
        self.z = complex(z)
        self.source = source
        self.which = which
        where = f" of {which}" if which else ""
        expr = f" '{source}'" if source else ""
        super().__init__(f"{kind}{where}{expr} at z = {self.z!r}")


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE | re.ASCII,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'num', 'ident', 'op', 'end'
    text: str
    pos: int


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = self._tokenize(text)
        self.k = 0
        self.depth = 0

    def offset(self, pos):
        return len(self.text[:pos].encode("utf-8"))

    def error(self, message, tok, expected=(), cls=ParseError):
        return cls(message, self.offset(tok.pos), expected)

    def _tokenize(self, text):
        toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}",
                                 self.offset(pos), ("expression",))
            if m.lastgroup != "ws":
                toks.append(_Tok(m.lastgroup, m.group(), pos))
            pos = m.end()
        toks.append(_Tok("end", "", len(text)))
        return toks

    @property
    def tok(self):
        return self.tokens[self.k]

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.k += 1
            return True
        return False

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}", self.tok,
                             ("operator", "end of input"))
        return node

    def deeper(self):
        # tree depth along the current path, operator chains included
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("expression nested too deeply", self.tok)

    def chain(self, ops, operand):
        start = self.depth
        node = operand()
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.tok.text
            self.deeper()
            self.k += 1
            node = BinOp(op, node, operand())
        self.depth = start
        return node

    def expr(self):
        return self.chain("+-", self.term)

    def term(self):
        return self.chain("*/", self.factor)

    def factor(self):
        start = self.depth
        self.deeper()
        if self.accept("-"):
            node = Neg(self.factor())
        else:
            node = self.power()
        self.depth = start
        return node

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error("numeric literal out of range", tok)
            self.k += 1
            return Num(value)
        if tok.kind == "ident":
            self.k += 1
            if tok.text == "z":
                return Var()
            if tok.text in CONSTANTS:
                return Const(tok.text)
            if tok.text in FUNCTIONS:
                if not self.accept("("):
                    raise self.error(f"function {tok.text!r} needs an argument",
                                     self.tok, ("'('",))
                arg = self.expr()
                if not self.accept(")"):
                    raise self.error("unclosed call", self.tok, ("')'",))
                return Call(tok.text, arg)
            raise self.error(f"unknown identifier {tok.text!r}", tok,
                             cls=UnknownIdentifierError)
        if self.accept("("):
            node = self.expr()
            if not self.accept(")"):
                raise self.error("unclosed parenthesis", self.tok, ("')'",))
            return node
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise self.error(f"unexpected {what}", tok, ("expression",))


def parse(text: Union[str, bytes]) -> Node:
    """Parse ``text`` into an expression tree.

    Raises :class:`ParseError` or :class:`UnknownIdentifierError`, both
    carrying the byte offset of the offending token.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("invalid UTF-8", exc.start, ("expression",)) from None
    if not text.strip():
        raise ParseError("empty expression", len(text.encode("utf-8")), ("expression",))
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# rendering

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node):
    if isinstance(node, BinOp):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL,
                "^": _PREC_POW}[node.op]
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(node, min_prec):
    s = render(node)
    return f"({s})" if _prec(node) < min_prec else s


def render(node: Node) -> str:
    """Render a tree as text that parses back to the identical tree."""
    if isinstance(node, Num):
        v = float(node.value)
        return str(int(v)) if v.is_integer() and v < 1e15 else repr(v)
    if isinstance(node, Var):
        return "z"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({render(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _PREC_NEG)
    if node.op == "^":
        return _wrap(node.left, _PREC_ATOM) + "^" + _wrap(node.right, _PREC_NEG)
    p = _prec(node)
    sep = f" {node.op} " if p == _PREC_ADD else node.op
    return _wrap(node.left, p) + sep + _wrap(node.right, p + 1)


def compose(outer: Node, inner: Node) -> Node:
    """Substitute ``inner`` for every occurrence of ``z`` in ``outer``."""
    if isinstance(outer, Var):
        return inner
    if isinstance(outer, Neg):
        return Neg(compose(outer.operand, inner))
    if isinstance(outer, BinOp):
        return BinOp(outer.op, compose(outer.left, inner), compose(outer.right, inner))
    if isinstance(outer, Call):
        return Call(outer.func, compose(outer.arg, inner))
    return outer


def _has_var(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _has_var(node.operand)
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    if isinstance(node, Call):
        return _has_var(node.arg)
    return False


# --------------------------------------------------------------------------
# jets

@dataclass(frozen=True)
class Jet:
    """Value and first derivative of a holomorphic function at a point.

    Fields may be Python complex numbers or complex numpy arrays of a common
    shape.  Arithmetic follows the sum, product and quotient rules; no
    singularity checks are made here.
    """

    value: complex
    deriv: complex

    @classmethod
    def variable(cls, z):
        return cls(z, np.ones_like(z) if isinstance(z, np.ndarray) else 1.0 + 0j)

    @classmethod
    def constant(cls, c, like=None):
        if isinstance(like, np.ndarray):
            return cls(np.full(like.shape, c, dtype=complex),
                       np.zeros(like.shape, dtype=complex))
        return cls(complex(c), 0j)

    def _lift(self, other):
        return other if isinstance(other, Jet) else Jet.constant(other, self.value)

    def __add__(self, other):
        other = self._lift(other)
        return Jet(self.value + other.value, self.deriv + other.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._lift(other)
        return Jet(self.value - other.value, self.deriv - other.deriv)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Jet(-self.value, -self.deriv)

    def __mul__(self, other):
        other = self._lift(other)
        return Jet(self.value * other.value,
                   self.deriv * other.value + self.value * other.deriv)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        q = self.value / other.value
        return Jet(q, (self.deriv - q * other.deriv) / other.value)

    def __rtruediv__(self, other):
        return self._lift(other) / self


# --------------------------------------------------------------------------
# evaluation

class _Evaluator:
    """Evaluate a tree on a complex array, recording the first singularity."""

    def __init__(self, z: np.ndarray):
        self.z = z
        self.code = np.zeros(z.shape, dtype=np.int8)

    def flag(self, cond, kind):
        np.copyto(self.code, np.int8(kind), where=(self.code == OK) & cond)

    def finite(self, jet):
        bad = ~(np.isfinite(jet.value) & np.isfinite(jet.deriv))
        self.flag(bad, NONFINITE)
        return jet

    def reciprocal(self, den: Jet) -> Jet:
        self.flag(np.abs(den.value) < EPS_POLE, POLE)
        return Jet.constant(1.0, self.z) / den

    def __call__(self, node) -> Jet:
        return self.finite(self.visit(node))

    def visit(self, node):
        z = self.z
        if isinstance(node, Num):
            return Jet.constant(node.value, z)
        if isinstance(node, Var):
            return Jet.variable(z)
        if isinstance(node, Const):
            return Jet.constant(CONSTANTS[node.name], z)
        if isinstance(node, Neg):
            return -self(node.operand)
        if isinstance(node, Call):
            return self.call(node.func, self(node.arg))
        a = self(node.left)
        if node.op == "^":
            return self.power(a, node.right)
        b = self(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        self.flag(np.abs(b.value) < EPS_POLE, POLE)
        return a / b

    def power(self, base: Jet, exponent: Node) -> Jet:
        b = self(exponent)
        if not _has_var(exponent):
            n = complex(b.value.flat[0])
            if n.imag == 0 and n.real == round(n.real) and abs(n.real) < _MAX_INT_EXPONENT:
                return self.int_power(base, int(n.real))
        self.flag(np.abs(base.value) < EPS_POLE, BRANCH_POINT)
        log_a = np.log(base.value)
        v = np.exp(b.value * log_a)
        return Jet(v, v * (b.deriv * log_a + b.value * base.deriv / base.value))

    def int_power(self, base: Jet, n: int) -> Jet:
        if n == 0:
            return Jet.constant(1.0, self.z)
        result, square, k = None, base, abs(n)
        while k:
            if k & 1:
                result = square if result is None else result * square
            k >>= 1
            if k:
                square = square * square
        if n < 0:
            self.flag(np.abs(base.value) < EPS_POLE, POLE)
            result = Jet.constant(1.0, self.z) / result
        return result

    def call(self, func: str, a: Jet) -> Jet:
        v, d = a.value, a.deriv
        if func == "exp":
            e = np.exp(v)
            return Jet(e, e * d)
        if func == "log":
            self.flag(np.abs(v) < EPS_POLE, BRANCH_POINT)
            return Jet(np.log(v), d / v)
        if func == "sqrt":
            self.flag(np.abs(v) < EPS_POLE, BRANCH_POINT)
            s = np.sqrt(v)
            return Jet(s, d / (2 * s))
        if func == "sin":
            return Jet(np.sin(v), np.cos(v) * d)
        if func == "cos":
            return Jet(np.cos(v), -np.sin(v) * d)
        if func == "tan":
            c = np.cos(v)
            self.flag(np.abs(c) < EPS_POLE, POLE)
            return Jet(np.sin(v) / c, d / (c * c))
        if func == "sinh":
            return Jet(np.sinh(v), np.cosh(v) * d)
        if func == "cosh":
            return Jet(np.cosh(v), np.sinh(v) * d)
        raise ValueError(f"unknown function {func!r}")


def eval_jet_array(node: Node, z) -> tuple[Jet, np.ndarray]:
    """Evaluate on an array of points.

    Returns the jet and an int8 array of singularity codes (``OK`` where the
    evaluation is finite and regular).  Values at flagged points are
    unspecified.
    """
    z = np.asarray(z, dtype=complex)
    ev = _Evaluator(z)
    with np.errstate(all="ignore"):
        jet = ev(node)
    return Jet(np.asarray(jet.value, dtype=complex) + 0 * z,
               np.asarray(jet.deriv, dtype=complex) + 0 * z), ev.code


def eval_jet(f: Union["HoloFn", Node], z: complex) -> Jet:
    """Value and derivative of ``f`` at ``z``; raises :class:`SingularityError`."""
    node = f.ast if isinstance(f, HoloFn) else f
    source = f.source if isinstance(f, HoloFn) else None
    jet, code = eval_jet_array(node, np.array(complex(z)))
    if code != OK:
        raise SingularityError(KIND_NAMES[int(code)], z, source)
    return Jet(complex(jet.value), complex(jet.deriv))


@dataclass(frozen=True)
class HoloFn:
    """A parsed holomorphic expression in the variable ``z``."""

    ast: Node
    source: str

    @classmethod
    def parse(cls, text) -> "HoloFn":
        if isinstance(text, HoloFn):
            return text
        ast = parse(text)
        if isinstance(text, (bytes, bytearray)):
            text = bytes(text).decode("utf-8")
        return cls(ast, text)

    @classmethod
    def from_ast(cls, ast: Node) -> "HoloFn":
        return cls(ast, render(ast))

    def jet(self, z: complex) -> Jet:
        return eval_jet(self, z)

    def jet_array(self, z) -> tuple[Jet, np.ndarray]:
        return eval_jet_array(self.ast, z)

    def __call__(self, z: complex) -> complex:
        return self.jet(z).value

    def compose(self, inner: "HoloFn") -> "HoloFn":
        return HoloFn.from_ast(compose(self.ast, inner.ast))

    def render(self) -> str:
        return render(self.ast)

    def __str__(self):
        return self.source
