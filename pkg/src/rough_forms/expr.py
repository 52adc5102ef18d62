"""
A small arithmetic expression language for point functions.

Grammar (``^`` binds tightest and associates to the right, unary minus sits
between ``^`` and ``* /``):

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := number | name | name "(" args ")" | "(" expr ")"
    args   := expr ("," expr)*

Variables are x1..x8 with aliases x, y, z for x1..x3; ``pi`` and ``e`` are
constants. Evaluation is vectorized over an (N, d) array of points.
"""
import math
import re
from dataclasses import dataclass

import numpy as np

from src.rough_forms.errors import (
    ArityError,
    DimensionError,
    DomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)

MAX_VARIABLES = 8
ALIASES = {"x": 0, "y": 1, "z": 2}
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1, "abs": 1, "sqrt": 1,
    "min": 2, "max": 2, "pow": 2, "weierstrass": 4,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\S))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text):
    """Split expression text into tokens; the final token is ("eof", "", len(text))."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


@dataclass(frozen=True)
class Num:
    value: float
    text: str | None = None


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


def _variable_index(name):
    if name in ALIASES:
        return ALIASES[name]
    m = re.fullmatch(r"x([1-9]\d*)", name)
    if m and int(m.group(1)) <= MAX_VARIABLES:
        return int(m.group(1)) - 1
    return None


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def fail(self, expected):
        found = self.tok.text if self.tok.kind != "eof" else None
        raise ExpressionSyntaxError(self.tok.pos, expected, found)

    def take(self, op):
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op):
        if not self.take(op):
            self.fail(f"'{op}'")

    def parse(self):
        node = self.expr()
        if self.tok.kind != "eof":
            self.fail("an operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.take("-"):
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.take("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text), tok.text)
        if tok.kind == "name":
            self.i += 1
            if self.take("("):
                return self.call(tok)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            index = _variable_index(tok.text)
            if index is None:
                raise UnknownIdentifierError(tok.text, tok.pos)
            return Var(index)
        if self.take("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail("a number, name or '('")

    def call(self, name_tok):
        if name_tok.text not in FUNCTIONS:
            raise UnknownIdentifierError(name_tok.text, name_tok.pos)
        args = [self.expr()]
        while self.take(","):
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name_tok.text]
        if len(args) != arity:
            raise ArityError(name_tok.text, arity, len(args))
        return Call(name_tok.text, tuple(args))


def parse_expr(text):
    """
    Parse expression text into an immutable AST.

    Raises:
        ExpressionSyntaxError: with the 0-based position of the offending token
        UnknownIdentifierError: unknown variable or function name
        ArityError: wrong number of function arguments
    """
    return _Parser(text).parse()


def free_variables(e):
    """0-based indices of the variables an expression reads."""
    if isinstance(e, Var):
        return frozenset({e.index})
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, Call):
        return frozenset().union(*(free_variables(a) for a in e.args))
    return frozenset()


def weierstrass_series(a, b, terms, t):
    """sum_{k < terms} a^k cos(b^k pi t), vectorized over t."""
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for k in range(int(terms)):
        total = total + a ** k * np.cos(b ** k * np.pi * t)
    return total


def _constant_arg(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim and not np.all(arr == arr.flat[0]):
        raise DomainError(f"the parameters of {name}() must not depend on the point")
    return float(arr.flat[0]) if arr.ndim else float(arr)


def _call(name, args):
    if name == "log":
        if np.any(args[0] <= 0):
            raise DomainError("log() of a nonpositive number")
        return np.log(args[0])
    if name == "sqrt":
        if np.any(args[0] < 0):
            raise DomainError("sqrt() of a negative number")
        return np.sqrt(args[0])
    if name == "weierstrass":
        a, b, k = (_constant_arg(x, name) for x in args[:3])
        if k < 0 or k != int(k):
            raise DomainError("weierstrass() needs a nonnegative integer number of terms")
        return weierstrass_series(a, b, int(k), args[3])
    simple = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "abs": np.abs,
              "min": np.minimum, "max": np.maximum, "pow": np.power}
    return simple[name](*args)


def _eval(e, points):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        return points[:, e.index]
    if isinstance(e, Neg):
        return -_eval(e.operand, points)
    if isinstance(e, BinOp):
        left, right = _eval(e.left, points), _eval(e.right, points)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if e.op == "+":
                return left + right
            if e.op == "-":
                return left - right
            if e.op == "*":
                return left * right
            if e.op == "/":
                return np.true_divide(left, right)
            return np.power(left, right)
    return _call(e.name, [_eval(a, points) for a in e.args])


def eval_batch(e, points):
    """
    Evaluate on an (N, d) array of points.

    Raises:
        DimensionError: the expression reads a variable beyond dimension d
        DomainError: a function left its domain
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    used = free_variables(e)
    if used and max(used) >= pts.shape[1]:
        raise DimensionError(f"expression reads x{max(used) + 1} but points have dimension {pts.shape[1]}")
    out = _eval(e, pts)
    return np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()


def eval_expr(e, p):
    """Evaluate at a single point (a number or coordinate sequence)."""
    return float(eval_batch(e, np.atleast_1d(np.asarray(p, dtype=float))[None])[0])


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(e):
    if isinstance(e, BinOp):
        return _PRECEDENCE[e.op]
    if isinstance(e, Neg):
        return _PRECEDENCE["neg"]
    return _PRECEDENCE["atom"]


def _wrap(e, needs):
    text = format_expr(e)
    return f"({text})" if needs else text


def format_expr(e):
    """Print an AST with the fewest parentheses that parse back to the same tree."""
    if isinstance(e, Num):
        return e.text if e.text is not None else repr(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return ("x", "y", "z")[e.index] if e.index < 3 else f"x{e.index + 1}"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _prec(e.operand) < _PRECEDENCE["neg"])
    if isinstance(e, Call):
        return f"{e.name}(" + ", ".join(format_expr(a) for a in e.args) + ")"
    p = _PRECEDENCE[e.op]
    if e.op == "^":
        return _wrap(e.left, _prec(e.left) < _PRECEDENCE["atom"]) + "^" + _wrap(e.right, _prec(e.right) < _PRECEDENCE["neg"])
    left = _wrap(e.left, _prec(e.left) < p)
    right = _wrap(e.right, _prec(e.right) <= p)
    sep = f" {e.op} " if p == 1 else e.op
    return left + sep + right
