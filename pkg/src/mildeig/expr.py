"""A small arithmetic expression language for g(t, x, u), profiles and weights.

Grammar, loosest to tightest binding::

    expr   := expr ('+' | '-') expr          left-assoc
            | expr ('*' | '/') expr          left-assoc
            | '-' expr                       unary minus
            | expr '^' expr                  right-assoc
            | NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

so ``-2^2 == -4`` and ``2^3^2 == 512``. Names are the variables allowed by
the caller, the constants ``pi`` and ``e``, and the functions ``sin``,
``cos``, ``exp``, ``sqrt`` and ``abs``. Evaluation is vectorised over numpy
arrays.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import (EvaluationError, ExpressionSyntaxError, UnknownFunction,
                     UnknownVariable)

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 30, 40, 100
_BINARY_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    """A variable or a named constant."""
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


Node = Union[Num, Name, Neg, BinOp, Call]

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(src):
    pos = 0
    tokens = []
    while pos < len(src):
        match = _TOKEN.match(src, pos)
        if match is None:
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append((kind, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src, allowed_vars):
        self.tokens = _tokenize(src)
        self.i = 0
        self.allowed = frozenset(allowed_vars)

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.advance()
        if value != text:
            found = repr(value) if kind != "end" else "end of input"
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", pos)

    def parse(self, rbp=0):
        left = self.prefix()
        while True:
            kind, value, _ = self.peek()
            if kind != "op" or value not in _BINARY_PREC:
                return left
            lbp = _BINARY_PREC[value]
            if lbp <= rbp:
                return left
            self.advance()
            # right-assoc: the right operand may absorb another '^'
            right = self.parse(lbp - 1 if value == "^" else lbp)
            left = BinOp(value, left, right)

    def prefix(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "op" and value == "-":
            return Neg(self.parse(_PREC_NEG))
        if kind == "op" and value == "(":
            inner = self.parse()
            self.expect(")")
            return inner
        if kind == "name":
            if self.peek()[1] == "(":
                if value not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {value!r} at position {pos}")
                self.advance()
                arg = self.parse()
                self.expect(")")
                return Call(value, arg)
            if value in FUNCTIONS:
                raise ExpressionSyntaxError(f"function {value!r} needs an argument", pos)
            if value in self.allowed or value in CONSTANTS:
                return Name(value)
            raise UnknownVariable(
                f"unknown variable {value!r} at position {pos}; allowed: {sorted(self.allowed)}")
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", pos)
        raise ExpressionSyntaxError(f"unexpected {value!r}", pos)


def _precedence(node):
    if isinstance(node, BinOp):
        return _BINARY_PREC[node.op]
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def to_source(node: Node) -> str:
    """Print with the fewest parentheses that reparse to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        if _precedence(node.operand) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    p = _BINARY_PREC[node.op]
    left, right = to_source(node.left), to_source(node.right)
    lp, rp = _precedence(node.left), _precedence(node.right)
    if lp < p or (node.op == "^" and lp == p):
        left = f"({left})"
    if rp < p or (node.op != "^" and rp == p):
        right = f"({right})"
    return f"{left}{node.op}{right}"


def _evaluate(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        if node.name in env:
            return env[node.name]
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_evaluate(node.operand, env)
    if isinstance(node, Call):
        arg = _evaluate(node.arg, env)
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise EvaluationError("sqrt of a negative number")
        return FUNCTIONS[node.func](arg)
    a = _evaluate(node.left, env)
    b = _evaluate(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if np.any(np.asarray(b) == 0):
            raise EvaluationError("division by zero")
        return a / b
    with np.errstate(invalid="ignore"):
        out = np.power(np.asarray(a, dtype=float), b)
    if np.any(np.isnan(out)):
        raise EvaluationError("power of a negative base to a fractional exponent")
    return out


class Expression:
    """A parsed expression bound to its set of allowed variables."""

    def __init__(self, tree: Node, allowed_vars: Iterable[str], source: str = ""):
        self.tree = tree
        self.allowed_vars = frozenset(allowed_vars)
        self.source = source or to_source(tree)

    def __call__(self, **values):
        missing = self.variables - set(values)
        if missing:
            raise EvaluationError(f"no value supplied for {sorted(missing)}")
        with np.errstate(over="ignore", divide="ignore"):
            out = _evaluate(self.tree, values)
        # constant expressions still broadcast against the inputs
        shape = np.broadcast_shapes(*(np.shape(v) for v in values.values())) if values else ()
        return np.broadcast_to(np.asarray(out, dtype=float), shape) + 0.0

    @property
    def variables(self) -> frozenset:
        found = set()

        def walk(node):
            if isinstance(node, Name) and node.name not in CONSTANTS:
                found.add(node.name)
            elif isinstance(node, Neg):
                walk(node.operand)
            elif isinstance(node, Call):
                walk(node.arg)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)

        walk(self.tree)
        return frozenset(found)

    def __eq__(self, other):
        return isinstance(other, Expression) and self.tree == other.tree

    def __hash__(self):
        return hash(self.tree)

    def __str__(self):
        return to_source(self.tree)

    def __repr__(self):
        return f"Expression({self.source!r})"


def parse_expression(src: str, allowed_vars: Iterable[str] = ("t", "x", "u")) -> Expression:
    if not isinstance(src, str) or not src.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    parser = _Parser(src, allowed_vars)
    tree = parser.parse()
    kind, value, pos = parser.peek()
    if kind != "end":
        raise ExpressionSyntaxError(f"unexpected {value!r}", pos)
    return Expression(tree, allowed_vars, src)


def constant_value(value) -> float:
    """A config number given either as a JSON number or a closed expression like ``"pi/2"``."""
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    return float(parse_expression(value, ())())
