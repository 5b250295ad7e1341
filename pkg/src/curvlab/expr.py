"""A small expression language for scalar fields in scenario files.

Grammar (lowest to highest precedence)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?          # right associative
    atom  := NUMBER | 'pi' | xK | FUNC '(' expr ')' | '(' expr ')'

FUNC is one of sin, cos, exp, sqrt.  Variables x1..xn index the last axis of
the point array.  Fields are never differentiated symbolically; anything that
needs derivatives goes through the finite-difference rules of the manifolds
engine.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownIdentifierError

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt}
CONSTANTS = {"pi": np.pi}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Num:
    value: float
    text: str


@dataclass(frozen=True)
class Var:
    index: int  # zero-based


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, nvars):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.nvars = nvars

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        kind, val, off = self.take()
        if kind != "op" or val != op:
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {op!r}, found {what}", off)

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Unary("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val), val)
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(val, arg)
            if val in CONSTANTS:
                return Const(val)
            m = re.fullmatch(r"x([1-9]\d*)", val)
            if m:
                k = int(m.group(1))
                if self.nvars is not None and k > self.nvars:
                    raise UnknownIdentifierError(f"variable {val} exceeds dimension {self.nvars}", off)
                return Var(k - 1)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"expected an operand, found {what}", off)


def parse_expr(text, nvars=None):
    """Parse text into an AST; errors carry the byte offset."""
    return _Parser(text, nvars).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node):
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return _PREC["neg"]
    return 5


def to_string(node):
    """Canonical text with minimal parentheses; parse(to_string(a)) == a."""
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = to_string(node.operand)
            return "-" + (inner if _prec(node.operand) >= 3 else f"({inner})")
        return f"{node.op}({to_string(node.operand)})"
    p = _PREC[node.op]
    left, right = to_string(node.left), to_string(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def evaluate(node, X):
    """Vectorized evaluation over points X of shape (..., n)."""
    X = np.asarray(X, dtype=float)
    if isinstance(node, Num):
        return np.full(X.shape[:-1], node.value)
    if isinstance(node, Var):
        if node.index >= X.shape[-1]:
            raise UnknownIdentifierError(f"variable x{node.index + 1} exceeds dimension {X.shape[-1]}", 0)
        return X[..., node.index]
    if isinstance(node, Const):
        return np.full(X.shape[:-1], CONSTANTS[node.name])
    if isinstance(node, Unary):
        val = evaluate(node.operand, X)
        return -val if node.op == "neg" else FUNCTIONS[node.op](val)
    a, b = evaluate(node.left, X), evaluate(node.right, X)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


class Field:
    """Compiled scalar field: ``Field("1 + 0.1*sin(x1)")(X)``."""

    def __init__(self, text, nvars=None):
        self.text = text
        self.ast = parse_expr(text, nvars)

    def __call__(self, X):
        with np.errstate(all="ignore"):
            out = evaluate(self.ast, X)
        if not np.all(np.isfinite(out)):
            raise DomainError(f"expression {self.text!r} is not finite on the requested points")
        return out

    def __repr__(self):
        return f"Field({self.text!r})"


def constant_value(text):
    """Evaluate a variable-free expression, e.g. "2*sqrt(6)"."""
    if isinstance(text, (int, float)):
        return float(text)
    return float(Field(text, nvars=0)(np.zeros((1, 0)))[0])
