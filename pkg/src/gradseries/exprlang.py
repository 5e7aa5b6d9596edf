"""Textual expression language for smooth scalar functions on R^d.

Grammar (whitespace is free between tokens)::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := ('-')? atom ('^' INT)?
    atom   := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
    VAR    := 'x' [1-9][0-9]*
    FUNC   := exp | tanh | sin | cos | sigmoid | softplus

Precedence is ^ above unary minus above * above binary +/-, and an exponent
must be a non-negative integer literal, so every parsed function is C-infinity
on all of R^d.  Division and non-smooth functions (relu, abs, max) are
deliberately absent from the grammar.  Variables are 1-based: x1 ... xd.
Numeric literals are decimal with optional exponent and are parsed to binary
floating point.

Expression graphs are immutable; a parsed ScoreFunction can be shared freely
across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import DimensionMismatchError, NumericError, ParseError, UsageError

# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True, slots=True)
class Const:
    value: float


@dataclass(frozen=True, slots=True)
class Var:
    index: int  # 1-based, matching the surface syntax x1, x2, ...


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True, slots=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True, slots=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True, slots=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True, slots=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    arg: "Node"


Node = Const | Var | Neg | Add | Sub | Mul | Pow | Call


@dataclass(frozen=True, slots=True)
class ScoreFunction:
    """An immutable parsed expression graph for a scalar function on R^d.

    ``dimension`` is the highest variable index referenced (0 for constant
    expressions); ``smoothness_class`` is 'polynomial' when only +, -, * and
    integer powers appear, else 'analytic'.
    """

    root: Node
    dimension: int
    smoothness_class: str

    @property
    def is_polynomial(self) -> bool:
        return self.smoothness_class == "polynomial"


# --------------------------------------------------------------------------
# Scalar evaluation helpers, shared with the jet propagator so that the jet's
# constant coefficient reproduces plain evaluation bit-for-bit.


def _sigmoid(v: float) -> float:
    if v >= 0.0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


def _softplus(v: float) -> float:
    if v > 0.0:
        return v + math.log1p(math.exp(-v))
    return math.log1p(math.exp(v))


FUNCTIONS: dict[str, object] = {
    "exp": math.exp,
    "tanh": math.tanh,
    "sin": math.sin,
    "cos": math.cos,
    "sigmoid": _sigmoid,
    "softplus": _softplus,
}


def ipow(v: float, k: int) -> float:
    """v**k for integer k >= 0 by binary exponentiation."""
    out = 1.0
    base = v
    while k:
        if k & 1:
            out *= base
        base *= base
        k >>= 1
    return out


# --------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(\.\d*)?([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)

_VAR_RE = re.compile(r"x([1-9][0-9]*)\Z")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", source, pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(source)))
    return tokens


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str):
        raise ParseError(message, self.source, self.peek()[2])

    def parse(self) -> Node:
        node = self.expr()
        kind, text, _ = self.peek()
        if kind != "eof":
            self.fail(f"unexpected {text!r} after expression")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.advance()
            node = Mul(node, self.factor())
        return node

    def factor(self) -> Node:
        negate = False
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            negate = True
        node = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            node = Pow(node, self.exponent())
        return Neg(node) if negate else node

    def exponent(self) -> int:
        kind, text, _ = self.peek()
        if kind != "number":
            self.fail("exponent must be a non-negative integer literal")
        if "." in text or "e" in text or "E" in text:
            self.fail(f"exponent must be an integer, got {text!r}")
        self.advance()
        return int(text)

    def atom(self) -> Node:
        kind, text, offset = self.peek()
        if kind == "number":
            self.advance()
            return Const(float(text))
        if kind == "ident":
            self.advance()
            var = _VAR_RE.match(text)
            if var:
                return Var(int(var.group(1)))
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", self.source, offset)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, variable, function call, or '('")

    def expect(self, op: str):
        kind, text, _ = self.peek()
        if kind != "op" or text != op:
            self.fail(f"expected {op!r}")
        self.advance()


def parse(source: str) -> ScoreFunction:
    """Parse expression text into an immutable ScoreFunction.

    The dimension is the smallest d covering all referenced variables.
    Raises ParseError (with offset/line/column) on malformed input.
    """
    root = _Parser(source).parse()
    dim = _max_var(root)
    cls = "polynomial" if _is_polynomial(root) else "analytic"
    return ScoreFunction(root=root, dimension=dim, smoothness_class=cls)


def _max_var(node: Node) -> int:
    match node:
        case Const():
            return 0
        case Var(index=i):
            return i
        case Neg(arg=a) | Call(arg=a):
            return _max_var(a)
        case Pow(base=b):
            return _max_var(b)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r):
            return max(_max_var(l), _max_var(r))
    raise TypeError(f"unknown node {node!r}")


def _is_polynomial(node: Node) -> bool:
    match node:
        case Const() | Var():
            return True
        case Neg(arg=a):
            return _is_polynomial(a)
        case Pow(base=b):
            return _is_polynomial(b)
        case Add(left=l, right=r) | Sub(left=l, right=r) | Mul(left=l, right=r):
            return _is_polynomial(l) and _is_polynomial(r)
        case Call():
            return False
    raise TypeError(f"unknown node {node!r}")


# --------------------------------------------------------------------------
# Operations on parsed functions


def evaluate(f: ScoreFunction, x) -> float:
    """Evaluate f at the point x (len(x) >= f.dimension).

    Raises NumericError if any intermediate overflows to a non-finite value.
    """
    if len(x) < f.dimension:
        raise DimensionMismatchError(
            f"function references x{f.dimension} but point has dimension {len(x)}"
        )
    try:
        value = _eval(f.root, x)
    except OverflowError as exc:
        raise NumericError(f"overflow while evaluating expression: {exc}") from exc
    if not math.isfinite(value):
        raise NumericError(f"expression evaluated to non-finite value {value}")
    return value


def _eval(node: Node, x) -> float:
    match node:
        case Const(value=v):
            return v
        case Var(index=i):
            return float(x[i - 1])
        case Neg(arg=a):
            return -_eval(a, x)
        case Add(left=l, right=r):
            return _eval(l, x) + _eval(r, x)
        case Sub(left=l, right=r):
            return _eval(l, x) - _eval(r, x)
        case Mul(left=l, right=r):
            return _eval(l, x) * _eval(r, x)
        case Pow(base=b, exponent=k):
            return ipow(_eval(b, x), k)
        case Call(func=name, arg=a):
            return FUNCTIONS[name](_eval(a, x))
    raise TypeError(f"unknown node {node!r}")


def degree(f: ScoreFunction) -> int | None:
    """Total degree of a polynomial function; None for analytic (unbounded)."""
    return _degree(f.root)


def _degree(node: Node) -> int | None:
    match node:
        case Const():
            return 0
        case Var():
            return 1
        case Neg(arg=a):
            return _degree(a)
        case Add(left=l, right=r) | Sub(left=l, right=r):
            dl, dr = _degree(l), _degree(r)
            return None if dl is None or dr is None else max(dl, dr)
        case Mul(left=l, right=r):
            dl, dr = _degree(l), _degree(r)
            return None if dl is None or dr is None else dl + dr
        case Pow(base=b, exponent=k):
            db = _degree(b)
            return None if db is None else db * k
        case Call():
            return None
    raise TypeError(f"unknown node {node!r}")


# --------------------------------------------------------------------------
# Serialization (canonical text; parse(serialize(f)) is structurally
# identical to f for any parsed f)

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def serialize(f: ScoreFunction) -> str:
    """Canonical source text for f."""
    return _serialize(f.root, _PREC_ADD)


def _serialize(node: Node, parent_prec: int) -> str:
    match node:
        case Const(value=v):
            text, prec = repr(v), _PREC_ATOM
        case Var(index=i):
            text, prec = f"x{i}", _PREC_ATOM
        case Neg(arg=a):
            text, prec = f"-{_serialize(a, _PREC_POW)}", _PREC_UNARY
        case Add(left=l, right=r):
            text = f"{_serialize(l, _PREC_ADD)} + {_serialize(r, _PREC_ADD + 1)}"
            prec = _PREC_ADD
        case Sub(left=l, right=r):
            text = f"{_serialize(l, _PREC_ADD)} - {_serialize(r, _PREC_ADD + 1)}"
            prec = _PREC_ADD
        case Mul(left=l, right=r):
            text = f"{_serialize(l, _PREC_MUL)} * {_serialize(r, _PREC_MUL + 1)}"
            prec = _PREC_MUL
        case Pow(base=b, exponent=k):
            text, prec = f"{_serialize(b, _PREC_ATOM)}^{k}", _PREC_POW
        case Call(func=name, arg=a):
            text, prec = f"{name}({_serialize(a, _PREC_ADD)})", _PREC_ATOM
        case _:
            raise TypeError(f"unknown node {node!r}")
    return f"({text})" if prec < parent_prec else text


def flatten_terms(node: Node, sign: int = 1) -> list[tuple[int, Node]]:
    """Top-level additive terms of an expression with their signs.

    Recurses through Add/Sub, so parenthesized sums are flattened too.  The
    original left-to-right term order is kept.
    """
    match node:
        case Add(left=l, right=r):
            return flatten_terms(l, sign) + flatten_terms(r, sign)
        case Sub(left=l, right=r):
            return flatten_terms(l, sign) + flatten_terms(r, -sign)
        case _:
            return [(sign, node)]


def rebuild_terms(terms: list[tuple[int, Node]]) -> Node | None:
    """Left-fold terms back into an expression tree; None for an empty list.

    The fold is deterministic, so two term lists that are equal element-wise
    rebuild into structurally identical trees.
    """
    if not terms:
        return None
    sign, first = terms[0]
    node = first if sign > 0 else Neg(first)
    for sign, term in terms[1:]:
        node = Add(node, term) if sign > 0 else Sub(node, term)
    return node


def term_degree(node: Node) -> int | None:
    """Polynomial degree of a single term node (None when unbounded)."""
    return _degree(node)


def from_root(root: Node) -> ScoreFunction:
    """Wrap a raw node as a ScoreFunction (used when rebuilding subsets of terms)."""
    cls = "polynomial" if _is_polynomial(root) else "analytic"
    return ScoreFunction(root=root, dimension=_max_var(root), smoothness_class=cls)
