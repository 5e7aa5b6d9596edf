"""Higher-order partial derivatives via truncated multivariate Taylor jets.

A jet is a sparse truncated Taylor polynomial of a function around a point x:
coefficients c_alpha keyed by multi-index with |alpha| <= L, satisfying
``D^alpha f(x) = alpha! * c_alpha``.  Jets propagate through the expression
graph in one pass: arithmetic nodes map to truncated polynomial arithmetic,
and a smooth function g applied to a jet u is expanded through the Taylor
shift

    g(u) = sum_j  g^(j)(u0) / j! * (u - u0)^j,   u0 = constant term of u,

which terminates at j = L because u - u0 has no constant term.  The
univariate derivatives g^(j)(u0) come from exact closed forms: exp is its own
derivative chain, sin/cos cycle, and tanh/sigmoid derivatives are integer
polynomials in the function value (softplus' = sigmoid).

Products iterate coefficient keys in sorted order, so a coefficient of given
order is accumulated in the same sequence regardless of the truncation order
L; tables of different order agree bitwise on their common entries for
polynomial expressions.

fd_partial provides the independent cross-check: nested central differences
driven only by scalar expression evaluation, never by jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DimensionMismatchError, NumericError, UsageError
from .exprlang import (
    FUNCTIONS,
    Add,
    Call,
    Const,
    Mul,
    Neg,
    Node,
    Pow,
    ScoreFunction,
    Sub,
    Var,
    evaluate,
    ipow,
)
from .multiindex import (
    DEFAULT_ENUMERATION_CAP,
    MultiIndex,
    count_order,
    enumerate_up_to,
    factorial,
    order,
    shift,
    unit,
    zero,
)

# --------------------------------------------------------------------------
# Truncated polynomial (jet) arithmetic


class _Jet:
    __slots__ = ("dim", "max_order", "coeffs")

    def __init__(self, dim: int, max_order: int, coeffs: dict[MultiIndex, float]):
        self.dim = dim
        self.max_order = max_order
        self.coeffs = coeffs

    @classmethod
    def constant(cls, dim: int, max_order: int, value: float) -> "_Jet":
        return cls(dim, max_order, {zero(dim): value})

    @classmethod
    def variable(cls, dim: int, max_order: int, i: int, value: float) -> "_Jet":
        coeffs = {zero(dim): value}
        if max_order >= 1:
            coeffs[unit(dim, i)] = 1.0
        return cls(dim, max_order, coeffs)

    def added(self, other: "_Jet") -> "_Jet":
        out = dict(self.coeffs)
        for key in sorted(other.coeffs):
            out[key] = out.get(key, 0.0) + other.coeffs[key]
        return _Jet(self.dim, self.max_order, out)

    def subtracted(self, other: "_Jet") -> "_Jet":
        out = dict(self.coeffs)
        for key in sorted(other.coeffs):
            out[key] = out.get(key, 0.0) - other.coeffs[key]
        return _Jet(self.dim, self.max_order, out)

    def negated(self) -> "_Jet":
        return _Jet(self.dim, self.max_order, {k: -v for k, v in self.coeffs.items()})

    def multiplied(self, other: "_Jet") -> "_Jet":
        out: dict[MultiIndex, float] = {}
        limit = self.max_order
        bkeys = [(key, sum(key), other.coeffs[key]) for key in sorted(other.coeffs)]
        for akey in sorted(self.coeffs):
            aorder = sum(akey)
            aval = self.coeffs[akey]
            for bkey, border, bval in bkeys:
                if aorder + border > limit:
                    continue
                gamma = tuple(a + b for a, b in zip(akey, bkey))
                out[gamma] = out.get(gamma, 0.0) + aval * bval
        return _Jet(self.dim, self.max_order, out)

    def int_power(self, k: int) -> "_Jet":
        out = _Jet.constant(self.dim, self.max_order, 1.0)
        base = self
        while k:
            if k & 1:
                out = out.multiplied(base)
            k >>= 1
            if k:
                base = base.multiplied(base)
        return out

    def without_constant(self) -> "_Jet":
        out = {k: v for k, v in self.coeffs.items() if any(k)}
        return _Jet(self.dim, self.max_order, out)

    def constant_term(self) -> float:
        return self.coeffs.get(zero(self.dim), 0.0)


# --------------------------------------------------------------------------
# Closed-form derivative chains g(u0), g'(u0), ..., g^(L)(u0)

_Poly = tuple[int, ...]  # integer coefficient list, lowest degree first


def _poly_derivative(p: _Poly) -> _Poly:
    return tuple(k * c for k, c in enumerate(p))[1:] or (0,)


def _poly_mul(p: _Poly, q: _Poly) -> _Poly:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return tuple(out)


def _poly_eval(p: _Poly, y: float) -> float:
    out = 0.0
    for c in reversed(p):
        out = out * y + c
    return out


@lru_cache(maxsize=None)
def _value_poly_chain(generator: _Poly, n: int) -> tuple[_Poly, ...]:
    """Polynomials P_1..P_n with g^(j) = P_j(g), given g' = generator(g)."""
    chain = [generator]
    for _ in range(n - 1):
        chain.append(_poly_mul(_poly_derivative(chain[-1]), generator))
    return tuple(chain)


_TANH_GEN: _Poly = (1, 0, -1)  # tanh' = 1 - tanh^2
_SIGMOID_GEN: _Poly = (0, 1, -1)  # sigmoid' = sigmoid - sigmoid^2


def _derivative_chain(func: str, u0: float, n: int) -> list[float]:
    """[g(u0), g'(u0), ..., g^(n)(u0)] for a whitelisted function g."""
    if func == "exp":
        e = math.exp(u0)
        return [e] * (n + 1)
    if func == "sin":
        s, c = math.sin(u0), math.cos(u0)
        cycle = [s, c, -s, -c]
        return [cycle[j % 4] for j in range(n + 1)]
    if func == "cos":
        s, c = math.sin(u0), math.cos(u0)
        cycle = [c, -s, -c, s]
        return [cycle[j % 4] for j in range(n + 1)]
    if func == "tanh":
        t = math.tanh(u0)
        if n == 0:
            return [t]
        return [t] + [_poly_eval(p, t) for p in _value_poly_chain(_TANH_GEN, n)]
    if func == "sigmoid":
        s = FUNCTIONS["sigmoid"](u0)
        if n == 0:
            return [s]
        return [s] + [_poly_eval(p, s) for p in _value_poly_chain(_SIGMOID_GEN, n)]
    if func == "softplus":
        # softplus' = sigmoid, so the chain is softplus value then sigmoid's chain
        value = FUNCTIONS["softplus"](u0)
        if n == 0:
            return [value]
        return [value] + _derivative_chain("sigmoid", u0, n - 1)
    raise UsageError(f"unknown function {func!r}")


def _compose(u: _Jet, func: str) -> _Jet:
    """Jet of g(u) via the Taylor shift around u's constant term."""
    n = u.max_order
    u0 = u.constant_term()
    derivs = _derivative_chain(func, u0, n)
    coeffs = [derivs[j] / math.factorial(j) for j in range(n + 1)]
    w = u.without_constant()
    out = _Jet.constant(u.dim, n, coeffs[n])
    for j in range(n - 1, -1, -1):
        out = out.multiplied(w)
        key = zero(u.dim)
        out.coeffs[key] = out.coeffs.get(key, 0.0) + coeffs[j]
    return out


def _propagate(node: Node, x, dim: int, max_order: int) -> _Jet:
    match node:
        case Const(value=v):
            return _Jet.constant(dim, max_order, v)
        case Var(index=i):
            return _Jet.variable(dim, max_order, i - 1, float(x[i - 1]))
        case Neg(arg=a):
            return _propagate(a, x, dim, max_order).negated()
        case Add(left=l, right=r):
            return _propagate(l, x, dim, max_order).added(_propagate(r, x, dim, max_order))
        case Sub(left=l, right=r):
            return _propagate(l, x, dim, max_order).subtracted(_propagate(r, x, dim, max_order))
        case Mul(left=l, right=r):
            return _propagate(l, x, dim, max_order).multiplied(_propagate(r, x, dim, max_order))
        case Pow(base=b, exponent=k):
            return _propagate(b, x, dim, max_order).int_power(k)
        case Call(func=name, arg=a):
            return _compose(_propagate(a, x, dim, max_order), name)
    raise TypeError(f"unknown node {node!r}")


# --------------------------------------------------------------------------
# Derivative tables


@dataclass(frozen=True)
class DerivativeTable:
    """All partial derivatives D^alpha f(x) for |alpha| <= max_order.

    Complete: every multi-index of order <= max_order has exactly one entry
    (mixed partials are keyed by the unordered multi-index, so symmetry of
    mixed partials is structural).  The zero-index entry is f(x).
    """

    point: tuple[float, ...]
    max_order: int
    entries: Mapping[MultiIndex, float] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.point)

    def partial(self, alpha: MultiIndex) -> float:
        alpha = tuple(alpha)
        if len(alpha) != self.dimension:
            raise DimensionMismatchError(
                f"multi-index dimension {len(alpha)} != table dimension {self.dimension}"
            )
        if order(alpha) > self.max_order:
            raise UsageError(
                f"order {order(alpha)} exceeds table max_order {self.max_order}"
            )
        return self.entries[alpha]


def derivative_table(
    f: ScoreFunction,
    x,
    max_order: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> DerivativeTable:
    """Complete table of D^alpha f(x) for |alpha| <= max_order.

    The point's length fixes the table dimension and must cover every
    variable referenced by f.
    """
    if max_order < 0:
        raise UsageError(f"max_order must be >= 0, got {max_order}")
    point = tuple(float(v) for v in x)
    d = len(point)
    if d < max(f.dimension, 1):
        raise DimensionMismatchError(
            f"function references x{f.dimension} but point has dimension {d}"
        )
    indices = enumerate_up_to(d, max_order, cap=cap)
    try:
        jet = _propagate(f.root, point, d, max_order)
    except OverflowError as exc:
        raise NumericError(f"overflow while propagating derivatives: {exc}") from exc
    entries = {}
    for alpha in indices:
        value = factorial(alpha) * jet.coeffs.get(alpha, 0.0)
        if not math.isfinite(value):
            raise NumericError(f"non-finite derivative entry for multi-index {alpha}")
        entries[alpha] = value
    return DerivativeTable(point=point, max_order=max_order, entries=MappingProxyType(entries))


def saliency(f: ScoreFunction, x) -> np.ndarray:
    """Gradient of f at x: the order-1 slice of the derivative table."""
    table = derivative_table(f, x, 1)
    d = table.dimension
    return np.array([table.entries[unit(d, i)] for i in range(d)])


def saliency_partial(table: DerivativeTable, i: int, s: MultiIndex) -> float:
    """D^s of gradient component i at the table's point, i.e. D^(s + e_i) f.

    Requires order(s) + 1 <= table.max_order; i is 0-based.
    """
    s = tuple(s)
    if order(s) + 1 > table.max_order:
        raise UsageError(
            f"order {order(s)} + 1 exceeds table max_order {table.max_order}"
        )
    return table.partial(shift(s, i))


def fd_partial(f: ScoreFunction, x, alpha: MultiIndex, h: float | None = None) -> float:
    """D^alpha f(x) by nested central differences (independent of jets).

    One central-difference nesting level per derivative order per coordinate;
    truncation error O(h^2).  Defaults: h = 1e-5 for total order <= 2 and
    1e-3 above (recommended for orders <= 4; roundoff grows like eps/h^order).
    """
    alpha = tuple(alpha)
    point = [float(v) for v in x]
    if len(alpha) != len(point):
        raise DimensionMismatchError(
            f"multi-index dimension {len(alpha)} != point dimension {len(point)}"
        )
    k = order(alpha)
    if h is None:
        h = 1e-5 if k <= 2 else 1e-3
    if h <= 0:
        raise UsageError(f"step must be positive, got {h}")

    def recurse(pt: list[float], a: MultiIndex) -> float:
        for i, ai in enumerate(a):
            if ai > 0:
                lowered = a[:i] + (ai - 1,) + a[i + 1 :]
                plus = list(pt)
                plus[i] += h
                minus = list(pt)
                minus[i] -= h
                return (recurse(plus, lowered) - recurse(minus, lowered)) / (2.0 * h)
        return evaluate(f, pt)

    return recurse(point, alpha)


def table_cost(d: int, max_order: int) -> int:
    """Number of entries a (d, max_order) table would hold."""
    return sum(count_order(d, k) for k in range(max_order + 1))
