"""Multi-index arithmetic and enumeration.

A multi-index is a fixed-length tuple of non-negative integers.  It indexes
both mixed partial derivatives and monomials: for ``alpha = (a_1, ..., a_d)``,

* ``order(alpha)   = a_1 + ... + a_d``
* ``factorial(alpha) = a_1! * ... * a_d!``  (exact integer)
* ``monomial(x, alpha) = x_1**a_1 * ... * x_d**a_d``  with ``0**0 == 1``

Enumeration of all indices of a given order realizes sums of the form
"over all s with |s| = k"; the count is the stars-and-bars number
``C(k + d - 1, d - 1)`` and a configurable cap guards against combinatorial
blow-up at large dimension.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence

from .errors import DimensionMismatchError, EnumerationCapError, UsageError

MultiIndex = tuple[int, ...]

#: Enumerations larger than this raise EnumerationCapError.
DEFAULT_ENUMERATION_CAP = 1_000_000


def validate(alpha: Iterable[int]) -> MultiIndex:
    """Return ``alpha`` as a tuple, checking it is a valid multi-index."""
    idx = tuple(alpha)
    if len(idx) < 1:
        raise UsageError("multi-index must have at least one component")
    for a in idx:
        if not isinstance(a, int) or isinstance(a, bool) or a < 0:
            raise UsageError(f"multi-index components must be non-negative integers, got {a!r}")
    return idx


def order(alpha: MultiIndex) -> int:
    """Total order |alpha|: the sum of the components."""
    return sum(alpha)


def factorial(alpha: MultiIndex) -> int:
    """alpha! as an exact integer: the product of component factorials."""
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def monomial(x: Sequence[float], alpha: MultiIndex) -> float:
    """x**alpha: the product of x_m**alpha_m, with 0**0 defined as 1."""
    if len(x) != len(alpha):
        raise DimensionMismatchError(
            f"point has dimension {len(x)} but multi-index has dimension {len(alpha)}"
        )
    out = 1.0
    for xm, am in zip(x, alpha):
        out *= xm**am
    return out


def count_order(d: int, k: int) -> int:
    """Number of d-dimensional multi-indices of order exactly k."""
    return math.comb(k + d - 1, d - 1)


def enumerate_order(d: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[MultiIndex]:
    """All d-dimensional multi-indices of order exactly k.

    Deterministic order: first component descending, recursively (so the
    result is reverse-lexicographic).  Raises EnumerationCapError when the
    stars-and-bars count exceeds ``cap``.
    """
    if d < 1:
        raise UsageError(f"dimension must be >= 1, got {d}")
    if k < 0:
        raise UsageError(f"order must be >= 0, got {k}")
    n = count_order(d, k)
    if n > cap:
        raise EnumerationCapError(
            f"enumeration of {n} multi-indices (d={d}, k={k}) exceeds cap of {cap}"
        )
    out: list[MultiIndex] = []

    def rec(prefix: tuple[int, ...], remaining: int, slots: int) -> None:
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for a in range(remaining, -1, -1):
            rec(prefix + (a,), remaining - a, slots - 1)

    rec((), k, d)
    return out


def enumerate_up_to(d: int, max_order: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[MultiIndex]:
    """All d-dimensional multi-indices of order 0..max_order, grouped by order."""
    total = sum(count_order(d, k) for k in range(max_order + 1))
    if total > cap:
        raise EnumerationCapError(
            f"enumeration of {total} multi-indices (d={d}, orders <= {max_order}) "
            f"exceeds cap of {cap}"
        )
    out: list[MultiIndex] = []
    for k in range(max_order + 1):
        out.extend(enumerate_order(d, k, cap=cap))
    return out


def all_even(alpha: MultiIndex) -> bool:
    """True iff every component is zero or a positive even number."""
    return all(a % 2 == 0 for a in alpha)


def any_odd(alpha: MultiIndex) -> bool:
    """True iff some component is odd (the negation of all_even)."""
    return not all_even(alpha)


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    """Componentwise sum."""
    if len(alpha) != len(beta):
        raise DimensionMismatchError("multi-index dimensions differ")
    return tuple(a + b for a, b in zip(alpha, beta))


def shift(alpha: MultiIndex, i: int) -> MultiIndex:
    """alpha + e_i for the 0-based coordinate i."""
    if not 0 <= i < len(alpha):
        raise UsageError(f"coordinate {i} out of range for dimension {len(alpha)}")
    return alpha[:i] + (alpha[i] + 1,) + alpha[i + 1 :]


def half(alpha: MultiIndex) -> MultiIndex:
    """alpha / 2 componentwise; requires every component even."""
    if any_odd(alpha):
        raise UsageError(f"multi-index {alpha} has odd components, cannot halve")
    return tuple(a // 2 for a in alpha)


def unit(d: int, i: int) -> MultiIndex:
    """The unit multi-index e_i in dimension d (0-based i)."""
    if not 0 <= i < d:
        raise UsageError(f"coordinate {i} out of range for dimension {d}")
    return tuple(1 if m == i else 0 for m in range(d))


def zero(d: int) -> MultiIndex:
    """The zero multi-index in dimension d."""
    return (0,) * d
