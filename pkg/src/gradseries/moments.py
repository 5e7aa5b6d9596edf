"""Closed-form Gaussian moments of noise monomials.

For iid coordinates ``Z_m ~ N(0, sigma^2)`` all quantities reduce to the
scalar moments

    E[Z^(2t)]  = (2t)! / (2^t t!) * sigma^(2t)          (an integer times sigma^(2t))
    E[|Z^s|]   = 2^(s/2) sigma^s / sqrt(pi) * Gamma(s/2 + 1/2)
    E[Z^s]     = 0 for odd s                            (symmetry)

and products over coordinates by independence.  Every coefficient here is an
exact integer -- (2t)!/(2^t t!) is the double factorial (2t-1)!! and the
half-integer Gamma values reduce to factorials -- so coefficients are combined
exactly and converted to float only when multiplied by the sigma power.  In
particular the bracket E[(Z^s)^2] - (E[Z^s])^2 is an exact non-negative
integer times sigma^(2|s|), which avoids catastrophic cancellation.

sigma = 0 is permitted: all moments of positive order are 0 and order-0
moments are 1, so noise-adding estimators degrade gracefully to plain
saliency.
"""

from __future__ import annotations

import math

from .errors import UsageError
from .multiindex import MultiIndex, all_even, any_odd, order

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _even_coeff(t: int) -> int:
    """(2t)! / (2^t t!) as an exact integer (equals the double factorial (2t-1)!!)."""
    return math.factorial(2 * t) // ((1 << t) * math.factorial(t))


def _sigma_power(sigma: float, k: int) -> float:
    if sigma < 0:
        raise UsageError(f"sigma must be >= 0, got {sigma}")
    return sigma**k


def even_moment(s: int, sigma: float) -> float:
    """E[eps^(2s)] for eps ~ N(0, sigma^2); returns 1 for s = 0."""
    if s < 0:
        raise UsageError(f"moment order must be >= 0, got {s}")
    return _even_coeff(s) * _sigma_power(sigma, 2 * s)


def abs_moment(s: int, sigma: float) -> float:
    """E[|eps^s|] for eps ~ N(0, sigma^2).

    Even s reduces exactly to even_moment(s/2, sigma); odd s = 2t+1 has the
    exact form 2^t t! * sigma^s * sqrt(2/pi).
    """
    if s < 0:
        raise UsageError(f"moment order must be >= 0, got {s}")
    if s % 2 == 0:
        return even_moment(s // 2, sigma)
    t = (s - 1) // 2
    coeff = (1 << t) * math.factorial(t)
    return coeff * _sigma_power(sigma, s) * _SQRT_2_OVER_PI


def product_moment(s: MultiIndex, sigma: float) -> float:
    """E[Z_1^s_1 ... Z_d^s_d] for iid N(0, sigma^2) coordinates.

    Exactly 0 whenever any component is odd (symmetry kills the product);
    otherwise the product of per-coordinate even moments.
    """
    if any_odd(s):
        _sigma_power(sigma, 0)  # still reject negative sigma
        return 0.0
    coeff = 1
    for sm in s:
        coeff *= _even_coeff(sm // 2)
    return coeff * _sigma_power(sigma, order(s))


def even_monomial_mean(s: MultiIndex, sigma: float) -> float:
    """E[Z^s] for an all-even multi-index s; a usage error otherwise.

    This is the per-term sigma coefficient of the SmoothGrad series:
    prod_m s_m! / (2^(s_m/2) (s_m/2)!) * sigma^s_m.
    """
    if any_odd(s):
        raise UsageError(f"multi-index {s} has odd components")
    coeff = 1
    for sm in s:
        coeff *= _even_coeff(sm // 2)
    return coeff * _sigma_power(sigma, order(s))


def monomial_second_moment(s: MultiIndex, sigma: float) -> float:
    """E[(Z^s)^2] = prod_m (2 s_m)! / (2^s_m s_m!) * sigma^(2 s_m).

    The per-term sigma factor of the VarGrad series.
    """
    coeff = 1
    for sm in s:
        coeff *= _even_coeff(sm)
    return coeff * _sigma_power(sigma, 2 * order(s))


def monomial_covariance(s: MultiIndex, t: MultiIndex, sigma: float) -> float:
    """Cov(Z^s, Z^t) for iid N(0, sigma^2) coordinates.

    Nonzero only when s_m + t_m is even for every m.  The coefficient
    E-coeff(s+t) minus, when both indices are all-even, the product of the
    mean coefficients, is computed in exact integer arithmetic before the
    single multiplication by sigma^(|s|+|t|).
    """
    if len(s) != len(t):
        raise UsageError("multi-index dimensions differ")
    if any((sm + tm) % 2 for sm, tm in zip(s, t)):
        _sigma_power(sigma, 0)
        return 0.0
    coeff = 1
    for sm, tm in zip(s, t):
        coeff *= _even_coeff((sm + tm) // 2)
    if all_even(s) and all_even(t):
        mean_s = 1
        for sm in s:
            mean_s *= _even_coeff(sm // 2)
        mean_t = 1
        for tm in t:
            mean_t *= _even_coeff(tm // 2)
        coeff -= mean_s * mean_t
    return coeff * _sigma_power(sigma, order(s) + order(t))


def monomial_variance(s: MultiIndex, sigma: float) -> float:
    """Var(Z^s) = E[(Z^s)^2] - (E[Z^s])^2, with the exact-integer bracket."""
    return monomial_covariance(s, s, sigma)
