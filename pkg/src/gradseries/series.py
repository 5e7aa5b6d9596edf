"""Analytic series forms of SmoothGrad and VarGrad with remainder bounds.

Let M_i = D^(e_i) f be gradient component i and A_s = D^s M_i(x) / s!.  With
Gaussian noise of deviation sigma, Taylor expansion of M_i(x + eps) gives, as
the sample count grows,

    smoothgrad_i -> sum_s A_s E[eps^s]
    vargrad_i    -> Var( sum_s A_s eps^s )
                  = sum_s A_s^2 Var(eps^s) + sum_{s != t} A_s A_t Cov(eps^s, eps^t)

with s ranging over 1 <= |s| <= l and a remainder from the orders above l.
The SmoothGrad sum keeps only all-even s (odd-component means vanish), so it
is the saliency plus even-order higher-derivative corrections and contains
no smoothing of the gradient.  The VarGrad expansion contains no |s| = 0
term at all, so it is independent of the gradient: only derivatives of f of
order >= 2 enter.  Cov(eps^s, eps^t) is nonzero only when s and t match
componentwise in parity; the diagonal terms split into the three parity
families (odd order; even order all-even, with the positive bracket
E[(eps^s)^2] - E[eps^s]^2; even order with an odd component) and the
off-diagonal terms are kept separately in the evaluation's cross-term
ledger.

Remainder bounds are driven by C, a sup estimate of the order-(l+1) partials
of M_i over a ball around x:

    smoothgrad:  |R|  <= sum_{|s|=l+1} C/s! * prod_m E[|eps^s_m|]
    vargrad:     |R1| <= sum_{|s|=l+1} (C/s!)^2 E[(eps^s)^2]
                 |R2| <= [sum_{odd |a|<=l}  |D^a M_i|/a! * sqrt(Var(eps^a))] * B
                 |R3| <= [sum_{even |a|<=l} |D^a M_i|/a! * sqrt(Var(eps^a))] * B
                 B    =  sum_{|b|=l+1} C/b! * sqrt(E[(eps^b)^2])
                 total reported bound = R1 + 2 R2 + 2 R3.

For polynomial f of degree <= l+1 the sup C is exactly zero and every bound
vanishes.  Otherwise C is a sampled sup (quasi-uniform points in the ball,
times a 1.5 safety factor) and the bounds are heuristic estimates, validated
statistically rather than certified: Gaussian noise is unbounded, so no
finite ball contains every perturbed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.stats import qmc

from .errors import UsageError
from .exprlang import ScoreFunction, degree
from .jets import DerivativeTable, derivative_table, saliency_partial
from .moments import (
    abs_moment,
    even_monomial_mean,
    monomial_covariance,
    monomial_second_moment,
    monomial_variance,
)
from .multiindex import MultiIndex, all_even, enumerate_order, factorial, shift, zero


@dataclass(frozen=True)
class SeriesEvaluation:
    """Analytic series value for one coordinate with a per-term breakdown.

    value = head + sum of terms + sum of cross_terms (exactly, by
    construction).  head is the saliency component for SmoothGrad and 0 for
    VarGrad.  terms maps each multi-index to its own contribution;
    cross_terms (VarGrad only) maps index pairs (s, t), s < t, to their
    covariance contributions.  remainder_bound is None until a bound is
    attached.
    """

    coordinate: int
    value: float
    head: float
    terms: Mapping[MultiIndex, float] = field(repr=False)
    cross_terms: Mapping[tuple[MultiIndex, MultiIndex], float] = field(repr=False)
    truncation_order: int
    remainder_bound: float | None = None

    def with_bound(self, bound: float) -> "SeriesEvaluation":
        if bound < 0:
            raise UsageError(f"remainder bound must be >= 0, got {bound}")
        return replace(self, remainder_bound=bound)

    @property
    def terms_total(self) -> float:
        return math.fsum(self.terms.values()) + math.fsum(self.cross_terms.values())


@dataclass(frozen=True)
class Ball:
    """A closed ball around the expansion point with a top-order derivative sup.

    estimation_method is 'exact_zero_polynomial' when the sup is exactly zero
    because the function is a polynomial of low enough degree, 'sampled_sup'
    when it was estimated by sampling.
    """

    center: tuple[float, ...]
    radius: float
    sup_estimate: float | None = None
    estimation_method: str | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise UsageError(f"ball radius must be positive, got {self.radius}")
        if self.sup_estimate is not None and self.sup_estimate < 0:
            raise UsageError(f"sup estimate must be >= 0, got {self.sup_estimate}")

    @property
    def dimension(self) -> int:
        return len(self.center)


def _require_sup(ball: Ball) -> float:
    if ball.sup_estimate is None:
        raise UsageError("ball has no sup estimate; call estimate_derivative_sup first")
    return ball.sup_estimate


def _check_truncation(table: DerivativeTable, l: int, even_required: bool) -> None:
    if l < 2:
        raise UsageError(f"truncation order must be >= 2, got {l}")
    if even_required and l % 2:
        raise UsageError(f"truncation order must be even, got {l}")
    if table.max_order < l + 2:
        raise UsageError(
            f"table max_order {table.max_order} is insufficient; need at least {l + 2}"
        )


def smoothgrad_series(
    table: DerivativeTable, i: int, sigma: float, l: int
) -> SeriesEvaluation:
    """Series value of SmoothGrad for coordinate i (0-based) at truncation l.

    Head term is the saliency component; one term per all-even multi-index of
    each even order 2p <= l.  Odd orders are omitted: their Gaussian means
    vanish.
    """
    _check_truncation(table, l, even_required=False)
    d = table.dimension
    head = saliency_partial(table, i, zero(d))
    terms: dict[MultiIndex, float] = {}
    for p in range(1, l // 2 + 1):
        for s in enumerate_order(d, 2 * p):
            if all_even(s):
                terms[s] = (
                    saliency_partial(table, i, s) / factorial(s) * even_monomial_mean(s, sigma)
                )
    value = head + math.fsum(terms.values())
    return SeriesEvaluation(
        coordinate=i,
        value=value,
        head=head,
        terms=MappingProxyType(terms),
        cross_terms=MappingProxyType({}),
        truncation_order=l,
    )


def vargrad_series(table: DerivativeTable, i: int, sigma: float, l: int) -> SeriesEvaluation:
    """Series value of VarGrad for coordinate i (0-based) at even truncation l.

    The variance of the truncated Taylor polynomial of gradient component i:
    diagonal terms A_s^2 Var(eps^s) for 1 <= |s| <= l (the three parity
    families) plus the cross-covariance terms 2 A_s A_t Cov(eps^s, eps^t)
    for componentwise-parity-matched pairs s < t.  No |s| = 0 term exists, so
    the result is independent of the gradient itself.
    """
    _check_truncation(table, l, even_required=True)
    d = table.dimension
    indices: list[MultiIndex] = []
    for k in range(1, l + 1):
        indices.extend(enumerate_order(d, k))
    coeff = {
        s: saliency_partial(table, i, s) / factorial(s) for s in indices
    }
    terms: dict[MultiIndex, float] = {
        s: coeff[s] ** 2 * monomial_variance(s, sigma) for s in indices
    }
    cross: dict[tuple[MultiIndex, MultiIndex], float] = {}
    for a in range(len(indices)):
        s = indices[a]
        for b in range(a + 1, len(indices)):
            t = indices[b]
            if any((sm + tm) % 2 for sm, tm in zip(s, t)):
                continue
            cross[(s, t)] = 2.0 * coeff[s] * coeff[t] * monomial_covariance(s, t, sigma)
    value = math.fsum(terms.values()) + math.fsum(cross.values())
    return SeriesEvaluation(
        coordinate=i,
        value=value,
        head=0.0,
        terms=MappingProxyType(terms),
        cross_terms=MappingProxyType(cross),
        truncation_order=l,
    )


def smoothgrad_remainder_bound(ball: Ball, sigma: float, l: int) -> float:
    """Bound on the SmoothGrad truncation remainder at order l.

    sum over |s| = l+1 of C/s! times the product of per-coordinate absolute
    moments E[|eps^s_m|].  Exactly 0 when the sup C is exactly 0.
    """
    if l < 2:
        raise UsageError(f"truncation order must be >= 2, got {l}")
    sup = _require_sup(ball)
    d = ball.dimension
    parts = []
    for s in enumerate_order(d, l + 1):
        moment = 1.0
        for sm in s:
            moment *= abs_moment(sm, sigma)
        parts.append(sup / factorial(s) * moment)
    return math.fsum(parts)


@dataclass(frozen=True)
class VarGradRemainder:
    """The three VarGrad remainder bounds; the reported total is r1 + 2 r2 + 2 r3."""

    r1: float
    r2: float
    r3: float

    @property
    def total(self) -> float:
        return self.r1 + 2.0 * self.r2 + 2.0 * self.r3


def vargrad_remainder_bounds(
    table: DerivativeTable, i: int, ball: Ball, sigma: float, l: int
) -> VarGradRemainder:
    """Bounds (R1, R2, R3) on the VarGrad truncation remainder at even l.

    R1 bounds the variance of the order-(l+1) remainder itself; R2 and R3
    bound its covariances with the retained odd-order and even-order terms.
    All three vanish when the sup C is exactly 0.
    """
    _check_truncation(table, l, even_required=True)
    sup = _require_sup(ball)
    d = table.dimension
    betas = enumerate_order(d, l + 1)
    r1 = math.fsum(
        (sup / factorial(s)) ** 2 * monomial_second_moment(s, sigma) for s in betas
    )
    beta_factor = math.fsum(
        sup / factorial(b) * math.sqrt(monomial_second_moment(b, sigma)) for b in betas
    )
    odd_parts = []
    even_parts = []
    for k in range(1, l + 1):
        for a in enumerate_order(d, k):
            weight = abs(saliency_partial(table, i, a)) / factorial(a) * math.sqrt(
                monomial_variance(a, sigma)
            )
            (odd_parts if k % 2 else even_parts).append(weight)
    r2 = math.fsum(odd_parts) * beta_factor
    r3 = math.fsum(even_parts) * beta_factor
    return VarGradRemainder(r1=r1, r2=r2, r3=r3)


def estimate_derivative_sup(
    f: ScoreFunction,
    i: int,
    ball: Ball,
    order: int,
    samples: int = 64,
    seed: int = 0,
) -> Ball:
    """Fill ball.sup_estimate with C ~= sup over the ball of |D^a M_i|, |a| = order.

    Polynomial f with degree <= order has all order-(order+1) partials
    identically zero: the sup is exactly 0 ('exact_zero_polynomial').
    Otherwise the maximum over `samples` quasi-uniform (scrambled Sobol)
    points in the ball, plus the center, over all |a| = order, times a 1.5
    safety factor ('sampled_sup').  Deterministic for a fixed seed.
    """
    if order < 1:
        raise UsageError(f"derivative order must be >= 1, got {order}")
    if samples < 1:
        raise UsageError(f"sample count must be >= 1, got {samples}")
    deg = degree(f)
    if deg is not None and deg <= order:
        return replace(ball, sup_estimate=0.0, estimation_method="exact_zero_polynomial")

    d = ball.dimension
    center = np.asarray(ball.center)
    points = [center]
    sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
    while len(points) < samples + 1:
        batch = 2.0 * sampler.random(128) - 1.0  # [-1, 1)^d
        inside = batch[np.einsum("ij,ij->i", batch, batch) <= 1.0]
        for row in inside:
            points.append(center + ball.radius * row)
            if len(points) == samples + 1:
                break

    alphas = enumerate_order(d, order)
    best = 0.0
    for y in points:
        table = derivative_table(f, y, order + 1)
        for alpha in alphas:
            best = max(best, abs(table.partial(shift(alpha, i))))
    return replace(ball, sup_estimate=1.5 * best, estimation_method="sampled_sup")
