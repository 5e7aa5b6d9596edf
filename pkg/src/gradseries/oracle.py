"""Independent exact ground truth for polynomial score functions.

For polynomial f the Taylor expansion of gradient component i around x is
finite and exact:

    M_i(x + eps) = sum_s T_s eps^s,   T_s = D^(s + e_i) f(x) / s!

so the large-sample SmoothGrad and VarGrad values have closed forms obtained
by applying Gaussian product moments termwise:

    E[M_i(x + eps)]   = sum_s T_s E[eps^s]
    Var(M_i(x + eps)) = E[W^2] - E[W]^2,   W = M_i(x + eps) - M_i(x)

where W's square is expanded symbolically in eps (a full coefficient
convolution) before taking moments.  Subtracting the constant term first
leaves the variance unchanged and avoids cancellation between large
E[M^2] and E[M]^2.

This path deliberately does not share the series module's parity-filtered
term enumeration: it expands every term and lets the product moment zero the
odd ones, which is what makes agreement between the two paths a meaningful
check.  The executable sample inequalities of the bounded-variance and
covariance lemmas live here too.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import UsageError
from .exprlang import ScoreFunction, degree
from .jets import derivative_table, saliency_partial
from .moments import product_moment
from .multiindex import MultiIndex, add, enumerate_up_to, factorial

_SLACK = 1e-12


def _taylor_coefficients(f: ScoreFunction, x, i: int) -> dict[MultiIndex, float]:
    """Exact eps-expansion coefficients T_s of gradient component i at x."""
    deg = degree(f)
    if deg is None:
        raise UsageError("exact oracle requires a polynomial score function")
    d = len(x)
    table = derivative_table(f, x, max(deg, 1))
    return {
        s: saliency_partial(table, i, s) / factorial(s)
        for s in enumerate_up_to(d, max(deg - 1, 0))
    }


def exact_smoothgrad(f: ScoreFunction, x, i: int, sigma: float) -> float:
    """Exact large-sample SmoothGrad value for coordinate i (0-based)."""
    coeffs = _taylor_coefficients(f, x, i)
    return math.fsum(t * product_moment(s, sigma) for s, t in coeffs.items())


def exact_vargrad(f: ScoreFunction, x, i: int, sigma: float) -> float:
    """Exact large-sample VarGrad value for coordinate i (0-based)."""
    coeffs = _taylor_coefficients(f, x, i)
    zero_key = next(iter(coeffs))
    centered = dict(coeffs)
    centered[(0,) * len(zero_key)] = 0.0

    mean = math.fsum(t * product_moment(s, sigma) for s, t in centered.items())
    items = list(centered.items())
    square_parts = []
    for s, ts in items:
        for t, tt in items:
            square_parts.append(ts * tt * product_moment(add(s, t), sigma))
    second = math.fsum(square_parts)
    return max(second - mean * mean, 0.0)


def check_variance_bound(x_bound: float, samples_x, samples_y) -> bool:
    """Sample form of Var(XY) <= C^2 Var(Y) for |X| < C and centered Y.

    Population variances (divisor n).  Raises a usage error when a sample of
    X violates the bound or Y is visibly uncentered (both are preconditions,
    not lemma failures).  The inequality is checked with 1e-12 slack.
    """
    xs = np.asarray(samples_x, dtype=float)
    ys = np.asarray(samples_y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 1:
        raise UsageError("samples must be equal-length 1-d arrays")
    if not np.all(np.abs(xs) < x_bound):
        raise UsageError(f"a sample of X violates |x| < {x_bound}")
    if abs(float(np.mean(ys))) > 1e-6 * (float(np.std(ys)) + 1.0):
        raise UsageError("Y samples are not empirically centered")
    lhs = float(np.var(xs * ys))
    rhs = x_bound**2 * float(np.var(ys))
    return lhs <= rhs + _SLACK


def check_cov_bound(samples_x, samples_y) -> bool:
    """Sample Cauchy-Schwarz: |Cov(X, Y)| <= sqrt(Var(X) Var(Y)) + 1e-12 slack.

    Population statistics; holds for every sample set satisfying the
    preconditions (>= 2 samples, equal lengths).
    """
    xs = np.asarray(samples_x, dtype=float)
    ys = np.asarray(samples_y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise UsageError("samples must be equal-length 1-d arrays")
    if xs.size < 2:
        raise UsageError("need at least 2 samples")
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    cov = float(np.mean(xc * yc))
    bound = math.sqrt(float(np.mean(xc * xc)) * float(np.mean(yc * yc)))
    return abs(cov) <= bound + _SLACK
