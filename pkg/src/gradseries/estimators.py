"""Monte Carlo SmoothGrad and VarGrad over smooth score functions.

SmoothGrad is the per-coordinate mean, and VarGrad the per-coordinate
population variance (divisor n), of gradient samples taken at Gaussian
perturbations of the input:

    smoothgrad = 1/n * sum_k grad f(x + eps_k)
    vargrad    = 1/n * sum_k grad f(x + eps_k)^2 - smoothgrad_core^2

Reproducibility contract: noise sample k is a pure function of (seed, k).
The uint64 stream of a Philox counter-based generator keyed by the master
seed is mapped to uniforms u = ((word >> 11) + 0.5) * 2^-53 and then through
the normal inverse CDF, so eps[k, m] = sigma * Phi^{-1}(u[k*d + m]).  Any
slice of the sample range can be regenerated independently; accumulation is
blocked with fixed block boundaries and block partial sums are combined with
exact summation (math.fsum), so results are bitwise independent of any
parallel schedule.

Additive affine terms of the score function contribute a constant to the
gradient, so they shift every gradient sample by exactly the same vector:
they cannot affect the variance and shift the mean by exactly their slope.
The estimators make this identity structural by splitting those terms off
before sampling and adding the slope back to the mean afterwards; VarGrad is
then bitwise invariant under adding any affine function, and SmoothGrad
shifts by the exact slope.  A sigma of 0 degenerates to plain saliency
(SmoothGrad) and the zero vector (VarGrad), with zero standard errors.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtri

from .errors import DimensionMismatchError, NumericError, UsageError
from .exprlang import (
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
    flatten_terms,
    from_root,
    rebuild_terms,
    term_degree,
)
from .jets import _propagate, saliency
from .multiindex import unit

_BLOCK = 1 << 16  # fixed block size; part of the bitwise reproducibility contract
_MAX_SEED = 1 << 64


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise parameters: standard deviation, sample count, master seed."""

    sigma: float
    n: int
    seed: int

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise UsageError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not isinstance(self.n, int) or self.n < 1:
            raise UsageError(f"sample count must be an integer >= 1, got {self.n!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < _MAX_SEED:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class AttributionVector:
    """Per-coordinate attribution values with optional standard errors.

    method is one of 'saliency', 'smoothgrad_mc', 'vargrad_mc', 'series'.
    standard_error is None for exact (deterministic) results.
    """

    values: np.ndarray
    standard_error: np.ndarray | None
    method: str

    def __post_init__(self):
        self.values.flags.writeable = False
        if self.standard_error is not None:
            self.standard_error.flags.writeable = False


def derive_seed(master: int, *parts) -> int:
    """A fresh 64-bit seed derived deterministically from a master seed and labels."""
    digest = hashlib.sha256(repr((master,) + parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


# --------------------------------------------------------------------------
# Counter-based noise stream


def _raw_stream(seed: int, start: int, count: int) -> np.ndarray:
    """uint64 words [start, start+count) of the Philox stream keyed by seed."""
    bg = np.random.Philox(key=seed)
    skip, rem = divmod(start, 4)  # Philox emits 4 words per counter increment
    if skip:
        bg.advance(skip)
    raw = bg.random_raw(rem + count)
    return raw[rem:]


def gaussian_noise(sigma: float, seed: int, d: int, start: int, count: int) -> np.ndarray:
    """Noise rows [start, start+count) as a (count, d) array.

    Row k is a pure function of (seed, k): coordinate m uses stream word
    k*d + m, mapped to (0,1) by u = ((word >> 11) + 0.5) * 2^-53 and then
    through the inverse normal CDF, scaled by sigma.
    """
    raw = _raw_stream(seed, start * d, count * d)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return (sigma * ndtri(u)).reshape(count, d)


# --------------------------------------------------------------------------
# Batched forward-mode gradients


def _np_ipow(v: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(v)
    base = v
    while k:
        if k & 1:
            out = out * base
        k >>= 1
        if k:
            base = base * base
    return out


def _batch_value_grad(node: Node, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward-mode values and gradients of a node over a (n, d) batch."""
    n, d = X.shape
    match node:
        case Const(value=v):
            return np.full(n, v), np.zeros((n, d))
        case Var(index=i):
            grad = np.zeros((n, d))
            grad[:, i - 1] = 1.0
            return X[:, i - 1].copy(), grad
        case Neg(arg=a):
            val, grad = _batch_value_grad(a, X)
            return -val, -grad
        case Add(left=l, right=r):
            lv, lg = _batch_value_grad(l, X)
            rv, rg = _batch_value_grad(r, X)
            return lv + rv, lg + rg
        case Sub(left=l, right=r):
            lv, lg = _batch_value_grad(l, X)
            rv, rg = _batch_value_grad(r, X)
            return lv - rv, lg - rg
        case Mul(left=l, right=r):
            lv, lg = _batch_value_grad(l, X)
            rv, rg = _batch_value_grad(r, X)
            return lv * rv, lg * rv[:, None] + lv[:, None] * rg
        case Pow(base=b, exponent=k):
            bv, bg = _batch_value_grad(b, X)
            if k == 0:
                return np.ones(n), np.zeros((n, d))
            p = _np_ipow(bv, k - 1)
            return p * bv, (k * p)[:, None] * bg
        case Call(func=name, arg=a):
            av, ag = _batch_value_grad(a, X)
            if name == "exp":
                val = np.exp(av)
                dv = val
            elif name == "tanh":
                val = np.tanh(av)
                dv = 1.0 - val * val
            elif name == "sin":
                val = np.sin(av)
                dv = np.cos(av)
            elif name == "cos":
                val = np.cos(av)
                dv = -np.sin(av)
            elif name == "sigmoid":
                val = expit(av)
                dv = val * (1.0 - val)
            elif name == "softplus":
                val = np.logaddexp(0.0, av)
                dv = expit(av)
            else:
                raise UsageError(f"unknown function {name!r}")
            return val, dv[:, None] * ag
    raise TypeError(f"unknown node {node!r}")


# --------------------------------------------------------------------------
# Affine decomposition


@dataclass(frozen=True)
class AffineSplit:
    """Score function split as core + affine, with the affine gradient (slope)."""

    core: ScoreFunction | None
    slope: np.ndarray


def split_affine(f: ScoreFunction, d: int) -> AffineSplit:
    """Strip top-level additive terms of polynomial degree <= 1.

    The remaining core carries all the gradient variability; the removed
    terms contribute exactly their constant slope to every gradient sample.
    """
    core_terms = []
    slope = np.zeros(d)
    for sign, term in flatten_terms(f.root):
        deg = term_degree(term)
        if deg is not None and deg <= 1:
            if deg == 1:
                slope = slope + sign * _constant_gradient(term, d)
        else:
            core_terms.append((sign, term))
    root = rebuild_terms(core_terms)
    core = from_root(root) if root is not None else None
    return AffineSplit(core=core, slope=slope)


def _constant_gradient(term: Node, d: int) -> np.ndarray:
    """Gradient of an affine term (constant everywhere), read off a 1-jet at 0."""
    jet = _propagate(term, (0.0,) * d, d, 1)
    return np.array([jet.coeffs.get(unit(d, i), 0.0) for i in range(d)])


# --------------------------------------------------------------------------
# Estimators


def _zero_noise_results(f: ScoreFunction, x) -> tuple[AttributionVector, AttributionVector]:
    values = saliency(f, x)
    d = len(values)
    sg = AttributionVector(values=values, standard_error=np.zeros(d), method="smoothgrad_mc")
    vg = AttributionVector(values=np.zeros(d), standard_error=np.zeros(d), method="vargrad_mc")
    return sg, vg


def mc_attributions(f: ScoreFunction, x, noise: NoiseSpec) -> tuple[AttributionVector, AttributionVector]:
    """One sampling pass yielding the (smoothgrad, vargrad) pair."""
    point = np.asarray([float(v) for v in x])
    d = len(point)
    if d < f.dimension:
        raise DimensionMismatchError(
            f"function references x{f.dimension} but point has dimension {d}"
        )
    if noise.sigma == 0.0:
        return _zero_noise_results(f, x)

    split = split_affine(f, d)
    if split.core is None:
        sg = AttributionVector(
            values=split.slope.copy(), standard_error=np.zeros(d), method="smoothgrad_mc"
        )
        vg = AttributionVector(
            values=np.zeros(d), standard_error=np.zeros(d), method="vargrad_mc"
        )
        return sg, vg

    core = split.core.root
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        _, anchor2d = _batch_value_grad(core, point[None, :])
    anchor = anchor2d[0]
    if not np.isfinite(anchor).all():
        raise NumericError("non-finite gradient at the expansion point")

    n = noise.n
    sums: list[list[np.ndarray]] = [[], [], [], []]
    for start in range(0, n, _BLOCK):
        count = min(_BLOCK, n - start)
        eps = gaussian_noise(noise.sigma, noise.seed, d, start, count)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            _, grads = _batch_value_grad(core, point[None, :] + eps)
        finite = np.isfinite(grads).all(axis=1)
        if not finite.all():
            bad = start + int(np.argmin(finite))
            raise NumericError(f"non-finite gradient sample at index {bad}")
        w = grads - anchor[None, :]
        w2 = w * w
        sums[0].append(w.sum(axis=0))
        sums[1].append(w2.sum(axis=0))
        sums[2].append((w2 * w).sum(axis=0))
        sums[3].append((w2 * w2).sum(axis=0))

    # exact (correctly rounded) combination of block partial sums, per coordinate
    moments = np.empty((4, d))
    for p in range(4):
        for m in range(d):
            moments[p, m] = math.fsum(block[m] for block in sums[p])
    q1, q2, q3, q4 = moments / n

    mean_w = q1
    var = np.maximum(q2 - mean_w**2, 0.0)
    m4 = q4 - 4.0 * mean_w * q3 + 6.0 * mean_w**2 * q2 - 3.0 * mean_w**4
    se_mean = np.sqrt(var / n)
    se_var = np.sqrt(np.maximum(m4 - var**2, 0.0) / n)

    sg_values = (anchor + mean_w) + split.slope
    sg = AttributionVector(values=sg_values, standard_error=se_mean, method="smoothgrad_mc")
    vg = AttributionVector(values=var, standard_error=se_var, method="vargrad_mc")
    return sg, vg


def smoothgrad_mc(f: ScoreFunction, x, noise: NoiseSpec) -> AttributionVector:
    """Mean of gradient samples at Gaussian-perturbed inputs.

    standard_error is the per-coordinate sample standard deviation (divisor
    n) over sqrt(n).  sigma = 0 returns the saliency exactly with zero
    standard error.
    """
    return mc_attributions(f, x, noise)[0]


def vargrad_mc(
    f: ScoreFunction, x, noise: NoiseSpec, corrected: bool = False
) -> AttributionVector:
    """Per-coordinate population variance (divisor n) of gradient samples.

    With corrected=True the Bessel-corrected (divisor n-1) variance is
    returned instead, requiring n >= 2.  standard_error is the asymptotic
    sqrt((m4 - var^2)/n) from the fourth central moment.  sigma = 0 (or an
    affine score function) yields the zero vector exactly.
    """
    vg = mc_attributions(f, x, noise)[1]
    if not corrected:
        return vg
    if noise.n < 2:
        raise UsageError("corrected variance requires n >= 2")
    factor = noise.n / (noise.n - 1)
    return AttributionVector(
        values=vg.values * factor,
        standard_error=None if vg.standard_error is None else vg.standard_error * factor,
        method=vg.method,
    )


def paired_run(
    f: ScoreFunction, g: ScoreFunction, x, noise: NoiseSpec
) -> tuple[tuple[AttributionVector, AttributionVector], tuple[AttributionVector, AttributionVector]]:
    """(smoothgrad, vargrad) for f and for g under identical noise realizations.

    When g differs from f by an affine function the two vargrad results are
    bitwise identical and the smoothgrad results differ by exactly the affine
    slope (see the module docstring).
    """
    if f.dimension != g.dimension:
        raise DimensionMismatchError(
            f"paired functions have dimensions {f.dimension} and {g.dimension}"
        )
    return mc_attributions(f, x, noise), mc_attributions(g, x, noise)
