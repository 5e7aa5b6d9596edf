#!/usr/bin/env python3
"""Closed-form Gaussian noise moments against Monte Carlo estimates.

Every series term in this library is weighted by a moment of the noise
monomial eps^s.  This demo prints the closed forms next to sample averages:
even moments E[eps^(2s)], absolute moments E[|eps^s|], the vanishing of odd
product moments, and the positive variance bracket E[(eps^s)^2] - E[eps^s]^2.
"""
import math

import numpy as np

from gradseries import gaussian_noise
from gradseries.moments import (
    abs_moment,
    even_moment,
    even_monomial_mean,
    monomial_second_moment,
    monomial_variance,
    product_moment,
)

n = 2_000_000
sigma = 1.0
eps = gaussian_noise(sigma, seed=1, d=1, start=0, count=n)[:, 0]

print(f"scalar moments of N(0, {sigma}^2), {n:,} samples")
print(f"{'moment':>14} {'closed form':>14} {'monte carlo':>14} {'|z|':>6}")
for s in range(1, 5):
    samples = eps ** (2 * s)
    mc, se = samples.mean(), samples.std() / math.sqrt(n)
    exact = even_moment(s, sigma)
    print(f"{f'E[eps^{2*s}]':>14} {exact:14.6f} {mc:14.6f} {abs(mc - exact) / se:6.2f}")
for s in (1, 3, 5):
    samples = np.abs(eps**s)
    mc, se = samples.mean(), samples.std() / math.sqrt(n)
    exact = abs_moment(s, sigma)
    print(f"{f'E[|eps^{s}|]':>14} {exact:14.6f} {mc:14.6f} {abs(mc - exact) / se:6.2f}")

print("\nodd-component product moments vanish (d = 2):")
pair = gaussian_noise(sigma, seed=2, d=2, start=0, count=n)
for s in [(1, 0), (1, 2), (3, 1)]:
    samples = pair[:, 0] ** s[0] * pair[:, 1] ** s[1]
    mc = samples.mean()
    print(f"  E[eps1^{s[0]} eps2^{s[1]}] = {product_moment(s, sigma):g}   (mc {mc:+.5f})")

print("\nvariance bracket E[(eps^s)^2] - (E[eps^s])^2 stays non-negative:")
for s in [(2,), (4,), (2, 2), (1,), (3, 1)]:
    upsilon = monomial_second_moment(s, sigma)
    mean = even_monomial_mean(s, sigma) if all(c % 2 == 0 for c in s) else 0.0
    print(f"  s={s}: second moment {upsilon:10.4f}  mean^2 {mean**2:10.4f}"
          f"  bracket {monomial_variance(s, sigma):10.4f}")
