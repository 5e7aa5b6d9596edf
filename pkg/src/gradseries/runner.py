"""Batch experiment execution: estimator-vs-series comparisons and the lemma suite.

run_compare evaluates, for every requested coordinate and every (sigma, n)
sweep cell: the saliency, both Monte Carlo estimators, both analytic series
values, and both remainder bounds.  Each cell samples with a fresh seed
derived from (master seed, sigma index, n index), so cells are independent
experiments and can run on any number of workers without changing a byte of
the report.  A Monte Carlo row's within_bound flag checks

    |mc - series| <= max(5 * SE, remainder bound) + 1e-12 * max(1, |series|)

(the tiny absolute slack only matters in degenerate zero-noise cells).

run_lemma_suite turns the moment identities into pass/fail report rows:
closed-form even and absolute moments against Monte Carlo, odd-moment
vanishing, the bounded-variance and covariance inequalities on fuzzed sample
sets, and non-negativity of the variance bracket.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import DimensionMismatchError
from .estimators import NoiseSpec, derive_seed, gaussian_noise, mc_attributions
from .exprlang import parse
from .jets import derivative_table, saliency_partial
from .moments import abs_moment, even_moment, monomial_variance, product_moment
from .multiindex import all_even, enumerate_order, zero
from .oracle import check_cov_bound, check_variance_bound
from .report import Report, ReportRow
from .series import (
    Ball,
    estimate_derivative_sup,
    smoothgrad_remainder_bound,
    smoothgrad_series,
    vargrad_remainder_bounds,
    vargrad_series,
)

_METHOD_RANK = {
    "saliency": 0,
    "smoothgrad_mc": 1,
    "vargrad_mc": 2,
    "smoothgrad_series": 3,
    "vargrad_series": 4,
}


def _within(disc: float, se: float, bound: float, series_value: float) -> bool:
    return bool(disc <= max(5.0 * se, bound) + 1e-12 * max(1.0, abs(series_value)))


def run_compare(config: ExperimentConfig, workers: int = 1) -> Report:
    """Execute a comparison experiment; deterministic given the config."""
    start = time.perf_counter()
    f = parse(config.function)
    d = config.dimension
    if d < f.dimension:
        raise DimensionMismatchError(
            f"function references x{f.dimension} but point has dimension {d}"
        )
    l = config.truncation_l
    x = config.point
    table = derivative_table(f, x, l + 2)
    coords = config.coordinate_indices()

    balls = {
        i: estimate_derivative_sup(
            f,
            i,
            Ball(center=x, radius=config.ball_radius),
            order=l + 1,
            seed=derive_seed(config.seed, "sup", i),
        )
        for i in coords
    }
    series = {}
    for i in coords:
        sal = saliency_partial(table, i, zero(d))
        for sigma in config.sigma:
            sg = smoothgrad_series(table, i, sigma, l).with_bound(
                smoothgrad_remainder_bound(balls[i], sigma, l)
            )
            vg = vargrad_series(table, i, sigma, l).with_bound(
                vargrad_remainder_bounds(table, i, balls[i], sigma, l).total
            )
            series[(i, sigma)] = (sal, sg, vg)

    cells = [
        (si, sigma, ni, n)
        for si, sigma in enumerate(config.sigma)
        for ni, n in enumerate(config.n)
    ]

    def run_cell(cell):
        si, sigma, ni, n = cell
        noise = NoiseSpec(sigma=sigma, n=n, seed=derive_seed(config.seed, si, ni))
        sg_mc, vg_mc = mc_attributions(f, x, noise)
        rows = []
        for i in coords:
            sal, sg, vg = series[(i, sigma)]
            label = f"x{i + 1}"
            sg_disc = float(abs(sg_mc.values[i] - sg.value))
            vg_disc = float(abs(vg_mc.values[i] - vg.value))
            rows.append(ReportRow(coordinate=label, sigma=sigma, n=n, method="saliency", value=sal))
            rows.append(
                ReportRow(
                    coordinate=label,
                    sigma=sigma,
                    n=n,
                    method="smoothgrad_mc",
                    value=float(sg_mc.values[i]),
                    standard_error=float(sg_mc.standard_error[i]),
                    series_value=sg.value,
                    remainder_bound=sg.remainder_bound,
                    discrepancy=sg_disc,
                    within_bound=_within(
                        sg_disc, float(sg_mc.standard_error[i]), sg.remainder_bound, sg.value
                    ),
                )
            )
            rows.append(
                ReportRow(
                    coordinate=label,
                    sigma=sigma,
                    n=n,
                    method="vargrad_mc",
                    value=float(vg_mc.values[i]),
                    standard_error=float(vg_mc.standard_error[i]),
                    series_value=vg.value,
                    remainder_bound=vg.remainder_bound,
                    discrepancy=vg_disc,
                    within_bound=_within(
                        vg_disc, float(vg_mc.standard_error[i]), vg.remainder_bound, vg.value
                    ),
                )
            )
            rows.append(
                ReportRow(
                    coordinate=label,
                    sigma=sigma,
                    n=n,
                    method="smoothgrad_series",
                    value=sg.value,
                    series_value=sg.value,
                    remainder_bound=sg.remainder_bound,
                )
            )
            rows.append(
                ReportRow(
                    coordinate=label,
                    sigma=sigma,
                    n=n,
                    method="vargrad_series",
                    value=vg.value,
                    series_value=vg.value,
                    remainder_bound=vg.remainder_bound,
                )
            )
        return rows

    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(run_cell, cells))
    else:
        groups = [run_cell(cell) for cell in cells]

    rows = [row for group in groups for row in group]
    rows.sort(
        key=lambda r: (int(r.coordinate[1:]), r.sigma, r.n, _METHOD_RANK[r.method])
    )
    return Report(
        config=config.as_dict(),
        version=__version__,
        wall_time_s=time.perf_counter() - start,
        rows=tuple(rows),
    )


# --------------------------------------------------------------------------
# Lemma suite


def _mc_row(method: str, samples: np.ndarray, expected: float, n: int) -> ReportRow:
    mc = float(samples.mean())
    se = float(samples.std()) / math.sqrt(n)
    disc = abs(mc - expected)
    return ReportRow(
        coordinate="-",
        sigma=1.0,
        n=n,
        method=method,
        value=mc,
        standard_error=se,
        series_value=expected,
        discrepancy=disc,
        within_bound=disc < 5.0 * se,
    )


def run_lemma_suite(seed: int = 0, n: int = 1_000_000) -> Report:
    """Pass/fail rows for the executable moment and inequality lemmas."""
    start = time.perf_counter()
    rows: list[ReportRow] = []

    eps = gaussian_noise(1.0, derive_seed(seed, "scalar"), 1, 0, n)[:, 0]
    for s in range(1, 5):
        rows.append(_mc_row(f"even_moment_order_{2 * s}", eps ** (2 * s), even_moment(s, 1.0), n))
    for s in range(1, 9):
        rows.append(_mc_row(f"abs_moment_order_{s}", np.abs(eps**s), abs_moment(s, 1.0), n))
    for s in (1, 3, 5, 7):
        rows.append(_mc_row(f"odd_moment_order_{s}", eps**s, 0.0, n))

    pair = gaussian_noise(1.0, derive_seed(seed, "pair"), 2, 0, n)
    for s in ((1, 2), (3, 2), (1, 1)):
        samples = pair[:, 0] ** s[0] * pair[:, 1] ** s[1]
        rows.append(_mc_row(f"product_moment_{s}", samples, product_moment(s, 1.0), n))

    agreement = max(
        abs(abs_moment(2 * s, sigma) - even_moment(s, sigma))
        for s in range(0, 5)
        for sigma in (0.5, 1.0, 2.0)
    )
    rows.append(
        ReportRow(
            coordinate="-",
            sigma=1.0,
            n=0,
            method="abs_even_moment_agreement",
            value=agreement,
            series_value=0.0,
            discrepancy=agreement,
            within_bound=agreement <= 1e-12,
        )
    )

    rng = np.random.default_rng(derive_seed(seed, "fuzz") % (1 << 63))
    sets = 1000
    var_ok = 0
    for _ in range(sets):
        size = int(rng.integers(16, 257))
        bound = float(rng.uniform(0.5, 3.0))
        xs = rng.uniform(-bound, bound, size) * 0.999
        ys = rng.normal(0.0, rng.uniform(0.5, 2.0), size)
        ys = ys - ys.mean()
        var_ok += check_variance_bound(bound, xs, ys)
    rows.append(
        ReportRow(
            coordinate="-",
            sigma=1.0,
            n=sets,
            method="variance_product_bound",
            value=float(var_ok),
            series_value=float(sets),
            discrepancy=float(sets - var_ok),
            within_bound=var_ok == sets,
        )
    )

    cov_ok = 0
    for _ in range(sets):
        size = int(rng.integers(2, 257))
        xs = rng.normal(0.0, rng.uniform(0.2, 3.0), size)
        ys = rng.normal(0.0, rng.uniform(0.2, 3.0), size)
        if rng.random() < 0.2:
            ys = xs * rng.uniform(-2, 2)  # exercise the equality case
        cov_ok += check_cov_bound(xs, ys)
    rows.append(
        ReportRow(
            coordinate="-",
            sigma=1.0,
            n=sets,
            method="covariance_cauchy_schwarz",
            value=float(cov_ok),
            series_value=float(sets),
            discrepancy=float(sets - cov_ok),
            within_bound=cov_ok == sets,
        )
    )

    bracket_min = min(
        monomial_variance(s, 1.0)
        for d in range(1, 4)
        for k in range(2, 9, 2)
        for s in enumerate_order(d, k)
        if all_even(s)
    )
    rows.append(
        ReportRow(
            coordinate="-",
            sigma=1.0,
            n=0,
            method="jensen_bracket_nonnegative",
            value=bracket_min,
            series_value=0.0,
            discrepancy=max(0.0, -bracket_min),
            within_bound=bracket_min >= 0.0,
        )
    )

    return Report(
        config={"seed": seed, "n": n},
        version=__version__,
        wall_time_s=time.perf_counter() - start,
        rows=tuple(rows),
    )
