"""Goodness-of-fit and aggregation utilities for the verification harness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# asymptotic Kolmogorov critical values; hypothesis-test verdicts require
# n_effective >= MIN_N, below that only the statistic is reported
KS_CRITICAL = {0.05: 1.36, 0.01: 1.63}
MIN_N = 1000


@dataclass(frozen=True)
class KsReport:
    statistic: float
    n_effective: float
    scaled: float
    rejected_at_1pct: bool | None

    def __str__(self):
        verdict = "n/a" if self.rejected_at_1pct is None else ("REJECT" if self.rejected_at_1pct else "ok")
        return f"KS D={self.statistic:.5f} sqrt(n_eff)*D={self.scaled:.3f} [{verdict}]"


def _report(stat: float, n_eff: float) -> KsReport:
    scaled = stat * math.sqrt(n_eff)
    verdict = None if n_eff < MIN_N else bool(scaled > KS_CRITICAL[0.01])
    return KsReport(statistic=stat, n_effective=n_eff, scaled=scaled, rejected_at_1pct=verdict)


def ks_one_sample(samples, cdf) -> KsReport:
    """Sup distance between the empirical CDF and cdf, both one-sided limits."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("ks_one_sample: empty sample")
    f = np.asarray(cdf(xs), dtype=float)
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("ks_one_sample: cdf not monotone on the sample points")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return _report(float(max(d_plus, d_minus)), float(n))


def ks_two_sample(xs, ys) -> KsReport:
    xs = np.sort(np.asarray(xs, dtype=float))
    ys = np.sort(np.asarray(ys, dtype=float))
    n, m = xs.size, ys.size
    if n == 0 or m == 0:
        raise ValueError("ks_two_sample: empty sample")
    allv = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, allv, side="right") / n
    cdf_y = np.searchsorted(ys, allv, side="right") / m
    stat = float(np.max(np.abs(cdf_x - cdf_y)))
    n_eff = n * m / (n + m)
    return _report(stat, n_eff)


def histogram(samples, bins: int, range_=None):
    """Density histogram; bin-width-weighted sum is 1 up to compensated rounding."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("histogram: empty sample")
    if bins < 1:
        raise ValueError("histogram: bins >= 1 required")
    if range_ is None:
        lo, hi = float(samples.min()), float(samples.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = map(float, range_)
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    inside = int(counts.sum())
    widths = np.diff(edges)
    dens = counts / (inside * widths) if inside else counts.astype(float)
    return dens, edges


def auto_range(samples, q: float = 0.001):
    """[q, 1-q] quantile range used for figure-style histograms."""
    samples = np.asarray(samples, dtype=float)
    return float(np.quantile(samples, q)), float(np.quantile(samples, 1 - q))


def mean_ci(samples):
    """(mean, 95% normal-approximation half width)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("mean_ci: empty sample")
    m = float(samples.mean())
    hw = 1.96 * float(samples.std(ddof=1)) / math.sqrt(samples.size) if samples.size > 1 else math.inf
    return m, hw


def chi_square_gof(samples, cdf, bins: int = 20):
    """Chi-square against equal-probability bins of cdf.

    Returns (statistic, threshold_1pct, rejected).  Bin edges come from
    inverting the cdf on a dense grid.
    """
    from scipy.stats import chi2

    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n == 0:
        raise ValueError("chi_square_gof: empty sample")
    lo, hi = samples.min(), samples.max()
    span = hi - lo if hi > lo else 1.0
    grid = np.linspace(lo - 0.2 * span, hi + 0.2 * span, 20001)
    f = np.asarray(cdf(grid), dtype=float)
    probs = np.linspace(0.0, 1.0, bins + 1)[1:-1]
    edges = np.interp(probs, f, grid)
    edges = np.concatenate([[-np.inf], edges, [np.inf]])
    counts, _ = np.histogram(samples, bins=edges)
    expected = n / bins
    stat = float(np.sum((counts - expected) ** 2 / expected))
    thr = float(chi2.ppf(0.99, bins - 1))
    return stat, thr, stat > thr
