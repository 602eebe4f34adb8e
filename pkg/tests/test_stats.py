import math

import numpy as np
import pytest

from skewsim.numerics import RngStream
from skewsim.stats import (
    auto_range,
    chi_square_gof,
    histogram,
    ks_one_sample,
    ks_two_sample,
    mean_ci,
)


class TestKsOneSample:
    def test_calibration_under_null(self):
        u = RngStream(1000, 0).uniforms(100_000)
        rep = ks_one_sample(u, lambda v: np.clip(v, 0, 1))
        assert rep.scaled < 1.63
        assert rep.rejected_at_1pct is False

    def test_constant_sample_rejected(self):
        rep = ks_one_sample(np.full(5000, 0.5), lambda v: np.clip(v, 0, 1))
        assert rep.statistic >= 0.5
        assert rep.rejected_at_1pct is True

    def test_small_sample_no_verdict(self):
        rep = ks_one_sample(np.linspace(0.01, 0.99, 50), lambda v: np.clip(v, 0, 1))
        assert rep.rejected_at_1pct is None

    def test_non_monotone_cdf_detected(self):
        with pytest.raises(ValueError):
            ks_one_sample(np.linspace(0, 1, 100), lambda v: np.sin(8 * np.asarray(v)))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ks_one_sample([], lambda v: v)

    def test_statistic_in_unit_interval(self):
        rep = ks_one_sample(RngStream(2, 0).uniforms(5000), lambda v: np.clip(v, 0, 1))
        assert 0.0 <= rep.statistic <= 1.0


class TestKsTwoSample:
    def test_identical_vectors(self):
        x = RngStream(3, 0).normals(2000)
        rep = ks_two_sample(x, x.copy())
        assert rep.statistic == 0.0

    def test_null_calibration(self):
        x = RngStream(4, 0).normals(50_000)
        y = RngStream(4, 1).normals(50_000)
        rep = ks_two_sample(x, y)
        assert rep.rejected_at_1pct is False

    def test_distinguishes_shift(self):
        x = RngStream(5, 0).normals(20_000)
        y = RngStream(5, 1).normals(20_000) + 0.1
        rep = ks_two_sample(x, y)
        assert rep.rejected_at_1pct is True

    def test_n_effective(self):
        rep = ks_two_sample(np.arange(100.0), np.arange(300.0))
        assert rep.n_effective == pytest.approx(75.0)


class TestHistogram:
    def test_uniform_flat(self):
        u = RngStream(6, 0).uniforms(1_000_000)
        dens, edges = histogram(u, 20, (0.0, 1.0))
        assert np.all(np.abs(dens - 1.0) < 0.02)

    def test_density_normalization_compensated(self):
        x = RngStream(7, 0).normals(100_000)
        dens, edges = histogram(x, 200)
        total = math.fsum(d * w for d, w in zip(dens, np.diff(edges)))
        assert abs(total - 1.0) <= 1e-12

    def test_empty_and_bad_bins(self):
        with pytest.raises(ValueError):
            histogram([], 10)
        with pytest.raises(ValueError):
            histogram([1.0], 0)

    def test_auto_range(self):
        x = RngStream(8, 0).normals(100_000)
        lo, hi = auto_range(x)
        assert -3.5 < lo < -2.7 and 2.7 < hi < 3.5


class TestMeanCi:
    def test_binomial_arithmetic(self):
        # indicator with p ~ 0.28 at n = 1e5: half-width ~ 1.96 sqrt(p q / n)
        u = RngStream(9, 0).uniforms(100_000)
        ind = (u < 0.28).astype(float)
        m, hw = mean_ci(ind)
        assert m == pytest.approx(0.28, abs=0.006)
        assert hw == pytest.approx(1.96 * math.sqrt(0.28 * 0.72 / 100_000), rel=0.02)
        assert hw == pytest.approx(0.0028, abs=0.0002)

    def test_empty(self):
        with pytest.raises(ValueError):
            mean_ci([])


class TestChiSquare:
    def test_calibration(self):
        from scipy.stats import norm

        x = RngStream(10, 0).normals(50_000)
        stat, thr, rejected = chi_square_gof(x, lambda v: norm.cdf(v), bins=20)
        assert not rejected
        assert thr == pytest.approx(36.19, abs=0.01)

    def test_detects_wrong_null(self):
        from scipy.stats import norm

        x = RngStream(11, 0).normals(50_000) * 1.2
        _, _, rejected = chi_square_gof(x, lambda v: norm.cdf(v), bins=20)
        assert rejected
