import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recordlab import (
    FitError,
    fit_power_law_ls,
    fit_power_law_mle,
    harmonic_number,
    log_binned_histogram,
)
from conftest import sample_discrete_power_law

# Extended-precision value of sum(r**-1.652, r=1..1e6), 25 significant
# digits, computed with mpmath at 40 dps.
H_1E6_1652 = 2.156108230662096599630098


class TestHarmonicNumber:
    def test_single_term(self):
        for alpha in (0.5, 1.0, 1.652, 3.0):
            assert harmonic_number(1, alpha) == 1.0

    def test_analytic_h3(self):
        assert harmonic_number(3, 1.0) == pytest.approx(11.0 / 6.0, rel=1e-15)

    def test_against_extended_precision_oracle(self):
        assert harmonic_number(10**6, 1.652) == pytest.approx(H_1E6_1652, rel=1e-12)

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            harmonic_number(0, 1.5)

    @settings(max_examples=40)
    @given(st.integers(min_value=2, max_value=500), st.floats(min_value=0.5, max_value=4.0))
    def test_increasing_in_n(self, n, alpha):
        assert harmonic_number(n, alpha) > harmonic_number(n - 1, alpha)

    @settings(max_examples=40)
    @given(st.integers(min_value=2, max_value=500), st.floats(min_value=0.5, max_value=3.5))
    def test_decreasing_in_alpha(self, n, alpha):
        assert harmonic_number(n, alpha + 0.25) < harmonic_number(n, alpha)


class TestLogBinnedHistogram:
    def test_all_ones_single_occupied_bin(self):
        hist = log_binned_histogram(np.ones(100, dtype=int))
        assert int((hist.counts > 0).sum()) == 1
        widths = np.diff(hist.bin_edges)
        assert float(np.sum(hist.density * widths)) == pytest.approx(1.0, abs=1e-9)

    def test_normalization(self, rng):
        for _ in range(20):
            ages = rng.integers(1, rng.integers(2, 5000), size=rng.integers(1, 2000))
            hist = log_binned_histogram(ages, bins_per_decade=int(rng.integers(1, 16)))
            widths = np.diff(hist.bin_edges)
            assert float(np.sum(hist.density * widths)) == pytest.approx(1.0, abs=1e-9)
            assert int(hist.counts.sum()) == len(ages)

    def test_empty_bins_retained(self):
        hist = log_binned_histogram(np.array([1, 1000]))
        assert np.any(hist.counts == 0)
        assert len(hist.density) == len(hist.centers) == len(hist.bin_edges) - 1

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            log_binned_histogram(np.array([], dtype=int))

    def test_synthetic_power_law_slope(self, rng):
        ages = sample_discrete_power_law(rng, alpha=1.6, support_max=100_000, size=1_000_000)
        hist = log_binned_histogram(ages, bins_per_decade=8)
        sel = (hist.counts > 0) & (hist.centers >= 1) & (hist.centers <= 1e4)
        x, y = np.log(hist.centers[sel]), np.log(hist.density[sel])
        slope = np.polyfit(x, y, 1)[0]
        assert slope == pytest.approx(-1.6, abs=0.05)


class TestFitPowerLawLS:
    def _analytic_hist(self, alpha=1.5):
        # Noiseless histogram whose density follows the power law exactly.
        hist = log_binned_histogram(np.arange(1, 2000), bins_per_decade=6)
        density = hist.centers ** (-alpha)
        hist.density = density
        hist.counts = np.ones_like(hist.counts)
        return hist

    def test_noiseless_recovery(self):
        fit = fit_power_law_ls(self._analytic_hist(1.5), (1.0, 1e6))
        assert fit.alpha == pytest.approx(1.5, abs=1e-6)
        assert fit.alpha_stderr < 1e-9
        assert fit.method == "logbin_least_squares"

    def test_two_occupied_bins_rejected(self):
        hist = log_binned_histogram(np.array([1, 1, 100, 100]))
        with pytest.raises(ValueError, match="occupied"):
            fit_power_law_ls(hist, (1.0, 1000.0))

    def test_normalization_invariant(self):
        fit = fit_power_law_ls(self._analytic_hist(1.7), (1.0, 1e6))
        total = fit.normalization_A * harmonic_number(fit.support_max, fit.alpha)
        assert total == pytest.approx(1.0, abs=1e-9)


class TestFitPowerLawMLE:
    def test_synthetic_recovery(self, rng):
        ages = sample_discrete_power_law(rng, alpha=1.652, support_max=10_000, size=1_000_000)
        fit = fit_power_law_mle(ages, support_max=10_000)
        assert fit.alpha == pytest.approx(1.652, abs=0.01)
        assert fit.converged
        assert 0 < fit.alpha_stderr < 0.01

    def test_consistency_improves_with_sample_size(self, rng):
        errors = []
        for size in (10_000, 1_000_000):
            ages = sample_discrete_power_law(rng, alpha=2.0, support_max=5_000, size=size)
            errors.append(abs(fit_power_law_mle(ages, 5_000).alpha - 2.0))
        assert errors[-1] < 0.01

    def test_all_ones_pinned_at_upper_bracket(self):
        with pytest.warns(UserWarning, match="pinned"):
            fit = fit_power_law_mle(np.ones(50, dtype=int), support_max=100)
        assert fit.alpha == 5.0
        assert not fit.converged

    def test_single_sample_flagged(self):
        with pytest.warns(UserWarning, match="single sample"):
            fit = fit_power_law_mle(np.array([3]), support_max=100)
        assert np.isinf(fit.alpha_stderr)

    def test_shallow_sample_raises(self, rng):
        # Near-uniform ages push the exponent to 1 or below: not normalizable.
        ages = rng.integers(900, 1000, size=5000)
        with pytest.raises(FitError, match="lower bound"):
            fit_power_law_mle(ages, support_max=1000)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            fit_power_law_mle(np.array([], dtype=int), 100)
        with pytest.raises(ValueError):
            fit_power_law_mle(np.array([101]), 100)
        with pytest.raises(ValueError):
            fit_power_law_mle(np.array([0]), 100)

    def test_normalization_invariant(self, rng):
        ages = sample_discrete_power_law(rng, alpha=1.8, support_max=2_000, size=20_000)
        fit = fit_power_law_mle(ages, support_max=2_000)
        total = fit.normalization_A * harmonic_number(2_000, fit.alpha)
        assert total == pytest.approx(1.0, abs=1e-9)
