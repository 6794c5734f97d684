import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recordlab import (
    CsvParseError,
    ReturnStats,
    TimeSeries,
    estimate_params,
    log_returns,
    parse_daily_csv,
    portfolio_mean_params,
    serialize_daily_csv,
    window,
)
from conftest import daily_csv_bytes


class TestTimeSeries:
    def test_dates_must_align(self):
        with pytest.raises(ValueError):
            TimeSeries(values=[1.0, 2.0], dates=(dt.date(2020, 1, 2),))

    def test_dates_must_increase(self):
        with pytest.raises(ValueError):
            TimeSeries(values=[1.0, 2.0], dates=(dt.date(2020, 1, 2), dt.date(2020, 1, 2)))


class TestParseDailyCsv:
    def test_three_row_file(self):
        data = daily_csv_bytes(
            [("2020-01-02", "9.0", "10.0"), ("2020-01-03", "9.5", "10.5"), ("2020-01-06", "9.1", "10.2")]
        )
        series = parse_daily_csv(data, label="DEMO")
        assert series.values.tolist() == [10.0, 10.5, 10.2]
        assert series.label == "DEMO"
        assert series.dates[0] == dt.date(2020, 1, 2)

    def test_close_policy_selects_other_column(self):
        data = daily_csv_bytes([("2020-01-02", "9.0", "10.0"), ("2020-01-03", "9.5", "10.5")])
        series = parse_daily_csv(data, column_policy="close")
        assert series.values.tolist() == [9.0, 9.5]

    def test_rows_sorted_chronologically(self):
        data = daily_csv_bytes([("2020-01-03", "2.0", "2.0"), ("2020-01-02", "1.0", "1.0")])
        series = parse_daily_csv(data)
        assert series.values.tolist() == [1.0, 2.0]

    def test_invalid_calendar_date_names_line(self):
        data = daily_csv_bytes([("2020-01-02", "1.0", "1.0"), ("2001-02-30", "1.0", "1.0")])
        with pytest.raises(CsvParseError, match="line 3"):
            parse_daily_csv(data)

    def test_wrong_field_count_names_line(self):
        data = b"Date,Close,Adj Close\n2020-01-02,1.0,1.0\n2020-01-03,1.0\n"
        with pytest.raises(CsvParseError, match="line 3"):
            parse_daily_csv(data)

    def test_unparsable_price(self):
        data = daily_csv_bytes([("2020-01-02", "1.0", "null")])
        with pytest.raises(CsvParseError, match="price"):
            parse_daily_csv(data)

    def test_non_positive_price(self):
        data = daily_csv_bytes([("2020-01-02", "1.0", "-3.5")])
        with pytest.raises(CsvParseError, match="non-positive"):
            parse_daily_csv(data)

    def test_duplicate_date(self):
        data = daily_csv_bytes([("2020-01-02", "1.0", "1.0"), ("2020-01-02", "2.0", "2.0")])
        with pytest.raises(CsvParseError, match="duplicate"):
            parse_daily_csv(data)

    def test_missing_required_column(self):
        with pytest.raises(CsvParseError, match="header"):
            parse_daily_csv(b"Date,Open\n2020-01-02,1.0\n")

    def test_crlf_and_bom_tolerated(self):
        data = "﻿Date,Close,Adj Close\r\n2020-01-02,1.0,2.0\r\n2020-01-03,1.1,2.1\r\n".encode()
        series = parse_daily_csv(data)
        assert series.values.tolist() == [2.0, 2.1]

    def test_roundtrip_exact(self):
        data = daily_csv_bytes(
            [("2020-01-02", "9.0", "10.123456789"), ("2020-01-03", "9.5", "10.5"), ("2020-01-06", "9.1", "0.0001")]
        )
        first = parse_daily_csv(data)
        second = parse_daily_csv(serialize_daily_csv(first).encode())
        assert first.values.tolist() == second.values.tolist()
        assert first.dates == second.dates


class TestLogReturns:
    def test_exponential_series(self):
        e = math.e
        out = log_returns([1.0, e, e * e])
        assert out == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_constant_series(self):
        assert log_returns([5.0, 5.0, 5.0]).tolist() == [0.0, 0.0]

    def test_halving(self):
        assert log_returns([2.0, 1.0])[0] == pytest.approx(-math.log(2), abs=1e-12)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            log_returns([1.0, 0.0, 2.0])

    def test_rejects_short(self):
        with pytest.raises(ValueError):
            log_returns([1.0])

    @given(
        st.lists(st.floats(min_value=0.01, max_value=1e4), min_size=2, max_size=40),
        st.integers(min_value=-20, max_value=20),
    )
    def test_scale_invariance_dyadic(self, values, exponent):
        # Powers of two rescale exactly in floating point, so the log-ratio
        # cancellation is exact rather than approximate.
        c = 2.0**exponent
        base = log_returns(values)
        scaled = log_returns([c * v for v in values])
        assert scaled.tolist() == base.tolist()

    def test_scale_invariance_general(self):
        values = [3.7, 1.2, 9.4, 0.8]
        assert log_returns([1.7 * v for v in values]) == pytest.approx(
            log_returns(values), abs=1e-12
        )


class TestEstimateParams:
    def test_two_point_sample(self):
        e = math.e
        series = [1.0, e**0.01, e**0.01 * e**-0.01]
        stats = estimate_params(series)
        assert stats.mu == pytest.approx(0.0, abs=1e-12)
        assert stats.sigma == pytest.approx(math.sqrt(2 * 0.0001 / 1), rel=1e-9)
        assert stats.n_returns == 2

    def test_constant_series(self):
        stats = estimate_params([5.0, 5.0, 5.0])
        assert stats.mu == 0.0
        assert stats.sigma == 0.0

    def test_requires_three_values(self):
        with pytest.raises(ValueError):
            estimate_params([1.0, 2.0])

    def test_grw_self_consistency(self):
        # Monte Carlo: the sample mean of log-returns sits within 3 standard
        # errors of the generating mu.
        from recordlab import GrwParams, simulate

        mu, sigma, n = 0.00031, 0.015, 100_000
        series = simulate(GrwParams(mu, sigma, n), seed=987)
        stats = estimate_params(series)
        assert abs(stats.mu - mu) < 3 * sigma / math.sqrt(n - 1)
        assert stats.sigma == pytest.approx(sigma, rel=0.02)


class TestPortfolioMeanParams:
    def test_two_stock_mean(self):
        out = portfolio_mean_params(
            [ReturnStats(0.0002, 0.01, 100), ReturnStats(0.0004, 0.02, 200)]
        )
        assert out.mu == pytest.approx(0.0003)
        assert out.sigma == pytest.approx(0.015)
        assert out.n_returns == 300

    def test_single_element_identity(self):
        single = ReturnStats(0.001, 0.05, 10)
        out = portfolio_mean_params([single])
        assert (out.mu, out.sigma) == (single.mu, single.sigma)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            portfolio_mean_params([])


class TestWindow:
    def _series(self, n):
        return TimeSeries(values=np.arange(1.0, n + 1.0))

    def test_discards_remainder(self):
        blocks = window(self._series(2500), 1000)
        assert len(blocks) == 2
        assert all(len(b) == 1000 for b in blocks)

    def test_exact_fit(self):
        assert len(window(self._series(1000), 1000)) == 1

    def test_appendix_length_gives_twelve_blocks(self):
        assert len(window(self._series(12764), 1000)) == 12

    def test_short_series_empty(self):
        assert window(self._series(5), 10) == []

    def test_length_below_two_rejected(self):
        with pytest.raises(ValueError):
            window(self._series(10), 1)

    @settings(max_examples=50)
    @given(st.integers(min_value=2, max_value=30), st.integers(min_value=2, max_value=100))
    def test_concatenation_is_prefix(self, length, n):
        series = self._series(n)
        blocks = window(series, length)
        if blocks:
            joined = np.concatenate([b.values for b in blocks])
            assert joined.tolist() == series.values[: len(joined)].tolist()
