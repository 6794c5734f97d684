"""Daily price CSV ingestion, log-returns and fixed-length windowing.

Input files follow the common daily-quote export layout: a header row with a
"Date" column (ISO yyyy-mm-dd) and price columns "Close" / "Adj Close",
comma-separated, UTF-8, optional CRLF line endings. Extra columns are
ignored. Rows are sorted chronologically on ingest because exports disagree
about row order.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import CsvParseError

DATE_COLUMN = "Date"
PRICE_COLUMNS = {"adjusted_close": "Adj Close", "close": "Close"}


@dataclass(frozen=True)
class TimeSeries:
    """Ordered sequence of values, optionally dated, with a free-form label.

    Price series must be strictly positive before log-returns or record
    analysis on ratios make sense; generic series may hold any reals.
    Dates, when present, are strictly increasing and aligned with values.
    """

    values: np.ndarray
    dates: tuple[dt.date, ...] | None = None
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        object.__setattr__(self, "values", values)
        if self.dates is not None:
            dates = tuple(self.dates)
            object.__setattr__(self, "dates", dates)
            if len(dates) != len(values):
                raise ValueError("dates and values must have equal length")
            if any(b <= a for a, b in zip(dates, dates[1:])):
                raise ValueError("dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ReturnStats:
    """Per-step log-return sample statistics of one series (or a portfolio)."""

    mu: float
    sigma: float
    n_returns: int


def _as_values(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=float)


def _open_text(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8-sig").splitlines()
    if isinstance(source, bytes):
        return source.decode("utf-8-sig").splitlines()
    if isinstance(source, io.TextIOBase):
        return source.read().splitlines()
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8-sig")
        return data.splitlines()
    raise TypeError(f"unsupported CSV source type: {type(source)!r}")


def parse_daily_csv(
    source: str | Path | bytes | IO,
    column_policy: str = "adjusted_close",
    label: str = "",
) -> TimeSeries:
    """Parse one daily price CSV into a dated, chronologically sorted series.

    ``column_policy`` selects which price column to read: "adjusted_close"
    (the default, split/dividend-corrected) or "close". Malformed rows,
    non-positive prices and duplicate dates raise :class:`CsvParseError`
    naming the offending 1-based line.
    """
    if column_policy not in PRICE_COLUMNS:
        raise ValueError(
            f"column_policy must be one of {sorted(PRICE_COLUMNS)}, got {column_policy!r}"
        )
    price_column = PRICE_COLUMNS[column_policy]

    lines = list(_open_text(source))
    rows = list(csv.reader(lines))
    if not rows:
        raise CsvParseError("empty file", line=1)

    header = [h.strip() for h in rows[0]]
    try:
        date_idx = header.index(DATE_COLUMN)
        price_idx = header.index(price_column)
    except ValueError:
        raise CsvParseError(
            f"header must contain {DATE_COLUMN!r} and {price_column!r} columns, got {header}",
            line=1,
        ) from None

    seen: dict[dt.date, int] = {}
    parsed: list[tuple[dt.date, float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CsvParseError(
                f"expected {len(header)} fields, got {len(row)}", line=lineno
            )
        raw_date = row[date_idx].strip()
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError:
            raise CsvParseError(f"unparsable date {raw_date!r}", line=lineno) from None
        raw_price = row[price_idx].strip()
        try:
            price = float(raw_price)
        except ValueError:
            raise CsvParseError(f"unparsable price {raw_price!r}", line=lineno) from None
        if not np.isfinite(price) or price <= 0:
            raise CsvParseError(f"non-positive price {raw_price!r}", line=lineno)
        if date in seen:
            raise CsvParseError(
                f"duplicate date {raw_date} (first seen at line {seen[date]})", line=lineno
            )
        seen[date] = lineno
        parsed.append((date, price))

    parsed.sort(key=lambda pair: pair[0])
    dates = tuple(d for d, _ in parsed)
    values = np.array([p for _, p in parsed], dtype=float)
    return TimeSeries(values=values, dates=dates, label=label)


def serialize_daily_csv(series: TimeSeries, column_policy: str = "adjusted_close") -> str:
    """Render a dated series back to CSV text; inverse of :func:`parse_daily_csv`.

    Values are written with ``repr`` so parse -> serialize -> parse is exact.
    """
    if column_policy not in PRICE_COLUMNS:
        raise ValueError(
            f"column_policy must be one of {sorted(PRICE_COLUMNS)}, got {column_policy!r}"
        )
    if series.dates is None:
        raise ValueError("series has no dates; cannot serialize to daily CSV")
    out = [f"{DATE_COLUMN},{PRICE_COLUMNS[column_policy]}"]
    for date, value in zip(series.dates, series.values):
        out.append(f"{date.isoformat()},{float(value)!r}")
    return "\n".join(out) + "\n"


def log_returns(series: TimeSeries | Sequence[float]) -> np.ndarray:
    """Natural-log returns ln(values[i+1] / values[i]) of a positive series."""
    values = _as_values(series)
    if len(values) < 2:
        raise ValueError("need at least 2 values to compute returns")
    if np.any(values <= 0):
        raise ValueError("log returns require strictly positive values")
    return np.log(values[1:] / values[:-1])


def estimate_params(series: TimeSeries | Sequence[float]) -> ReturnStats:
    """Sample mean and sample standard deviation (n-1) of the log-returns."""
    values = _as_values(series)
    if len(values) < 3:
        raise ValueError("need at least 3 values to estimate return statistics")
    r = log_returns(values)
    return ReturnStats(mu=float(np.mean(r)), sigma=float(np.std(r, ddof=1)), n_returns=len(r))


def portfolio_mean_params(stats_list: Sequence[ReturnStats]) -> ReturnStats:
    """Unweighted mean of mu and sigma across stocks; n_returns is their total."""
    if not stats_list:
        raise ValueError("empty stats list")
    mu = float(np.mean([s.mu for s in stats_list]))
    sigma = float(np.mean([s.sigma for s in stats_list]))
    total = int(sum(s.n_returns for s in stats_list))
    return ReturnStats(mu=mu, sigma=sigma, n_returns=total)


def window(series: TimeSeries, length: int) -> list[TimeSeries]:
    """Split into consecutive non-overlapping blocks of exactly ``length`` values.

    A trailing remainder shorter than ``length`` is discarded so every block
    is directly comparable; a series shorter than ``length`` yields no blocks.
    """
    if length < 2:
        raise ValueError("window length must be >= 2")
    n_blocks = len(series) // length
    blocks = []
    for i in range(n_blocks):
        lo, hi = i * length, (i + 1) * length
        dates = series.dates[lo:hi] if series.dates is not None else None
        blocks.append(TimeSeries(values=series.values[lo:hi], dates=dates, label=series.label))
    return blocks
