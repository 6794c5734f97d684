"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's own code paths: record
detection re-checks the definition against the full prefix, and the
synthetic samplers invert explicitly tabulated CDFs.
"""

from __future__ import annotations

import numpy as np
import pytest


def oracle_record_times(values) -> list[int]:
    """Definition-based O(N^2) upper-record detector; 1-based times."""
    values = list(values)
    times = [1]
    for t in range(2, len(values) + 1):
        if values[t - 1] > max(values[: t - 1]):
            times.append(t)
    return times


def sample_discrete_power_law(rng: np.random.Generator, alpha: float, support_max: int, size: int) -> np.ndarray:
    """Exact samples of P(r) proportional to r**-alpha on {1..support_max} via inverse CDF."""
    weights = np.arange(1, support_max + 1, dtype=float) ** (-alpha)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, rng.random(size)) + 1


def sample_gev(rng: np.random.Generator, shape: float, loc: float, scale: float, size: int) -> np.ndarray:
    """Inverse-CDF GEV samples: with z = 1 + shape*(x-loc)/scale, CDF = exp(-z**(-1/shape))."""
    u = rng.random(size)
    z = (-np.log(u)) ** (-shape)
    return loc + scale * (z - 1.0) / shape


def daily_csv_bytes(rows, header="Date,Open,Close,Adj Close,Volume") -> bytes:
    """Assemble a daily-quote CSV from (date, close, adj_close) triples."""
    lines = [header]
    for date, close, adj in rows:
        lines.append(f"{date},1.0,{close},{adj},1000")
    return ("\n".join(lines) + "\n").encode()


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20260808))
