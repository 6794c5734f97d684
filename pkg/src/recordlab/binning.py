"""Logarithmically binned histograms for heavy-tailed positive integer data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class LogHistogram:
    """Geometric bins with density normalized so sum(density * width) == 1.

    Empty bins are retained with zero density; ``centers`` are the geometric
    means of adjacent edges.
    """

    bin_edges: np.ndarray
    centers: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    n_samples: int


def log_binned_histogram(ages: Sequence[int] | np.ndarray, bins_per_decade: int = 8) -> LogHistogram:
    """Histogram of positive ages on geometric bins spanning [1, max age]."""
    ages = np.asarray(ages)
    if ages.size == 0:
        raise ValueError("cannot bin an empty sample")
    if np.any(ages < 1):
        raise ValueError("ages must be >= 1")
    if bins_per_decade < 1:
        raise ValueError("bins_per_decade must be >= 1")

    amax = float(ages.max())
    n_bins = max(1, int(np.ceil(bins_per_decade * np.log10(amax))) if amax > 1 else 1)
    # Guard against the last edge rounding below the maximum sample.
    while 10.0 ** (n_bins / bins_per_decade) < amax:
        n_bins += 1
    edges = 10.0 ** (np.arange(n_bins + 1) / bins_per_decade)

    counts, _ = np.histogram(ages, bins=edges)
    widths = np.diff(edges)
    density = counts / (widths * ages.size)
    centers = np.sqrt(edges[:-1] * edges[1:])
    return LogHistogram(
        bin_edges=edges,
        centers=centers,
        density=density,
        counts=counts.astype(np.int64),
        n_samples=int(ages.size),
    )


def histogram_to_tsv(hist: LogHistogram) -> str:
    """TSV rows (center, density, count), one line per bin."""
    lines = ["center\tdensity\tcount"]
    for c, d, n in zip(hist.centers, hist.density, hist.counts):
        lines.append(f"{float(c)!r}\t{float(d)!r}\t{int(n)}")
    return "\n".join(lines) + "\n"
