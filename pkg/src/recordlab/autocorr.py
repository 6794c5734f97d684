"""Normalized autocorrelation estimator for short integer or real series."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class AutocorrSeries:
    """Correlation by lag, mean-subtracted and normalized so values[0] == 1."""

    lags: np.ndarray
    values: np.ndarray


def autocorrelation(xs: Sequence[float] | np.ndarray, tau_max: int) -> AutocorrSeries:
    """C(tau) = sum((x_t - mean)(x_{t+tau} - mean)) / sum((x_t - mean)**2)."""
    xs = np.asarray(xs, dtype=float)
    if tau_max < 1:
        raise ValueError("tau_max must be >= 1")
    if len(xs) <= tau_max:
        raise ValueError("series must be longer than tau_max")
    d = xs - xs.mean()
    denom = float(np.dot(d, d))
    if denom == 0.0:
        raise ValueError("zero-variance series has no autocorrelation")
    values = np.empty(tau_max + 1)
    values[0] = 1.0
    for tau in range(1, tau_max + 1):
        values[tau] = float(np.dot(d[:-tau], d[tau:])) / denom
    return AutocorrSeries(lags=np.arange(tau_max + 1), values=values)
