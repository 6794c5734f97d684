"""Scaling studies: GEV parameters and record counts as functions of series length."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FitError
from .gev import GevFit, fit_gev, frechet_mean
from .grw import (
    COLLECTOR_LONGEST_AGE,
    COLLECTOR_RECORD_COUNT,
    EnsembleSpec,
    GrwParams,
    derive_seed,
    run_ensemble,
)


@dataclass
class ScalingRow:
    """Fitted GEV parameters and mean longest age for one series length."""

    n_steps: int
    shape: float
    loc: float
    scale: float
    mean_rmax: float
    frechet_mean_rmax: float
    n_realizations: int
    converged: bool


@dataclass
class LogFit:
    """Least-squares line y = intercept + slope * ln(n)."""

    intercept: float
    slope: float
    n_rows: int


@dataclass
class ScalingTable:
    """Per-length rows plus ln(n) fits over rows above the length threshold."""

    rows: list[ScalingRow]
    threshold: int
    fits: dict[str, LogFit] = field(default_factory=dict)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and slope stderr of an ordinary least-squares line."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    n = len(x)
    if n > 2:
        resid = y - (intercept + slope * x)
        stderr = float(np.sqrt(np.sum(resid**2) / (n - 2) / sxx))
    else:
        stderr = float("inf")
    return slope, intercept, stderr


def fit_log_columns(rows: Sequence[ScalingRow], threshold: int) -> dict[str, LogFit]:
    """Fit loc, scale and mean_rmax against ln(n) over converged rows with n > threshold.

    Returns an empty dict when fewer than 2 rows qualify.
    """
    usable = [r for r in rows if r.converged and r.n_steps > threshold]
    if len(usable) < 2:
        return {}
    ln_n = np.log([r.n_steps for r in usable])
    fits = {}
    for column in ("loc", "scale", "mean_rmax"):
        y = np.array([getattr(r, column) for r in usable])
        slope, intercept, _ = _ols(ln_n, y)
        fits[column] = LogFit(intercept=intercept, slope=slope, n_rows=len(usable))
    return fits


def scaling_study(
    mu: float,
    sigma: float,
    n_list: Sequence[int],
    m: int,
    master_seed: int,
    *,
    y0: float = 1.0,
    threshold: int = 30_000,
    include_censored_rmax: bool = True,
    n_workers: int = 1,
) -> ScalingTable:
    """GEV parameters of longest record ages across series lengths.

    Each length runs its own ensemble, seeded injectively from the master
    seed by the length itself so reordering or subsetting ``n_list`` does
    not change any row. Rows whose GEV fit fails are flagged and excluded
    from the ln(n) fits.
    """
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list must not be empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    if min(n_list) < 100:
        raise ValueError("each series length must be >= 100")
    if m < 1000:
        raise ValueError("need at least 1000 realizations per length")

    rows = []
    for n in n_list:
        spec = EnsembleSpec(
            params=GrwParams(mu=mu, sigma=sigma, n_steps=n, y0=y0),
            n_realizations=m,
            master_seed=derive_seed(master_seed, n),
        )
        summary = run_ensemble(
            spec,
            {COLLECTOR_LONGEST_AGE},
            include_censored_rmax=include_censored_rmax,
            n_workers=n_workers,
        )
        maxima = summary.rmax[summary.rmax > 0].astype(float)
        mean_rmax = float(maxima.mean())
        try:
            fit = fit_gev(maxima)
            fm = frechet_mean(fit) if 0 < fit.shape < 1 else float("nan")
            rows.append(
                ScalingRow(
                    n_steps=n,
                    shape=fit.shape,
                    loc=fit.loc,
                    scale=fit.scale,
                    mean_rmax=mean_rmax,
                    frechet_mean_rmax=fm,
                    n_realizations=m,
                    converged=fit.converged,
                )
            )
        except FitError:
            rows.append(
                ScalingRow(
                    n_steps=n,
                    shape=float("nan"),
                    loc=float("nan"),
                    scale=float("nan"),
                    mean_rmax=mean_rmax,
                    frechet_mean_rmax=float("nan"),
                    n_realizations=m,
                    converged=False,
                )
            )
    return ScalingTable(rows=rows, threshold=threshold, fits=fit_log_columns(rows, threshold))


def fit_power_scaling(n_values: Sequence[int], mean_counts: Sequence[float]) -> tuple[float, float]:
    """Exponent beta and its stderr from log(mean count) vs log(n)."""
    n_values = np.asarray(n_values, float)
    mean_counts = np.asarray(mean_counts, float)
    if len(n_values) < 2:
        raise ValueError("need at least 2 lengths to fit a growth exponent")
    if np.any(mean_counts <= 0):
        raise ValueError("mean counts must be positive")
    slope, _, stderr = _ols(np.log(n_values), np.log(mean_counts))
    return slope, stderr


def mean_records_scaling(
    sigma: float,
    n_list: Sequence[int],
    m: int,
    master_seed: int,
    *,
    mu: float = 0.0,
    y0: float = 1.0,
    n_workers: int = 1,
) -> tuple[float, float]:
    """Growth exponent of the mean record count with series length, drift-free.

    The square-root growth law holds for symmetric increments only, so a
    nonzero ``mu`` is rejected; rerun with mu=0.
    """
    if mu != 0.0:
        raise ValueError("mean-record growth law requires the drift-free regime: set mu=0")
    n_list = list(n_list)
    if len(n_list) < 2:
        raise ValueError("need at least 2 lengths")
    if m == 1:
        warnings.warn("m=1 gives an unreliable stderr for the growth exponent", stacklevel=2)
    means = []
    for n in n_list:
        spec = EnsembleSpec(
            params=GrwParams(mu=0.0, sigma=sigma, n_steps=n, y0=y0),
            n_realizations=m,
            master_seed=derive_seed(master_seed, n),
        )
        summary = run_ensemble(spec, {COLLECTOR_RECORD_COUNT}, n_workers=n_workers)
        means.append(float(summary.record_counts.mean()))
    return fit_power_scaling(n_list, means)
