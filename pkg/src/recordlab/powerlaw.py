"""Power-law exponent estimation for discrete record ages.

Two routes are provided because they answer slightly different questions:
an ordinary least-squares fit on the log-binned density (what a straight
line on a log-log plot measures) and a discrete maximum-likelihood fit of
P(r) = r**-alpha / H(support_max, alpha) on r in {1..support_max}. The MLE
has a clean synthetic oracle and is preferred for automated checks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .binning import LogHistogram
from .errors import FitError

METHOD_LEAST_SQUARES = "logbin_least_squares"
METHOD_MLE = "discrete_mle"


@dataclass
class PowerLawFit:
    """Fitted exponent with its standard error, fit range and normalization.

    ``normalization_A`` is 1 / H(support_max, alpha) so that
    A * sum(r**-alpha, r=1..support_max) == 1.
    """

    alpha: float
    alpha_stderr: float
    r_min: float
    r_max_fit: float
    method: str
    normalization_A: float
    support_max: int
    n_samples: int
    converged: bool = True
    metadata: dict = field(default_factory=dict)


def harmonic_number(n: int, alpha: float) -> float:
    """Generalized harmonic number: sum of r**-alpha for r = 1..n.

    Terms are accumulated smallest-first (descending r) to limit rounding
    loss on long sums.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0.0
    chunk = 10_000_000
    hi = int(n)
    while hi > 0:
        lo = max(0, hi - chunk)
        r = np.arange(hi, lo, -1, dtype=np.float64)
        total += float(np.sum(r ** (-float(alpha))))
        hi = lo
    return total


def _log_moments(alpha: float, log_r: np.ndarray):
    """Mean and variance of log r under the truncated power law at ``alpha``."""
    w = np.exp(-alpha * log_r)
    total = w.sum()
    m1 = float((w * log_r).sum() / total)
    m2 = float((w * log_r * log_r).sum() / total)
    return m1, m2 - m1 * m1


def fit_power_law_mle(
    ages: Sequence[int] | np.ndarray,
    support_max: int,
    alpha_bracket: tuple[float, float] = (1.01, 5.0),
) -> PowerLawFit:
    """Discrete MLE of the exponent on support {1..support_max}.

    The score has a single root because the model's mean log-age is strictly
    decreasing in alpha, so bracketing plus bisection (polished with Newton
    steps) is exact. An upper-pinned solution (sample mean log-age below the
    model's at the bracket top) is returned flagged non-converged; a
    lower-pinned one means alpha <= 1 territory where the distribution is
    not normalizable, and raises.
    """
    ages = np.asarray(ages)
    if ages.size == 0:
        raise ValueError("cannot fit an empty sample")
    if support_max < 1:
        raise ValueError("support_max must be >= 1")
    if np.any(ages < 1) or np.any(ages > support_max):
        raise ValueError("all ages must lie in [1, support_max]")

    lo, hi = alpha_bracket
    n = int(ages.size)
    mean_log_age = float(np.mean(np.log(ages)))
    log_r = np.log(np.arange(1, support_max + 1, dtype=np.float64))

    def score(alpha: float) -> float:
        return _log_moments(alpha, log_r)[0] - mean_log_age

    s_lo, s_hi = score(lo), score(hi)
    if s_hi > 0:
        # Likelihood still increasing at the top of the bracket.
        alpha = hi
        converged = False
        warnings.warn(
            f"power-law MLE pinned at alpha={hi}: sample is steeper than the bracket allows",
            stacklevel=2,
        )
    elif s_lo < 0:
        raise FitError(
            "no score root in bracket: exponent at or below the lower bound",
            details={
                "bracket": [lo, hi],
                "score_lo": s_lo,
                "score_hi": s_hi,
                "mean_log_age": mean_log_age,
            },
        )
    else:
        a, b = lo, hi
        while b - a > 1e-10:
            mid = 0.5 * (a + b)
            if score(mid) > 0:
                a = mid
            else:
                b = mid
        alpha = 0.5 * (a + b)
        for _ in range(2):
            m1, var = _log_moments(alpha, log_r)
            if var <= 0:
                break
            alpha = float(np.clip(alpha + (m1 - mean_log_age) / var, lo, hi))
        converged = True

    _, var = _log_moments(alpha, log_r)
    info = n * var
    if n < 2 or info <= 0:
        stderr = float("inf")
        warnings.warn("power-law MLE stderr unreliable for a single sample", stacklevel=2)
    else:
        stderr = float(1.0 / np.sqrt(info))

    return PowerLawFit(
        alpha=float(alpha),
        alpha_stderr=stderr,
        r_min=1.0,
        r_max_fit=float(support_max),
        method=METHOD_MLE,
        normalization_A=1.0 / harmonic_number(support_max, float(alpha)),
        support_max=int(support_max),
        n_samples=n,
        converged=converged,
    )


def fit_power_law_ls(
    hist: LogHistogram,
    fit_range: tuple[float, float] | None = None,
) -> PowerLawFit:
    """Least-squares slope of log density vs log bin center over occupied bins.

    ``fit_range`` bounds the bin centers used; the default [1, max_edge/10]
    leaves out the flattened finite-size tail.
    """
    if fit_range is None:
        fit_range = (1.0, float(hist.bin_edges[-1]) / 10.0)
    r_lo, r_hi = fit_range
    sel = (hist.counts > 0) & (hist.centers >= r_lo) & (hist.centers <= r_hi)
    if int(sel.sum()) < 3:
        raise ValueError(
            f"need >= 3 occupied bins in range [{r_lo}, {r_hi}], got {int(sel.sum())}"
        )

    x = np.log(hist.centers[sel])
    y = np.log(hist.density[sel])
    n = len(x)
    x_mean, y_mean = x.mean(), y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    slope = float(np.sum((x - x_mean) * (y - y_mean)) / sxx)
    resid = y - (y_mean + slope * (x - x_mean))
    if n > 2:
        stderr = float(np.sqrt(np.sum(resid**2) / (n - 2) / sxx))
    else:
        stderr = float("inf")

    alpha = -slope
    support_max = max(1, int(np.ceil(hist.bin_edges[-1])))
    return PowerLawFit(
        alpha=alpha,
        alpha_stderr=stderr,
        r_min=float(r_lo),
        r_max_fit=float(r_hi),
        method=METHOD_LEAST_SQUARES,
        normalization_A=1.0 / harmonic_number(support_max, alpha),
        support_max=support_max,
        n_samples=int(hist.n_samples),
        converged=True,
    )
