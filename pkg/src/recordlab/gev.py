"""Generalized extreme value (GEV) fitting for longest record ages.

Parameterization: with t = (x - loc) / scale and z = 1 + shape * t, the
density is (1/scale) * z**(-1 - 1/shape) * exp(-z**(-1/shape)) on z > 0.
Positive shape is the heavy-tailed Frechet branch expected when the parent
distribution of ages has a power-law tail; the fit reports whatever the
likelihood prefers and warns when the shape leaves that branch.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import gamma as _gamma

from .errors import FitError

_EULER_GAMMA = 0.5772156649015329
# Penalty levels keeping the simplex search finite and directional when a
# candidate violates scale > 0 or the support constraint.
_PENALTY_SCALE = 1e12
_PENALTY_SUPPORT = 1e10


@dataclass
class GevFit:
    """Fitted GEV parameters with optimizer status."""

    shape: float
    loc: float
    scale: float
    log_likelihood: float
    converged: bool
    n_samples: int
    metadata: dict = field(default_factory=dict)


def _z_values(x: np.ndarray, shape: float, loc: float, scale: float) -> np.ndarray:
    return 1.0 + shape * (x - loc) / scale


def gev_density(x, fit: GevFit):
    """Density at ``x`` (scalar or array); zero outside the support z > 0."""
    return gev_pdf(x, fit.shape, fit.loc, fit.scale)


def gev_pdf(x, shape: float, loc: float, scale: float):
    if scale <= 0:
        raise ValueError("scale must be > 0")
    if shape == 0:
        raise ValueError("shape must be nonzero (Gumbel limit not handled here)")
    x_arr = np.asarray(x, dtype=float)
    z = _z_values(x_arr, shape, loc, scale)
    out = np.zeros_like(z)
    ok = z > 0
    zo = z[ok]
    out[ok] = (1.0 / scale) * zo ** (-1.0 - 1.0 / shape) * np.exp(-(zo ** (-1.0 / shape)))
    return float(out) if np.isscalar(x) else out


def gev_log_likelihood(x: Sequence[float] | np.ndarray, shape: float, loc: float, scale: float) -> float:
    """Exact log-likelihood; -inf when the parameters are out of support."""
    x = np.asarray(x, dtype=float)
    if scale <= 0:
        return float("-inf")
    t = (x - loc) / scale
    kt = shape * t
    if np.any(1.0 + kt <= 0):
        return float("-inf")
    # u = log(1 + k t)/k degrades gracefully to t as k -> 0 (Gumbel limit).
    u = np.log1p(kt) / shape if abs(shape) >= 1e-12 else t
    ll = -len(x) * np.log(scale) - (1.0 + shape) * u.sum() - np.exp(-u).sum()
    return float(ll) if np.isfinite(ll) else float("-inf")


def _penalized_nll(theta: np.ndarray, x: np.ndarray) -> float:
    shape, loc, scale = theta
    if scale <= 0:
        return _PENALTY_SCALE * (1.0 + abs(scale))
    z = _z_values(x, shape, loc, scale)
    bad = np.count_nonzero(z <= 0)
    if bad:
        return _PENALTY_SUPPORT * (1.0 + bad + float(-z.min()))
    ll = gev_log_likelihood(x, shape, loc, scale)
    return -ll if np.isfinite(ll) else _PENALTY_SCALE


def moment_initializer(x: np.ndarray, shape0: float = 0.1) -> tuple[float, float, float]:
    """Start point from sample moments (Gumbel moment relations, small shape).

    The starting shape is shrunk toward zero until every sample satisfies
    the support constraint, so the search never starts inside a penalty
    region.
    """
    x = np.asarray(x, dtype=float)
    s = float(np.std(x, ddof=1))
    if s == 0:
        raise FitError("degenerate sample: zero variance")
    scale0 = s * np.sqrt(6.0) / np.pi
    loc0 = float(np.mean(x)) - _EULER_GAMMA * scale0
    k = shape0
    while k > 1e-8 and np.any(_z_values(x, k, loc0, scale0) <= 0):
        k /= 10.0
    return k, loc0, scale0


def fit_gev(maxima: Sequence[float] | np.ndarray, metadata: dict | None = None) -> GevFit:
    """Maximum-likelihood GEV fit via a penalized Nelder-Mead search.

    Raises :class:`FitError` when the optimizer fails, when the optimum
    violates the support constraint, or when it is pinned against the
    support boundary (some z effectively 0). A fitted shape <= 0 is
    returned, with a warning, since it is informative: the maxima are not
    in the heavy-tailed branch.
    """
    x = np.asarray(maxima, dtype=float)
    n = int(x.size)
    if n < 5:
        raise FitError(f"need at least 5 samples to fit 3 parameters, got {n}")
    if n < 20:
        warnings.warn("fewer than 20 maxima: GEV fit is low-confidence", stacklevel=2)
    theta0 = moment_initializer(x)

    res = minimize(
        _penalized_nll,
        np.array(theta0),
        args=(x,),
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-8, "maxiter": 10_000, "maxfev": 20_000},
    )
    shape, loc, scale = (float(v) for v in res.x)
    diagnostics = {
        "optimizer": "nelder-mead",
        "iterations": int(res.nit),
        "message": str(res.message),
        "theta0": list(theta0),
        "theta": [shape, loc, scale],
    }
    if not res.success:
        raise FitError("GEV optimizer did not converge", details=diagnostics)
    if scale <= 0:
        raise FitError("GEV optimum has non-positive scale", details=diagnostics)
    z = _z_values(x, shape, loc, scale)
    if np.any(z <= 0):
        raise FitError("GEV optimum violates the support constraint", details=diagnostics)
    if float(z.min()) < 1e-10:
        raise FitError("GEV optimum pinned at the support boundary", details=diagnostics)
    if shape <= 0:
        warnings.warn(
            f"fitted GEV shape {shape:.4f} <= 0: maxima are outside the Frechet branch",
            stacklevel=2,
        )
    return GevFit(
        shape=shape,
        loc=loc,
        scale=scale,
        log_likelihood=gev_log_likelihood(x, shape, loc, scale),
        converged=True,
        n_samples=n,
        metadata=dict(metadata or {}),
    )


@dataclass
class ScaledMaxima:
    """Elementwise z transform of maxima with indices of support violations."""

    values: np.ndarray
    violation_indices: np.ndarray


def scale_maxima(maxima: Sequence[float] | np.ndarray, fit: GevFit) -> ScaledMaxima:
    """z = 1 + shape * (x - loc) / scale for every maximum; z <= 0 flagged."""
    x = np.asarray(maxima, dtype=float)
    z = _z_values(x, fit.shape, fit.loc, fit.scale)
    return ScaledMaxima(values=z, violation_indices=np.flatnonzero(z <= 0))


def unscale_maxima(z_values: Sequence[float] | np.ndarray, fit: GevFit) -> np.ndarray:
    """Inverse of :func:`scale_maxima`: x = loc + scale * (z - 1) / shape."""
    z = np.asarray(z_values, dtype=float)
    return fit.loc + fit.scale * (z - 1.0) / fit.shape


def frechet_mean(fit: GevFit) -> float:
    """Mean of the fitted distribution: loc + scale*(Gamma(1-shape)-1)/shape.

    Finite only on the Frechet branch with shape < 1.
    """
    if fit.shape <= 0:
        raise ValueError("mean formula requires shape > 0 (Frechet branch)")
    if fit.shape >= 1:
        raise ValueError("mean diverges for shape >= 1")
    return float(fit.loc + fit.scale * (_gamma(1.0 - fit.shape) - 1.0) / fit.shape)


def standardized_z_density(z, shape: float):
    """Density of the scaled variable z itself: (1/shape)*z**(-1-1/shape)*exp(-z**(-1/shape)).

    This is the curve a normalized histogram of z values should follow.
    """
    if shape <= 0:
        raise ValueError("standardized z density requires shape > 0")
    z_arr = np.asarray(z, dtype=float)
    out = np.zeros_like(z_arr)
    ok = z_arr > 0
    zo = z_arr[ok]
    out[ok] = (1.0 / shape) * zo ** (-1.0 - 1.0 / shape) * np.exp(-(zo ** (-1.0 / shape)))
    return float(out) if np.isscalar(z) else out
