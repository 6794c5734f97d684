"""Figure rendering for CLI reports. Only the CLI imports this module."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .binning import LogHistogram
from .gev import GevFit, standardized_z_density
from .ingest import TimeSeries
from .powerlaw import PowerLawFit
from .scaling import ScalingTable

# Strip the writer tag so identical runs produce identical PNG bytes.
_SAVEFIG_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def save_series_figure(series: TimeSeries, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(np.arange(1, len(series) + 1), series.values, lw=0.7)
    ax.set_xlabel("step")
    ax.set_ylabel("value")
    ax.set_title(series.label or "series")
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KWARGS)
    plt.close(fig)


def save_age_histogram_figure(
    hist: LogHistogram,
    fits: list[PowerLawFit],
    path,
    title: str = "record-age distribution",
) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    occupied = hist.counts > 0
    ax.loglog(hist.centers[occupied], hist.density[occupied], "o", ms=4, mfc="none", label="data")
    for fit in fits:
        r = np.logspace(np.log10(max(fit.r_min, hist.centers[occupied][0])),
                        np.log10(fit.r_max_fit), 64)
        ref = hist.density[occupied][0] * (r / hist.centers[occupied][0]) ** (-fit.alpha)
        ax.loglog(r, ref, lw=1.2,
                  label=f"{fit.method}: slope {-fit.alpha:.3f} ± {fit.alpha_stderr:.3f}")
    ax.set_xlabel("record age r")
    ax.set_ylabel("P(r)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KWARGS)
    plt.close(fig)


def save_scaled_maxima_figure(
    z_centers: np.ndarray,
    z_density: np.ndarray,
    fit: GevFit,
    path,
    title: str = "scaled longest record ages",
) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(z_centers, z_density, "o", ms=4, mfc="none", label="data")
    if fit.shape > 0:
        z = np.linspace(max(1e-3, z_centers.min() * 0.5), z_centers.max() * 1.1, 256)
        ax.plot(z, standardized_z_density(z, fit.shape), lw=1.2,
                label=f"GEV shape {fit.shape:.3f}")
    ax.set_xlabel("z")
    ax.set_ylabel("F(z)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KWARGS)
    plt.close(fig)


def save_scaling_figure(table: ScalingTable, path) -> None:
    rows = [r for r in table.rows if r.converged]
    n = np.array([r.n_steps for r in rows], float)
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    panels = [
        ("loc", axes[0, 0], [r.loc for r in rows]),
        ("scale", axes[0, 1], [r.scale for r in rows]),
        ("shape", axes[1, 0], [r.shape for r in rows]),
        ("mean_rmax", axes[1, 1], [r.mean_rmax for r in rows]),
    ]
    for name, ax, y in panels:
        ax.semilogx(n, y, "o-", ms=4)
        fit = table.fits.get(name)
        if fit is not None:
            grid = np.geomspace(n.min(), n.max(), 64)
            ax.semilogx(grid, fit.intercept + fit.slope * np.log(grid), "--", lw=1)
        ax.set_xlabel("N")
        ax.set_ylabel(name)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KWARGS)
    plt.close(fig)


def save_autocorr_figure(lags: np.ndarray, columns: dict[str, np.ndarray], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in columns.items():
        ax.plot(lags[: len(values)], values, "o-", ms=3, lw=0.8, label=label)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("lag")
    ax.set_ylabel("C(lag)")
    ax.set_title("autocorrelation of record ages")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KWARGS)
    plt.close(fig)
