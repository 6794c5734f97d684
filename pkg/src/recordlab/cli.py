"""Command-line front end: simulate ensembles, analyze price CSVs, run scaling studies.

Every run writes plain TSV/JSON files named after the report they feed,
plus rendered PNG figures next to them (disable with --no-figures). Each
output embeds the fully resolved configuration including the master seed,
and a run_config.json that can be passed back via --config to reproduce
the run byte-for-byte. Flags override config-file values, which override
defaults. The RECORDLAB_THREADS environment variable caps parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .autocorr import autocorrelation
from .binning import histogram_to_tsv, log_binned_histogram
from .errors import FitError, RecordLabError
from .gev import fit_gev, scale_maxima, standardized_z_density
from .grw import (
    ALL_COLLECTORS,
    EnsembleSpec,
    GrwParams,
    derive_seed,
    resolve_workers,
    run_ensemble,
    simulate,
)
from .ingest import estimate_params, parse_daily_csv, portfolio_mean_params, window
from .powerlaw import fit_power_law_ls, fit_power_law_mle
from .records import (
    block_maxima,
    find_upper_records,
    record_ages,
    record_sequence_to_tsv,
)
from .scaling import scaling_study

CONFIG_FORMAT = "recordlab.config.v1"

_CENSOR_CHOICES = ("none", "ages", "rmax", "both")


def _censor_flags(choice: str) -> tuple[bool, bool]:
    """Map the --include-censored choice to (ages policy, rmax policy)."""
    return choice in ("ages", "both"), choice in ("rmax", "both")


def _generate_seed() -> int:
    return int.from_bytes(os.urandom(8), "big") >> 1


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge defaults, config-file values and explicit flags (flags win)."""
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    resolved = {}
    for key, default in defaults.items():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            resolved[key] = flag_value
        elif key in file_cfg and file_cfg[key] is not None:
            resolved[key] = file_cfg[key]
        else:
            resolved[key] = default
    return resolved


def _require(parser: argparse.ArgumentParser, cfg: dict, *keys: str) -> None:
    for key in keys:
        if cfg.get(key) is None:
            parser.error(f"--{key.replace('_', '-')} is required")


def _config_header(cfg: dict) -> str:
    return "# config: " + json.dumps(cfg, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dump_json(path: Path, doc: dict) -> None:
    _write(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _fit_pooled_ages(ages: np.ndarray, cfg: dict) -> tuple[dict, list]:
    """LS and MLE power-law fits of pooled ages; errors recorded, not raised."""
    r_lo = cfg["fit_min"] if cfg["fit_min"] is not None else 1
    r_hi = cfg["fit_max"] if cfg["fit_max"] is not None else max(10, int(ages.max()) // 10)
    fits_doc: dict = {"fit_range": [r_lo, r_hi]}
    overlay = []
    hist = log_binned_histogram(ages, cfg["bins_per_decade"])
    try:
        ls = fit_power_law_ls(hist, (float(r_lo), float(r_hi)))
        fits_doc["logbin_least_squares"] = {
            "alpha": ls.alpha,
            "alpha_stderr": ls.alpha_stderr,
            "n_samples": ls.n_samples,
            "converged": ls.converged,
        }
        overlay.append(ls)
    except (ValueError, FitError) as exc:
        fits_doc["logbin_least_squares"] = {"error": str(exc)}
    sel = ages[(ages >= r_lo) & (ages <= r_hi)]
    try:
        if sel.size == 0:
            raise FitError("no ages inside the fit range")
        mle = fit_power_law_mle(sel, int(r_hi))
        fits_doc["discrete_mle"] = {
            "alpha": mle.alpha,
            "alpha_stderr": mle.alpha_stderr,
            "normalization_A": mle.normalization_A,
            "n_samples": mle.n_samples,
            "converged": mle.converged,
        }
        overlay.append(mle)
    except (ValueError, FitError) as exc:
        fits_doc["discrete_mle"] = {"error": str(exc)}
    return fits_doc, overlay


def cmd_simulate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    cfg = _resolve(
        args,
        {
            "command": "simulate",
            "format": CONFIG_FORMAT,
            "mu": None,
            "sigma": None,
            "n": None,
            "m": 1,
            "seed": None,
            "y0": 1.0,
            "bins_per_decade": 8,
            "fit_min": None,
            "fit_max": None,
            "include_censored": "rmax",
            "out": "recordlab_out",
            "figures": True,
        },
    )
    _require(parser, cfg, "mu", "sigma", "n")
    if cfg["seed"] is None:
        cfg["seed"] = _generate_seed()
    if args.no_figures:
        cfg["figures"] = False
    inc_ages, inc_rmax = _censor_flags(cfg["include_censored"])

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "run_config.json", cfg)
    params = GrwParams(mu=cfg["mu"], sigma=cfg["sigma"], n_steps=int(cfg["n"]), y0=cfg["y0"])

    if int(cfg["m"]) == 1:
        series = simulate(params, derive_seed(cfg["seed"], 0))
        lines = [_config_header(cfg).rstrip("\n"), "step\tvalue"]
        lines += [f"{i + 1}\t{float(v)!r}" for i, v in enumerate(series.values)]
        _write(out / "series.tsv", "\n".join(lines) + "\n")
        _write(out / "records.tsv", _config_header(cfg) + record_sequence_to_tsv(find_upper_records(series)))
        if cfg["figures"]:
            from . import report

            report.save_series_figure(series, out / "series.png")
        return 0

    spec = EnsembleSpec(params=params, n_realizations=int(cfg["m"]), master_seed=cfg["seed"])
    summary = run_ensemble(
        spec,
        ALL_COLLECTORS,
        include_censored_ages=inc_ages,
        include_censored_rmax=inc_rmax,
        n_workers=resolve_workers(os.cpu_count()),
    )
    doc = json.loads(summary.to_json(cfg["bins_per_decade"]))
    doc["config"] = cfg
    _dump_json(out / "ensemble.json", doc)

    ages = summary.pooled_ages()
    if ages.size > 0:
        hist = log_binned_histogram(ages, cfg["bins_per_decade"])
        _write(out / "fig3a_ages_hist.tsv", _config_header(cfg) + histogram_to_tsv(hist))
        fits_doc, overlay = _fit_pooled_ages(ages, cfg)
        fits_doc["config"] = cfg
        _dump_json(out / "powerlaw_fits.json", fits_doc)
        if cfg["figures"]:
            from . import report

            report.save_age_histogram_figure(
                hist, overlay, out / "fig3a_ages_hist.png", title="simulated record ages"
            )
    return 0


def _analyze_stock_outputs(series, cfg, out: Path, inc_ages: bool) -> dict:
    rs = find_upper_records(series)
    ages = record_ages(rs, include_censored=inc_ages)
    stats = estimate_params(series)
    _write(out / "per_stock" / f"{series.label}_records.tsv",
           _config_header(cfg) + record_sequence_to_tsv(rs))
    age_lines = [_config_header(cfg).rstrip("\n"), "age"]
    age_lines += [str(int(a)) for a in ages]
    _write(out / "per_stock" / f"{series.label}_ages.tsv", "\n".join(age_lines) + "\n")
    return {
        "label": series.label,
        "n_values": len(series),
        "mu": stats.mu,
        "sigma": stats.sigma,
        "n_returns": stats.n_returns,
        "n_records": len(rs.record_times),
        "min_age": int(ages.min()) if ages.size else None,
        "max_age": int(ages.max()) if ages.size else None,
        "ages": ages,
        "stats": stats,
    }


def cmd_analyze(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    cfg = _resolve(
        args,
        {
            "command": "analyze",
            "format": CONFIG_FORMAT,
            "data_dir": None,
            "column": "adjusted_close",
            "window": 1000,
            "bins_per_decade": 8,
            "fit_min": None,
            "fit_max": None,
            "include_censored": "rmax",
            "tau_max": 20,
            "out": "recordlab_out",
            "figures": True,
            "seed": None,
        },
    )
    _require(parser, cfg, "data_dir")
    if args.no_figures:
        cfg["figures"] = False
    inc_ages, inc_rmax = _censor_flags(cfg["include_censored"])

    data_dir = Path(cfg["data_dir"])
    if not data_dir.is_dir():
        raise RecordLabError(f"not a directory: {data_dir}")
    files = sorted(data_dir.glob("*.csv"))
    if not files:
        raise RecordLabError(f"no CSV files in {data_dir}")

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "run_config.json", cfg)

    stocks = []
    skipped = []
    for path in files:
        try:
            series = parse_daily_csv(path, column_policy=cfg["column"], label=path.stem)
            if len(series) < 3:
                raise RecordLabError("series too short for return statistics")
            stocks.append(_analyze_stock_outputs(series, cfg, out, inc_ages))
            stocks[-1]["series"] = series
        except (RecordLabError, ValueError) as exc:
            print(f"warning: skipping {path.name}: {exc}", file=sys.stderr)
            skipped.append({"file": path.name, "error": str(exc)})
    if not stocks:
        raise RecordLabError("no parseable CSV files")

    analysis: dict = {
        "config": cfg,
        "skipped": skipped,
        "stocks": [
            {k: s[k] for k in ("label", "n_values", "mu", "sigma", "n_returns",
                               "n_records", "min_age", "max_age")}
            for s in stocks
        ],
    }
    portfolio = portfolio_mean_params([s["stats"] for s in stocks])
    analysis["portfolio"] = {
        "mu": portfolio.mu,
        "sigma": portfolio.sigma,
        "n_returns": portfolio.n_returns,
        "n_stocks": len(stocks),
    }

    params_lines = [_config_header(cfg).rstrip("\n"),
                    "label\tn_values\tmu\tsigma\tn_returns"]
    params_lines += [
        f"{s['label']}\t{s['n_values']}\t{float(s['mu'])!r}\t{float(s['sigma'])!r}\t{s['n_returns']}"
        for s in stocks
    ]
    _write(out / "stock_params.tsv", "\n".join(params_lines) + "\n")

    pooled = np.concatenate([s["ages"] for s in stocks])
    if pooled.size > 0:
        hist = log_binned_histogram(pooled, cfg["bins_per_decade"])
        _write(out / "fig2b_ages_hist.tsv", _config_header(cfg) + histogram_to_tsv(hist))
        fits_doc, overlay = _fit_pooled_ages(pooled, cfg)
        fits_doc["config"] = cfg
        _dump_json(out / "powerlaw_fits.json", fits_doc)
        analysis["pooled_ages"] = {"n_ages": int(pooled.size), "fits": "powerlaw_fits.json"}
        if cfg["figures"]:
            from . import report

            report.save_age_histogram_figure(
                hist, overlay, out / "fig2b_ages_hist.png", title="pooled stock record ages"
            )

    blocks = []
    for s in stocks:
        blocks.extend(window(s["series"], int(cfg["window"])))
    if blocks:
        maxima = block_maxima(blocks, include_censored=inc_rmax).maxima.astype(float)
    else:
        maxima = np.array([])
    if maxima.size >= 5:
        try:
            fit = fit_gev(maxima, metadata={"rmax_include_censored": inc_rmax,
                                            "window": int(cfg["window"])})
            scaled = scale_maxima(maxima, fit)
            z = scaled.values[scaled.values > 0]
            edges = np.linspace(0.0, float(z.max()) * 1.05, 41)
            counts, _ = np.histogram(z, bins=edges)
            widths = np.diff(edges)
            density = counts / (widths * z.size)
            centers = 0.5 * (edges[:-1] + edges[1:])
            ref = (standardized_z_density(centers, fit.shape)
                   if fit.shape > 0 else np.full_like(centers, np.nan))
            lines = [_config_header(cfg).rstrip("\n"),
                     "z_center\tdensity\tcount\tgev_density"]
            lines += [f"{float(c)!r}\t{float(d)!r}\t{int(k)}\t{float(f)!r}"
                      for c, d, k, f in zip(centers, density, counts, ref)]
            _write(out / "fig5_scaled_maxima.tsv", "\n".join(lines) + "\n")
            gev_doc = {
                "config": cfg,
                "shape": fit.shape,
                "loc": fit.loc,
                "scale": fit.scale,
                "log_likelihood": fit.log_likelihood,
                "converged": fit.converged,
                "n_samples": fit.n_samples,
                "n_support_violations": int(scaled.violation_indices.size),
                "metadata": fit.metadata,
            }
            _dump_json(out / "gev_fit.json", gev_doc)
            analysis["block_maxima"] = {
                "n_blocks": int(maxima.size),
                "window": int(cfg["window"]),
                "status": "ok",
                "shape": fit.shape,
            }
            if cfg["figures"]:
                from . import report

                report.save_scaled_maxima_figure(
                    centers, density, fit, out / "fig5_scaled_maxima.png"
                )
        except FitError as exc:
            analysis["block_maxima"] = {
                "n_blocks": int(maxima.size),
                "window": int(cfg["window"]),
                "status": f"gev fit failed: {exc}",
            }
    else:
        analysis["block_maxima"] = {
            "n_blocks": int(maxima.size),
            "window": int(cfg["window"]),
            "status": "insufficient_data",
        }

    acf_columns = {}
    for s in stocks:
        ages = s["ages"]
        tau = min(int(cfg["tau_max"]), len(ages) - 1)
        if tau >= 1 and np.std(ages) > 0:
            acf_columns[s["label"]] = autocorrelation(ages, tau).values
    if acf_columns:
        tau_full = max(len(v) for v in acf_columns.values())
        labels = sorted(acf_columns)
        lines = [_config_header(cfg).rstrip("\n"), "lag\t" + "\t".join(labels)]
        for lag in range(tau_full):
            cells = [
                repr(float(acf_columns[lab][lag])) if lag < len(acf_columns[lab]) else ""
                for lab in labels
            ]
            lines.append(f"{lag}\t" + "\t".join(cells))
        _write(out / "fig_autocorr_ages.tsv", "\n".join(lines) + "\n")
        if cfg["figures"]:
            from . import report

            report.save_autocorr_figure(
                np.arange(tau_full), {lab: acf_columns[lab] for lab in labels},
                out / "fig_autocorr_ages.png",
            )

    _dump_json(out / "analysis.json", analysis)
    return 0


def cmd_scaling(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    cfg = _resolve(
        args,
        {
            "command": "scaling",
            "format": CONFIG_FORMAT,
            "mu": None,
            "sigma": None,
            "n_list": None,
            "m": 1000,
            "seed": None,
            "y0": 1.0,
            "threshold": 30_000,
            "include_censored": "rmax",
            "out": "recordlab_out",
            "figures": True,
        },
    )
    _require(parser, cfg, "mu", "sigma", "n_list")
    if cfg["seed"] is None:
        cfg["seed"] = _generate_seed()
    if args.no_figures:
        cfg["figures"] = False
    _, inc_rmax = _censor_flags(cfg["include_censored"])
    if isinstance(cfg["n_list"], str):
        cfg["n_list"] = [int(tok) for tok in cfg["n_list"].split(",") if tok.strip()]

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "run_config.json", cfg)

    table = scaling_study(
        cfg["mu"],
        cfg["sigma"],
        cfg["n_list"],
        int(cfg["m"]),
        cfg["seed"],
        y0=cfg["y0"],
        threshold=int(cfg["threshold"]),
        include_censored_rmax=inc_rmax,
        n_workers=resolve_workers(os.cpu_count()),
    )

    lines = [_config_header(cfg).rstrip("\n"),
             "n\tshape\tloc\tscale\tmean_rmax\tfrechet_mean_rmax\tn_realizations\tconverged"]
    for r in table.rows:
        lines.append(
            f"{r.n_steps}\t{float(r.shape)!r}\t{float(r.loc)!r}\t{float(r.scale)!r}"
            f"\t{float(r.mean_rmax)!r}\t{float(r.frechet_mean_rmax)!r}"
            f"\t{r.n_realizations}\t{int(r.converged)}"
        )
    _write(out / "fig4cd_scaling.tsv", "\n".join(lines) + "\n")

    doc: dict = {
        "config": cfg,
        "rows": [
            {
                "n": r.n_steps,
                "shape": r.shape,
                "loc": r.loc,
                "scale": r.scale,
                "mean_rmax": r.mean_rmax,
                "frechet_mean_rmax": r.frechet_mean_rmax,
                "n_realizations": r.n_realizations,
                "converged": r.converged,
            }
            for r in table.rows
        ],
        "threshold": table.threshold,
    }
    if table.fits:
        doc["log_fits"] = {
            name: {"intercept": f.intercept, "slope": f.slope, "n_rows": f.n_rows}
            for name, f in table.fits.items()
        }
        doc["log_fits_status"] = "ok"
    else:
        doc["log_fits"] = None
        doc["log_fits_status"] = "not_applicable: fewer than 2 converged rows above threshold"
    _dump_json(out / "scaling.json", doc)

    if cfg["figures"]:
        from . import report

        report.save_scaling_figure(table, out / "fig4cd_scaling.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recordlab",
        description="Record statistics of price series and geometric random walks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--out", help="output directory (default recordlab_out)")
        p.add_argument("--seed", type=int, help="master seed (generated and reported if omitted)")
        p.add_argument("--include-censored", choices=_CENSOR_CHOICES,
                       help="which statistics include the final open record age (default rmax)")
        p.add_argument("--no-figures", action="store_true", default=False,
                       help="skip PNG rendering, write only TSV/JSON")

    p_sim = sub.add_parser("simulate", help="simulate walks and collect record statistics")
    p_sim.add_argument("--mu", type=float, help="per-step increment mean")
    p_sim.add_argument("--sigma", type=float, help="per-step increment stddev")
    p_sim.add_argument("--n", type=int, help="series length")
    p_sim.add_argument("--m", type=int, help="number of realizations (default 1)")
    p_sim.add_argument("--y0", type=float, help="initial value (default 1.0)")
    p_sim.add_argument("--bins-per-decade", type=int, dest="bins_per_decade")
    p_sim.add_argument("--fit-min", type=int, dest="fit_min")
    p_sim.add_argument("--fit-max", type=int, dest="fit_max")
    add_common(p_sim)
    p_sim.set_defaults(func=lambda a: cmd_simulate(p_sim, a))

    p_an = sub.add_parser("analyze", help="record statistics of a directory of price CSVs")
    p_an.add_argument("data_dir", nargs="?", help="directory of daily price CSV files")
    p_an.add_argument("--column", choices=("adjusted_close", "close"),
                      help="price column (default adjusted_close)")
    p_an.add_argument("--window", type=int, help="block length for maxima (default 1000)")
    p_an.add_argument("--bins-per-decade", type=int, dest="bins_per_decade")
    p_an.add_argument("--fit-min", type=int, dest="fit_min")
    p_an.add_argument("--fit-max", type=int, dest="fit_max")
    p_an.add_argument("--tau-max", type=int, dest="tau_max",
                      help="max autocorrelation lag (default 20)")
    add_common(p_an)
    p_an.set_defaults(func=lambda a: cmd_analyze(p_an, a))

    p_sc = sub.add_parser("scaling", help="GEV parameters of longest ages vs series length")
    p_sc.add_argument("--mu", type=float)
    p_sc.add_argument("--sigma", type=float)
    p_sc.add_argument("--n-list", dest="n_list", help="comma-separated series lengths")
    p_sc.add_argument("--m", type=int, help="realizations per length (default 1000)")
    p_sc.add_argument("--y0", type=float)
    p_sc.add_argument("--threshold", type=int,
                      help="only lengths above this enter the ln(n) fits (default 30000)")
    add_common(p_sc)
    p_sc.set_defaults(func=lambda a: cmd_scaling(p_sc, a))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RecordLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
