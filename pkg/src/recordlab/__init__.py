"""Record statistics of correlated series: simulation, extraction and fitting.

The package covers the full pipeline: parse daily price CSVs or simulate
geometric random walks, extract upper records and record ages, and fit the
age distribution (discrete power law) and the distribution of longest ages
(generalized extreme value / Frechet), including how those fits scale with
series length.
"""

from .autocorr import AutocorrSeries, autocorrelation
from .binning import LogHistogram, histogram_to_tsv, log_binned_histogram
from .errors import CsvParseError, FitError, RecordLabError, SimulationOverflow
from .gev import (
    GevFit,
    ScaledMaxima,
    fit_gev,
    frechet_mean,
    gev_density,
    gev_log_likelihood,
    gev_pdf,
    scale_maxima,
    standardized_z_density,
    unscale_maxima,
)
from .grw import (
    ALL_COLLECTORS,
    COLLECTOR_LONGEST_AGE,
    COLLECTOR_POOLED_AGES,
    COLLECTOR_RECORD_COUNT,
    EnsembleSpec,
    EnsembleSummary,
    GrwParams,
    derive_seed,
    path_from_increments,
    resolve_workers,
    run_ensemble,
    simulate,
)
from .ingest import (
    ReturnStats,
    TimeSeries,
    estimate_params,
    log_returns,
    parse_daily_csv,
    portfolio_mean_params,
    serialize_daily_csv,
    window,
)
from .powerlaw import (
    PowerLawFit,
    fit_power_law_ls,
    fit_power_law_mle,
    harmonic_number,
)
from .records import (
    BlockMaxima,
    RecordSequence,
    block_maxima,
    find_upper_records,
    longest_record_age,
    record_ages,
    record_count,
    record_sequence_to_tsv,
)
from .scaling import (
    LogFit,
    ScalingRow,
    ScalingTable,
    fit_log_columns,
    fit_power_scaling,
    mean_records_scaling,
    scaling_study,
)

__version__ = "0.1.0"
