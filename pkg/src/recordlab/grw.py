"""Geometric random walk simulation and reproducible record-statistics ensembles.

The walk multiplies an initial value by exp of i.i.d. Gaussian increments.
Ensembles derive one seed per realization from a master seed with a
splitmix64 mix, so any single realization can be reproduced standalone and
results are independent of worker count and scheduling. Per-realization
output is reduced streaming (an age-count array, one longest age and one
record count per realization) instead of storing whole paths.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .binning import log_binned_histogram
from .errors import SimulationOverflow
from .ingest import TimeSeries
from .records import find_upper_records, longest_record_age, record_ages, record_count

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15

# How randomness is produced, echoed into every ensemble summary.
RNG_DESCRIPTION = {
    "bit_generator": "PCG64",
    "normal_transform": "ziggurat",
    "seed_derivation": "splitmix64(master_seed + (index+1) * golden_gamma)",
}

COLLECTOR_POOLED_AGES = "pooled_ages"
COLLECTOR_LONGEST_AGE = "longest_age"
COLLECTOR_RECORD_COUNT = "record_count"
ALL_COLLECTORS = frozenset(
    {COLLECTOR_POOLED_AGES, COLLECTOR_LONGEST_AGE, COLLECTOR_RECORD_COUNT}
)


@dataclass(frozen=True)
class GrwParams:
    """Per-step increment mean/stddev, series length and initial value."""

    mu: float
    sigma: float
    n_steps: int
    y0: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.n_steps < 2:
            raise ValueError("n_steps must be >= 2")
        if not self.y0 > 0:
            raise ValueError("y0 must be > 0")


@dataclass(frozen=True)
class EnsembleSpec:
    """A simulation batch: parameters, realization count and master seed."""

    params: GrwParams
    n_realizations: int
    master_seed: int

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for realization ``index``: splitmix64 stream step from the master.

    The gamma increment is odd, so distinct indices give distinct mix inputs
    mod 2**64, and the finalizer is a bijection; the mapping is injective in
    ``index`` for any fixed master seed.
    """
    if index < 0:
        raise ValueError("index must be >= 0")
    z = (master_seed + (index + 1) * _SPLITMIX_GAMMA) & _MASK64
    return _mix64(z)


def path_from_increments(y0: float, increments: np.ndarray) -> np.ndarray:
    """Multiplicative path y[0]=y0, y[i+1]=y[i]*exp(increments[i]).

    Deterministic given its inputs; used directly by tests that inject
    constant or pre-drawn increments.
    """
    increments = np.asarray(increments, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        values = np.cumprod(np.concatenate(([float(y0)], np.exp(increments))))
    if not np.isfinite(values[-1]) or values[-1] <= 0.0 or not np.all(np.isfinite(values)):
        raise SimulationOverflow(
            "path left the positive float range; reduce sigma*sqrt(n) or |mu|*n"
        )
    return values


def simulate(params: GrwParams, seed: int) -> TimeSeries:
    """One realization of length ``n_steps``; identical seed gives identical bits."""
    rng = np.random.Generator(np.random.PCG64(seed))
    increments = rng.normal(params.mu, params.sigma, params.n_steps - 1)
    return TimeSeries(values=path_from_increments(params.y0, increments), label="grw")


@dataclass
class EnsembleSummary:
    """Streamed statistics of one ensemble, mergeable and order-independent.

    ``age_counts[r]`` is the pooled number of record ages equal to r.
    ``rmax`` / ``record_counts`` are indexed by realization; an ``rmax`` of 0
    marks a realization with no age under the chosen censoring policy.
    """

    spec: EnsembleSpec
    collectors: tuple[str, ...]
    include_censored_ages: bool
    include_censored_rmax: bool
    age_counts: np.ndarray | None
    rmax: np.ndarray | None
    record_counts: np.ndarray | None

    def pooled_ages(self) -> np.ndarray:
        """Expand the age-count array back to one entry per observed age."""
        if self.age_counts is None:
            raise ValueError("pooled ages were not collected")
        return np.repeat(np.arange(len(self.age_counts)), self.age_counts)

    def to_json(self, bins_per_decade: int = 8) -> str:
        """Canonical JSON document; byte-identical for identical ensembles."""
        doc: dict = {
            "format": "recordlab.ensemble.v1",
            "spec": {
                "mu": self.spec.params.mu,
                "sigma": self.spec.params.sigma,
                "n_steps": self.spec.params.n_steps,
                "y0": self.spec.params.y0,
                "n_realizations": self.spec.n_realizations,
                "master_seed": self.spec.master_seed,
            },
            "rng": dict(RNG_DESCRIPTION),
            "collectors": list(self.collectors),
            "censoring": {
                "ages_include_censored": self.include_censored_ages,
                "rmax_include_censored": self.include_censored_rmax,
            },
        }
        if self.age_counts is not None:
            occupied = np.flatnonzero(self.age_counts)
            doc["age_counts"] = [[int(r), int(self.age_counts[r])] for r in occupied]
            if len(occupied) > 0:
                hist = log_binned_histogram(self.pooled_ages(), bins_per_decade)
                doc["age_histogram"] = {
                    "bins_per_decade": bins_per_decade,
                    "bin_edges": hist.bin_edges.tolist(),
                    "centers": hist.centers.tolist(),
                    "density": hist.density.tolist(),
                    "counts": hist.counts.tolist(),
                }
            else:
                doc["age_histogram"] = None
        if self.rmax is not None or self.record_counts is not None:
            m = self.spec.n_realizations
            rmax = self.rmax.tolist() if self.rmax is not None else [None] * m
            counts = self.record_counts.tolist() if self.record_counts is not None else [None] * m
            doc["realizations"] = [[j, rmax[j], counts[j]] for j in range(m)]
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def resolve_workers(requested: int | None = None) -> int:
    """Worker count for ensemble execution, capped by RECORDLAB_THREADS."""
    workers = int(requested) if requested else 1
    cap = os.environ.get("RECORDLAB_THREADS")
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def _chunk_stats(args) -> tuple[int, np.ndarray | None, np.ndarray | None, np.ndarray | None]:
    spec, j_lo, j_hi, want_ages, want_rmax, want_count, inc_ages, inc_rmax = args
    n = spec.params.n_steps
    age_counts = np.zeros(n, dtype=np.int64) if want_ages else None
    rmax = np.zeros(j_hi - j_lo, dtype=np.int64) if want_rmax else None
    counts = np.zeros(j_hi - j_lo, dtype=np.int64) if want_count else None
    for j in range(j_lo, j_hi):
        series = simulate(spec.params, derive_seed(spec.master_seed, j))
        rs = find_upper_records(series)
        if want_ages:
            ages = record_ages(rs, include_censored=inc_ages)
            np.add.at(age_counts, ages, 1)
        if want_rmax:
            try:
                rmax[j - j_lo] = longest_record_age(rs, include_censored=inc_rmax)
            except ValueError:
                rmax[j - j_lo] = 0
        if want_count:
            counts[j - j_lo] = record_count(rs)
    return j_lo, age_counts, rmax, counts


def run_ensemble(
    spec: EnsembleSpec,
    collectors: frozenset[str] | set[str],
    *,
    include_censored_ages: bool = False,
    include_censored_rmax: bool = True,
    n_workers: int = 1,
    chunk_size: int = 512,
) -> EnsembleSummary:
    """Run all realizations and merge the requested collectors.

    The merge is a sum of integer count arrays plus index-ordered placement
    of per-realization values, so the summary does not depend on worker
    count, chunking or completion order.
    """
    collectors = frozenset(collectors)
    if not collectors:
        raise ValueError("at least one collector is required")
    unknown = collectors - ALL_COLLECTORS
    if unknown:
        raise ValueError(f"unknown collectors: {sorted(unknown)}")

    want_ages = COLLECTOR_POOLED_AGES in collectors
    want_rmax = COLLECTOR_LONGEST_AGE in collectors
    want_count = COLLECTOR_RECORD_COUNT in collectors
    m = spec.n_realizations
    n = spec.params.n_steps

    tasks = [
        (spec, lo, min(lo + chunk_size, m), want_ages, want_rmax, want_count,
         include_censored_ages, include_censored_rmax)
        for lo in range(0, m, chunk_size)
    ]

    workers = resolve_workers(n_workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_stats, tasks))
    else:
        results = [_chunk_stats(t) for t in tasks]

    age_counts = np.zeros(n, dtype=np.int64) if want_ages else None
    rmax = np.zeros(m, dtype=np.int64) if want_rmax else None
    counts = np.zeros(m, dtype=np.int64) if want_count else None
    for j_lo, chunk_ages, chunk_rmax, chunk_counts in results:
        hi = j_lo + (len(chunk_rmax) if chunk_rmax is not None
                     else len(chunk_counts) if chunk_counts is not None
                     else 0)
        if want_ages:
            age_counts += chunk_ages
        if want_rmax:
            rmax[j_lo:hi] = chunk_rmax
        if want_count:
            counts[j_lo:hi] = chunk_counts

    return EnsembleSummary(
        spec=spec,
        collectors=tuple(sorted(collectors)),
        include_censored_ages=include_censored_ages,
        include_censored_rmax=include_censored_rmax,
        age_counts=age_counts,
        rmax=rmax,
        record_counts=counts,
    )
