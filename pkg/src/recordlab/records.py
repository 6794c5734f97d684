"""Upper-record detection and record-age bookkeeping.

An observation is an upper record when it strictly exceeds every earlier
observation; the first observation counts as a record by convention. A
record's age is the number of steps until the next record appears. The last
record's age is open-ended (censored): we only know it survived until the
series ended, so it is tracked separately and every age-consuming operation
takes an explicit censoring flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ingest import TimeSeries, _as_values


@dataclass(frozen=True)
class RecordSequence:
    """Record times (1-based), record values and derived record ages.

    ``censored_age`` is ``series_length - record_times[-1]``, or None when
    the last record falls on the final sample (nothing survived past it).
    Invariant: ``record_times[-1] + (censored_age or 0) == series_length``.
    """

    record_times: np.ndarray
    record_values: np.ndarray
    closed_ages: np.ndarray
    censored_age: int | None
    series_length: int


@dataclass(frozen=True)
class BlockMaxima:
    """Longest record age per fixed-length block, in block order."""

    block_length: int
    maxima: np.ndarray


def find_upper_records(series: TimeSeries | Sequence[float]) -> RecordSequence:
    """Detect upper records in one left-to-right pass over the running maximum.

    Ties are not records: an observation must strictly exceed the running
    maximum. Index 1 is always a record.
    """
    values = _as_values(series)
    n = len(values)
    if n == 0:
        raise ValueError("cannot detect records in an empty series")
    running_max = np.maximum.accumulate(values)
    is_record = np.empty(n, dtype=bool)
    is_record[0] = True
    is_record[1:] = values[1:] > running_max[:-1]
    times = np.flatnonzero(is_record).astype(np.int64) + 1
    censored = int(n - times[-1])
    return RecordSequence(
        record_times=times,
        record_values=values[times - 1],
        closed_ages=np.diff(times),
        censored_age=censored if censored > 0 else None,
        series_length=n,
    )


def record_ages(rs: RecordSequence, include_censored: bool = False) -> np.ndarray:
    """Record ages in record order; the final open age is appended on request.

    The censored age is a lower bound on the true age of the last record,
    which is why distribution fitting excludes it by default.
    """
    if include_censored and rs.censored_age is not None:
        return np.concatenate([rs.closed_ages, [rs.censored_age]]).astype(np.int64)
    return rs.closed_ages.astype(np.int64)


def longest_record_age(rs: RecordSequence, include_censored: bool = True) -> int:
    """Maximum record age under the given censoring policy."""
    ages = record_ages(rs, include_censored=include_censored)
    if len(ages) == 0:
        raise ValueError("no record ages available under this censoring policy")
    return int(ages.max())


def record_count(rs: RecordSequence) -> int:
    return len(rs.record_times)


def block_maxima(blocks: Sequence[TimeSeries], include_censored: bool = True) -> BlockMaxima:
    """Longest record age of each block; records restart fresh in every block."""
    if not blocks:
        raise ValueError("no blocks given")
    lengths = {len(b) for b in blocks}
    if len(lengths) != 1:
        raise ValueError(f"blocks have mixed lengths: {sorted(lengths)}")
    maxima = np.array(
        [longest_record_age(find_upper_records(b), include_censored) for b in blocks],
        dtype=np.int64,
    )
    return BlockMaxima(block_length=lengths.pop(), maxima=maxima)


def record_sequence_to_tsv(rs: RecordSequence) -> str:
    """Serialize to TSV rows (record_time, record_value, age, age_flag).

    Each record carries the age it opened: "closed" for ages ended by the
    next record, "censored" for the final open age, "none" with an empty age
    when the last record falls on the final sample.
    """
    lines = ["record_time\trecord_value\tage\tage_flag"]
    n = len(rs.record_times)
    for j in range(n):
        if j < len(rs.closed_ages):
            age, flag = str(int(rs.closed_ages[j])), "closed"
        elif rs.censored_age is not None:
            age, flag = str(rs.censored_age), "censored"
        else:
            age, flag = "", "none"
        lines.append(f"{int(rs.record_times[j])}\t{float(rs.record_values[j])!r}\t{age}\t{flag}")
    return "\n".join(lines) + "\n"
