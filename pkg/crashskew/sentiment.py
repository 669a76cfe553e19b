"""Pandemic fear sentiment index built from daily search volumes.

The index is ln(volume + 1) of a single, already aggregated search-volume
column; which keywords make up that volume is decided upstream. The dummy
flags days whose volume is strictly above the median of a reference window.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from .errors import DataValidationError
from .ingest import DateLike, ONE_DAY, Source, ValueSeries, _as_dates, _parse_dates, _parse_floats, _read_rows, _sort_unique, to_day

logger = logging.getLogger(__name__)

DateWindow = Tuple[DateLike, DateLike]


@dataclass
class VolumeSeries(ValueSeries):
    """Daily search volumes (non-negative)."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not np.all(np.isfinite(self.values)):
            raise DataValidationError("search volumes must be finite")
        if np.any(self.values < 0):
            raise DataValidationError("search volumes must be non-negative")


@dataclass
class SentimentSeries:
    """Fear index and its median-split dummy on calendar dates; NaN marks a day without search data."""

    dates: np.ndarray
    fear_sent: np.ndarray
    d_fear: np.ndarray

    def __post_init__(self) -> None:
        self.dates = _as_dates(self.dates)
        self.fear_sent = np.asarray(self.fear_sent, dtype=float)
        self.d_fear = np.asarray(self.d_fear, dtype=float)
        if not (len(self.dates) == len(self.fear_sent) == len(self.d_fear)):
            raise ValueError("dates, fear_sent and d_fear must have equal length")
        if not np.array_equal(np.isnan(self.fear_sent), np.isnan(self.d_fear)):
            raise ValueError("fear_sent and d_fear must be missing on the same days")
        if np.any(self.fear_sent < 0):
            raise ValueError("fear_sent must be non-negative")
        if not np.all(np.isin(self.d_fear[~np.isnan(self.d_fear)], (0, 1))):
            raise ValueError("d_fear must be 0 or 1")

    def fear_series(self) -> ValueSeries:
        return ValueSeries(dates=self.dates, values=self.fear_sent)

    def dummy_series(self) -> ValueSeries:
        return ValueSeries(dates=self.dates, values=self.d_fear)


def load_volume_csv(source: Source) -> VolumeSeries:
    """Load a ``date,volume`` CSV of non-negative search volumes, sorted by date."""
    frame = _read_rows(source, ("date", "volume"))
    dates = _parse_dates(frame["date"])
    values = _parse_floats(frame["volume"], "volume")
    negative = np.flatnonzero(values < 0)
    if negative.size:
        i = int(negative[0])
        raise DataValidationError(f"negative volume {frame['volume'].iloc[i]!r}", line=i + 2)
    order = _sort_unique(dates)
    return VolumeSeries(dates=dates[order], values=values[order])


def fear_sentiment(volume: float) -> float:
    """Return the fear index ln(volume + 1).

    Raises:
        ValueError: negative or non-finite volume.
    """
    volume = float(volume)
    if not math.isfinite(volume) or volume < 0:
        raise ValueError(f"volume must be a finite non-negative number; got {volume}")
    return math.log1p(volume)


def fear_dummy(volumes: VolumeSeries, reference_window: Optional[DateWindow] = None) -> np.ndarray:
    """Return 1 where the volume is strictly above the reference-window median, else 0.

    Args:
        volumes: dated volumes.
        reference_window: inclusive (start, end) dates selecting the observations
            whose median is the threshold; None uses every observation.

    Raises:
        DataValidationError: the window selects no observation.
    """
    if reference_window is None:
        selected = volumes.values
    else:
        start, end = (to_day(d) for d in reference_window)
        selected = volumes.values[(volumes.dates >= start) & (volumes.dates <= end)]
    if selected.size == 0:
        raise DataValidationError(f"reference window {reference_window} selects no observation")
    threshold = float(np.median(selected))
    logger.debug("fear dummy threshold %.6g from %d observations", threshold, selected.size)
    return (volumes.values > threshold).astype(np.int8)


def default_reference_window(volumes: VolumeSeries) -> Optional[DateWindow]:
    """Calendar 2020 when the data touch it, else the full sample."""
    if len(volumes) and volumes.dates[0] <= np.datetime64("2020-12-31") and volumes.dates[-1] >= np.datetime64("2020-01-01"):
        return ("2020-01-01", "2020-12-31")
    return None


def build_sentiment(
    volumes: VolumeSeries,
    reference_window: Optional[DateWindow] = None,
    span: Optional[DateWindow] = None,
) -> SentimentSeries:
    """Build the daily fear index and dummy.

    The dummy threshold comes from observed volumes only. When ``span`` is
    given the result covers every calendar day in it: days before the search
    data start get volume 0, so fearSent = 0 and D_fear = 0, while gaps inside
    the data and days after its last date are missing (NaN).

    Raises:
        DataValidationError: no volume rows, or an empty reference window.
    """
    if len(volumes) == 0:
        raise DataValidationError("search volume series is empty")
    fear = np.log1p(volumes.values)
    dummy = fear_dummy(volumes, reference_window).astype(float)
    if span is None:
        return SentimentSeries(dates=volumes.dates, fear_sent=fear, d_fear=dummy)

    first = min(to_day(span[0]), volumes.dates[0])
    last = max(to_day(span[1]), volumes.dates[-1])
    days = np.arange(first, last + ONE_DAY, ONE_DAY)
    index = pd.DatetimeIndex(days)
    observed = pd.DatetimeIndex(volumes.dates)
    fear = pd.Series(fear, index=observed).reindex(index).to_numpy(dtype=float)
    dummy = pd.Series(dummy, index=observed).reindex(index).to_numpy(dtype=float)
    before = days < volumes.dates[0]
    fear[before] = 0.0
    dummy[before] = 0.0
    padded = int(before.sum())
    if padded:
        logger.info("search volume padded with %d zero-volume days before coverage", padded)
    missing = int(np.isnan(fear).sum())
    if missing:
        logger.info("search volume missing on %d calendar days", missing)
    return SentimentSeries(dates=days, fear_sent=fear, d_fear=dummy)
