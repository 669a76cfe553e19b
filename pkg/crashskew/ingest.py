"""Loading, validation and calendar alignment of the input series.

Returns live on trading days; epidemic counts and search volumes live on
calendar days. This module holds the dated series types, the CSV loaders
for returns and counts, log growth rates, the trading-day panel used by the
regressions, and the descriptive statistics used by the summary report.

All dates are stored as ``numpy.datetime64[D]`` arrays.
"""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Dict, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from .errors import DataValidationError

logger = logging.getLogger(__name__)

Source = Union[str, Path, IO[bytes], IO[str]]
DateLike = Union[str, np.datetime64, "pd.Timestamp"]

ONE_DAY = np.timedelta64(1, "D")
COUNT_MAX = int(np.iinfo(np.int64).max)


def to_day(value: DateLike) -> np.datetime64:
    """Coerce a date-like value (ISO string, Timestamp, datetime64) to datetime64[D]."""
    return np.datetime64(pd.Timestamp(value).date(), "D")


def _as_dates(dates: Iterable) -> np.ndarray:
    arr = np.asarray(dates)
    if arr.dtype.kind != "M":
        arr = pd.to_datetime(pd.Series(list(arr))).to_numpy()
    return arr.astype("datetime64[D]")


# ---------------------------------------------------------------------------
# Series types
# ---------------------------------------------------------------------------


@dataclass
class ValueSeries:
    """A dated numeric column; NaN marks a missing value.

    Attributes:
        dates: strictly increasing dates.
        values: one float per date; infinities are rejected.
    """

    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.dates = _as_dates(self.dates)
        self.values = np.asarray(self.values, dtype=float)
        if self.dates.ndim != 1 or self.values.ndim != 1:
            raise ValueError("dates and values must be one-dimensional")
        if len(self.dates) != len(self.values):
            raise ValueError(
                f"dates and values must have equal length; got {len(self.dates)} and {len(self.values)}"
            )
        if len(self.dates) > 1 and not np.all(np.diff(self.dates) > np.timedelta64(0, "D")):
            raise ValueError("dates must be strictly increasing")
        if np.any(np.isinf(self.values)):
            raise ValueError("values must not contain infinities")

    def __len__(self) -> int:
        return len(self.dates)

    def to_series(self) -> pd.Series:
        """Return the values as a pandas Series indexed by date."""
        return pd.Series(self.values, index=pd.DatetimeIndex(self.dates))


@dataclass
class ReturnSeries(ValueSeries):
    """Daily market returns on trading days (fractions, e.g. 0.0123)."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.dates) < 2:
            raise DataValidationError(f"return series too short: need at least 2 rows, got {len(self.dates)}")
        if not np.all(np.isfinite(self.values)):
            raise DataValidationError("return values must all be finite")


@dataclass
class GrowthSeries(ValueSeries):
    """Log growth rates of a count series; NaN where the zero policy skips a pair."""


@dataclass
class CountSeries:
    """Non-negative daily counts on consecutive calendar days."""

    dates: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.dates = _as_dates(self.dates)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.dates) != len(self.counts):
            raise ValueError("dates and counts must have equal length")
        if len(self.dates) == 0:
            raise DataValidationError("count series is empty")
        if np.any(self.counts < 0):
            raise DataValidationError("counts must be non-negative")
        gaps = np.flatnonzero(np.diff(self.dates) != ONE_DAY)
        if gaps.size:
            i = int(gaps[0])
            raise DataValidationError(
                f"calendar gap between {self.dates[i]} and {self.dates[i + 1]}; count dates must be consecutive"
            )

    def __len__(self) -> int:
        return len(self.dates)


class ZeroPolicy(str, Enum):
    """How log growth treats zero counts."""

    LOG1P = "log1p"
    SKIP = "skip"


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------


def _read_rows(source: Source, header: Sequence[str]) -> pd.DataFrame:
    """Read a headed CSV as strings, checking the header exactly.

    Accepts a path or a binary/text stream. Blank lines are kept so that row
    ``i`` of the frame is file line ``i + 2``.
    """
    if isinstance(source, (str, Path)):
        raw = Path(source).read_bytes()
    else:
        raw = source.read()
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DataValidationError(f"input is not valid UTF-8: {exc}") from exc

    if not text.strip():
        raise DataValidationError(f"missing header; expected '{','.join(header)}'", line=1)
    try:
        frame = pd.read_csv(
            io.StringIO(text),
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
        )
    except pd.errors.ParserError as exc:
        raise DataValidationError(f"malformed row: {exc}") from exc

    columns = [c.strip() for c in frame.columns]
    if columns != list(header):
        raise DataValidationError(
            f"unexpected header {','.join(columns)!r}; expected '{','.join(header)}'", line=1
        )
    frame.columns = columns
    return frame


def _parse_dates(column: pd.Series) -> np.ndarray:
    parsed = pd.to_datetime(column.str.strip(), format="%Y-%m-%d", errors="coerce")
    bad = np.flatnonzero(parsed.isna().to_numpy())
    if bad.size:
        i = int(bad[0])
        raise DataValidationError(f"malformed row: unparseable date {column.iloc[i]!r}", line=i + 2)
    return parsed.to_numpy().astype("datetime64[D]")


def _parse_floats(column: pd.Series, name: str) -> np.ndarray:
    values = np.empty(len(column), dtype=float)
    for i, raw in enumerate(column):
        try:
            values[i] = float(raw)
        except ValueError:
            raise DataValidationError(f"malformed row: {name} {raw!r} is not a number", line=i + 2) from None
        if not math.isfinite(values[i]):
            raise DataValidationError(f"non-finite {name} {raw!r}", line=i + 2)
    return values


def _sort_unique(dates: np.ndarray) -> np.ndarray:
    """Return a stable sort order, rejecting duplicate dates with the later file line."""
    order = np.argsort(dates, kind="stable")
    dup = np.flatnonzero(np.diff(dates[order]) == np.timedelta64(0, "D"))
    if dup.size:
        later = int(max(order[dup[0]], order[dup[0] + 1]))
        raise DataValidationError(f"duplicate date {dates[later]}", line=later + 2)
    return order


def load_return_csv(source: Source) -> ReturnSeries:
    """Load a ``date,return`` CSV into a validated ReturnSeries sorted by date.

    Raises:
        DataValidationError: malformed row (with line number), duplicate date,
            non-finite value, or fewer than two rows.
    """
    frame = _read_rows(source, ("date", "return"))
    dates = _parse_dates(frame["date"])
    values = _parse_floats(frame["return"], "return")
    order = _sort_unique(dates)
    series = ReturnSeries(dates=dates[order], values=values[order])
    logger.debug("loaded %d returns from %s to %s", len(series), series.dates[0], series.dates[-1])
    return series


def load_count_csv(source: Source) -> CountSeries:
    """Load a ``date,count`` CSV of non-negative integer counts on consecutive days.

    Raises:
        DataValidationError: malformed row, negative or fractional count,
            count beyond the int64 range, duplicate date or a gap in the calendar.
    """
    frame = _read_rows(source, ("date", "count"))
    dates = _parse_dates(frame["date"])
    counts = np.empty(len(frame), dtype=np.int64)
    for i, raw in enumerate(frame["count"]):
        try:
            number = float(raw)
        except ValueError:
            raise DataValidationError(f"malformed row: count {raw!r} is not a number", line=i + 2) from None
        if not math.isfinite(number) or not number.is_integer():
            raise DataValidationError(f"count {raw!r} is not an integer", line=i + 2)
        if number < 0:
            raise DataValidationError(f"negative count {raw!r}", line=i + 2)
        if number > COUNT_MAX:
            raise DataValidationError(f"count {raw!r} exceeds {COUNT_MAX}", line=i + 2)
        counts[i] = int(number)
    order = _sort_unique(dates)
    return CountSeries(dates=dates[order], counts=counts[order])


# ---------------------------------------------------------------------------
# Growth rates
# ---------------------------------------------------------------------------


def log_growth(counts: CountSeries, zero_policy: Union[ZeroPolicy, str] = ZeroPolicy.LOG1P) -> GrowthSeries:
    """Return day-on-day log growth of a count series.

    Under ``log1p`` each value is ln(c_t + 1) - ln(c_{t-1} + 1). Under ``skip``
    it is ln(c_t) - ln(c_{t-1}) and pairs touching a zero count are missing.
    The result is dated on the later day of each pair.
    """
    policy = ZeroPolicy(zero_policy)
    if len(counts) < 2:
        raise DataValidationError("count series too short for growth rates: need at least 2 days")
    levels = counts.counts.astype(float)
    if policy is ZeroPolicy.LOG1P:
        logs = np.log1p(levels)
        values = logs[1:] - logs[:-1]
    else:
        with np.errstate(divide="ignore"):
            logs = np.log(levels)
        values = logs[1:] - logs[:-1]
        values[(levels[1:] == 0) | (levels[:-1] == 0)] = np.nan
    return GrowthSeries(dates=counts.dates[1:], values=values)


def extend_counts(counts: CountSeries, start: DateLike, end: Optional[DateLike] = None) -> CountSeries:
    """Zero-fill a count series so it covers ``start`` (and ``end`` when given).

    Days before the first reported date are treated as having no cases, which
    lets full-sample regressions run over the pre-epidemic period.
    """
    first = min(to_day(start), counts.dates[0])
    last = counts.dates[-1] if end is None else max(to_day(end), counts.dates[-1])
    dates = np.arange(first, last + ONE_DAY, ONE_DAY)
    filled = np.zeros(len(dates), dtype=np.int64)
    offset = int((counts.dates[0] - first) / ONE_DAY)
    filled[offset : offset + len(counts)] = counts.counts
    if len(dates) != len(counts):
        logger.info("zero-filled count series from %d to %d days (%s to %s)", len(counts), len(dates), first, last)
    return CountSeries(dates=dates, counts=filled)


# ---------------------------------------------------------------------------
# Trading-day panel
# ---------------------------------------------------------------------------


def lag_label(label: str, lag: int) -> str:
    """Column name of ``label`` lagged by ``lag`` trading days (``label`` itself at lag 0)."""
    return label if lag == 0 else f"{label}_lag{lag}"


def interaction_label(left: str, right: str) -> str:
    return f"{left}*{right}"


@dataclass
class AlignedPanel:
    """Trading-day table of regressors.

    Attributes:
        dates: trading days.
        columns: column label -> float array of the same length (NaN = missing).
    """

    dates: np.ndarray
    columns: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.dates = _as_dates(self.dates)
        for label, values in list(self.columns.items()):
            arr = np.asarray(values, dtype=float)
            if arr.shape != (len(self.dates),):
                raise ValueError(f"column {label!r} has length {arr.size}; expected {len(self.dates)}")
            self.columns[label] = arr

    def __len__(self) -> int:
        return len(self.dates)

    def column(self, label: str) -> np.ndarray:
        """Return a column, raising DataValidationError for unknown labels."""
        try:
            return self.columns[label]
        except KeyError:
            raise DataValidationError(
                f"unknown column {label!r}; available: {', '.join(sorted(self.columns))}"
            ) from None

    def usable(self, labels: Optional[Sequence[str]] = None) -> np.ndarray:
        """Boolean mask of rows with no missing value in ``labels`` (all columns by default)."""
        labels = list(self.columns) if labels is None else list(labels)
        mask = np.ones(len(self.dates), dtype=bool)
        for label in labels:
            mask &= np.isfinite(self.column(label))
        return mask

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.columns, index=pd.DatetimeIndex(self.dates, name="date"))


def align_panel(
    trading: Union[np.ndarray, ValueSeries],
    named_series: Sequence[Tuple[str, ValueSeries]],
    lags: Optional[Mapping[str, Union[int, Sequence[int]]]] = None,
    interactions: Optional[Sequence[Tuple[str, str]]] = None,
) -> AlignedPanel:
    """Place calendar or trading-day series onto the trading-day grid.

    For label ``L`` and lag ``k`` each trading day receives the value of ``L``
    on the calendar date of the trading day ``k`` trading days earlier. Days
    the source does not cover are missing. Interaction columns are
    elementwise products of two existing column labels.

    Args:
        trading: trading dates, or a series whose dates are the trading days.
        named_series: (label, series) pairs.
        lags: label -> lag or list of lags in trading days; labels not listed get lag 0.
        interactions: (left column, right column) pairs to multiply.

    Raises:
        DataValidationError: duplicate or unknown label, negative lag, or a lag
            that exceeds the available trading history.
    """
    dates = _as_dates(trading.dates if isinstance(trading, ValueSeries) else trading)
    n = len(dates)
    index = pd.DatetimeIndex(dates)

    known = [label for label, _ in named_series]
    if len(set(known)) != len(known):
        raise DataValidationError(f"duplicate series labels in {known}")
    lags = dict(lags or {})
    unknown = sorted(set(lags) - set(known))
    if unknown:
        raise DataValidationError(f"unknown label(s) in lags: {', '.join(unknown)}")

    columns: Dict[str, np.ndarray] = {}
    for label, series in named_series:
        base = series.to_series().reindex(index).to_numpy(dtype=float)
        requested = lags.get(label, 0)
        for k in ([requested] if isinstance(requested, int) else list(requested)):
            if k < 0:
                raise DataValidationError(f"negative lag {k} for {label!r}")
            if k >= n:
                raise DataValidationError(
                    f"requested lag {k} for {label!r} exceeds the {n} trading days available"
                )
            shifted = np.full(n, np.nan)
            shifted[k:] = base[: n - k]
            columns[lag_label(label, k)] = shifted
        covered = int(np.isfinite(base).sum())
        if covered < n:
            logger.info("%s covers %d of %d trading days", label, covered, n)

    for left, right in interactions or ():
        for parent in (left, right):
            if parent not in columns:
                raise DataValidationError(f"unknown interaction parent {parent!r}")
        columns[interaction_label(left, right)] = columns[left] * columns[right]

    return AlignedPanel(dates=dates, columns=columns)


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DescriptiveStats:
    """Summary statistics of a sample.

    ``skewness`` is NaN when the sample is constant (std = 0).
    """

    n: int
    mean: float
    min: float
    max: float
    std: float
    skewness: float
    kurtosis: float = math.nan


def descriptive_stats(values: Sequence[float], bias: bool = True) -> DescriptiveStats:
    """Summarise a sample.

    ``std`` uses the n-1 denominator. ``skewness`` is the moment estimator
    g1 = m3 / m2**1.5 with 1/n central moments; ``bias=False`` returns the
    adjusted Fisher-Pearson estimator instead.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise DataValidationError("descriptive statistics need at least 2 values")
    if not np.all(np.isfinite(arr)):
        raise DataValidationError("descriptive statistics need finite values")

    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        return DescriptiveStats(n=arr.size, mean=lo, min=lo, max=hi, std=0.0, skewness=math.nan)

    summary = stats.describe(arr, ddof=1, bias=bias)
    skewness = float(summary.skewness)
    return DescriptiveStats(
        n=int(summary.nobs),
        mean=min(max(float(summary.mean), lo), hi),
        min=lo,
        max=hi,
        std=math.sqrt(float(summary.variance)),
        skewness=skewness,
        kurtosis=float(summary.kurtosis),
    )


class SubsampleStats(NamedTuple):
    full: DescriptiveStats
    before: DescriptiveStats
    after: DescriptiveStats


def split_mask(dates: np.ndarray, split_date: DateLike) -> np.ndarray:
    """Mask of dates strictly before ``split_date``; rejects splits outside the sample."""
    split = to_day(split_date)
    dates = _as_dates(dates)
    if not dates[0] < split <= dates[-1]:
        raise DataValidationError(f"split date {split} outside sample {dates[0]} .. {dates[-1]}")
    return dates < split


def subsample_stats(series: ValueSeries, split_date: DateLike, bias: bool = True) -> SubsampleStats:
    """Descriptive statistics of the full sample and of both sides of ``split_date``."""
    before = split_mask(series.dates, split_date)
    values = series.values
    return SubsampleStats(
        full=descriptive_stats(values, bias=bias),
        before=descriptive_stats(values[before], bias=bias),
        after=descriptive_stats(values[~before], bias=bias),
    )


class WelchResult(NamedTuple):
    t: float
    p_value: float
    df: float


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance t test of equal means.

    Degrees of freedom follow Welch-Satterthwaite; the p-value is two-sided.

    Raises:
        DataValidationError: a sample shorter than 2 or with zero variance.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for name, sample in (("a", a), ("b", b)):
        if sample.size < 2:
            raise DataValidationError(f"sample {name} needs at least 2 values")
        if np.var(sample, ddof=1) == 0.0:
            raise DataValidationError(f"sample {name} has zero variance")

    result = stats.ttest_ind(a, b, equal_var=False)
    va = np.var(a, ddof=1) / a.size
    vb = np.var(b, ddof=1) / b.size
    df = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return WelchResult(t=float(result.statistic), p_value=float(result.pvalue), df=float(df))

