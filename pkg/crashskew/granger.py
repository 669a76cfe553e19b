"""Bivariate Granger non-causality tests with BIC lag selection."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats
from statsmodels.tsa.tsatools import lagmat

from .errors import DataValidationError
from .regress import check_rank, fit_least_squares

logger = logging.getLogger(__name__)

DEFAULT_P_MAX = 10


@dataclass
class GrangerResult:
    """F test of "``cause`` does not Granger-cause ``effect``".

    ``df_den`` counts the effective sample, T - p rows, less the 2p + 1
    unrestricted coefficients.
    """

    cause: str
    effect: str
    p: int
    f_stat: float
    p_value: float
    df_num: int
    df_den: int
    rss_restricted: float
    rss_unrestricted: float
    n_obs: int
    bic_by_lag: Dict[int, float] = field(default_factory=dict)

    @property
    def direction(self) -> Tuple[str, str]:
        return self.cause, self.effect

    @property
    def label(self) -> str:
        return f"{self.cause} -> {self.effect}"

    @property
    def df(self) -> Tuple[int, int]:
        return self.df_num, self.df_den


def _pair(y: Sequence[float], x: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.ndim != 1 or x.ndim != 1 or len(y) != len(x):
        raise DataValidationError(f"series must be one-dimensional and of equal length; got {y.shape} and {x.shape}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
        raise DataValidationError("series contain missing or non-finite values")
    return y, x


def select_lag_bic(y: Sequence[float], x: Sequence[float], p_max: int = DEFAULT_P_MAX) -> Tuple[int, Dict[int, float]]:
    """Choose the VAR(p) order minimising BIC over p = 1..p_max.

    Every candidate is fitted on the same T - p_max rows. BIC is
    ln det(Sigma) + ln(T*) * k / T* with Sigma the ML residual covariance,
    T* = T - p_max and k = 2 * (1 + 2p) estimated coefficients.

    Raises:
        DataValidationError: p_max < 1 or p_max > T / 4.
    """
    y, x = _pair(y, x)
    n = len(y)
    if p_max < 1:
        raise DataValidationError(f"p_max must be >= 1; got {p_max}")
    if p_max > n / 4:
        raise DataValidationError(
            f"insufficient observations for p_max={p_max}: have {n}, need at least {4 * p_max}; "
            f"use a bound of at most {max(n // 4, 1)}"
        )

    data = np.column_stack([y, x])
    # columns: y_{t-1}, x_{t-1}, y_{t-2}, x_{t-2}, ...
    lags = lagmat(data, maxlag=p_max, trim="both", original="ex")
    target = data[p_max:]
    n_common = len(target)

    bic: Dict[int, float] = {}
    for p in range(1, p_max + 1):
        X = np.column_stack([np.ones(n_common), lags[:, : 2 * p]])
        resid = np.column_stack([fit_least_squares(target[:, j], X).resid for j in range(2)])
        sigma = resid.T @ resid / n_common
        sign, logdet = np.linalg.slogdet(sigma)
        k = 2 * (1 + 2 * p)
        bic[p] = (logdet if sign > 0 else -math.inf) + math.log(n_common) * k / n_common
    chosen = min(bic, key=lambda p: (bic[p], p))
    logger.info("VAR lag selection: p=%d (p_max=%d, T*=%d)", chosen, p_max, n_common)
    return chosen, bic


def granger_designs(y: Sequence[float], x: Sequence[float], p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (target, restricted X, unrestricted X) on the T - p rows with full lag history.

    Restricted columns are [1, y lags 1..p]; unrestricted append x lags 1..p.
    """
    y, x = _pair(y, x)
    if p < 1:
        raise DataValidationError(f"lag order must be >= 1; got {p}")
    if p >= len(y):
        raise DataValidationError(f"lag order {p} needs more than {len(y)} observations")
    y_lags = lagmat(y, maxlag=p, trim="both", original="ex")
    x_lags = lagmat(x, maxlag=p, trim="both", original="ex")
    ones = np.ones((len(y) - p, 1))
    restricted = np.hstack([ones, y_lags])
    return y[p:], restricted, np.hstack([restricted, x_lags])


def granger_f(
    y: Sequence[float],
    x: Sequence[float],
    p: int,
    y_label: str = "y",
    x_label: str = "x",
) -> GrangerResult:
    """Test whether lags of x improve the autoregression of y ("x -> y").

    F = ((RSS_r - RSS_u) / p) / (RSS_u / (T - p - 2p - 1)), upper tail of F(p, T - p - 2p - 1).

    Raises:
        DataValidationError: too few observations, or a degenerate restricted regression.
    """
    target, restricted, unrestricted = granger_designs(y, x, p)
    n_eff = len(target)
    df_den = n_eff - 2 * p - 1
    if df_den <= 0:
        raise DataValidationError(f"lag order {p} leaves no residual degrees of freedom in {n_eff} rows")
    check_rank(restricted, ["const"] + [f"{y_label}_lag{k}" for k in range(1, p + 1)])

    rss_r = float(fit_least_squares(target, restricted).ssr)
    rss_u = float(fit_least_squares(target, unrestricted).ssr)
    if rss_u <= 0:
        raise DataValidationError(f"degenerate regression: {y_label} is fitted exactly by its own and {x_label} lags")
    f_stat = max(0.0, ((rss_r - rss_u) / p) / (rss_u / df_den))
    p_value = float(stats.f.sf(f_stat, p, df_den))
    logger.info("%s -> %s: F=%.4f p=%.4f (p=%d)", x_label, y_label, f_stat, p_value, p)
    return GrangerResult(
        cause=x_label,
        effect=y_label,
        p=p,
        f_stat=f_stat,
        p_value=min(1.0, max(0.0, p_value)),
        df_num=p,
        df_den=df_den,
        rss_restricted=rss_r,
        rss_unrestricted=rss_u,
        n_obs=n_eff,
    )


def granger_both(
    y_label: str,
    y: Sequence[float],
    x_label: str,
    x: Sequence[float],
    p_max: int = DEFAULT_P_MAX,
) -> List[GrangerResult]:
    """Select one VAR order by BIC and test both directions: [x -> y, y -> x]."""
    p, bic = select_lag_bic(y, x, p_max)
    results = [granger_f(y, x, p, y_label, x_label), granger_f(x, y, p, x_label, y_label)]
    for result in results:
        result.bic_by_lag = dict(bic)
    return results
