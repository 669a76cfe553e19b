"""Markdown and CSV rendering of fits, regressions, causality tests and statistics.

Markdown tables are GitHub-flavoured (``tabulate``); CSV files are written
by pandas with ``\\n`` line endings and a fixed float format so repeated runs
produce identical bytes.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from tabulate import tabulate

from .garchs import PARAM_NAMES, GarchSFit
from .granger import GrangerResult
from .ingest import DescriptiveStats, SubsampleStats, WelchResult
from .regress import INTERCEPT, RegressionResult

TABLE_FORMAT = "github"
CSV_FLOAT_FORMAT = "%.10g"

_DISPLAY_NAMES = {INTERCEPT: "Intercept"}


def stars(p_value: float) -> str:
    """Significance marks at the 10/5/1% levels."""
    if not math.isfinite(p_value):
        return ""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    if p_value < 0.10:
        return "*"
    return ""


def coef_cell(coef: float, tstat: float, p_value: float, digits: int = 3) -> str:
    """Format ``coef*** (t)``; a missing t-statistic renders as ``(n/a)``."""
    t_text = f"{tstat:.2f}" if math.isfinite(tstat) else "n/a"
    return f"{coef:.{digits}f}{stars(p_value)} ({t_text})"


def _fmt(value: float, digits: int = 4) -> str:
    return f"{value:.{digits}f}" if math.isfinite(value) else "n/a"


def header(title: str, seed: Optional[int] = None, **facts: object) -> str:
    lines = [f"# {title}", ""]
    if seed is not None:
        lines.append(f"- seed: {seed}")
    for key, value in facts.items():
        lines.append(f"- {key}: {value}")
    return "\n".join(lines) + "\n"


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def write_text(text: str, path: Union[str, Path]) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# GARCH-S fit
# ---------------------------------------------------------------------------


def fit_table(fit: GarchSFit) -> str:
    """Markdown estimate table: one row per parameter, then lnL, AIC and SIC."""
    rows = [
        [name, _fmt(getattr(fit.params, name), 6), _fmt(fit.stderr[name], 6), _fmt(fit.tstat[name], 2)]
        for name in PARAM_NAMES
    ]
    rows += [
        ["log-likelihood", _fmt(fit.loglik, 3), "", ""],
        ["AIC", _fmt(fit.aic, 4), "", ""],
        ["SIC", _fmt(fit.sic, 4), "", ""],
    ]
    body = tabulate(rows, headers=["Parameter", "Estimate", "Std. error", "t-stat"], tablefmt=TABLE_FORMAT)
    text = header(
        "GARCH-S estimates",
        seed=fit.seed,
        shock_form=fit.shock_form.value,
        observations=fit.n_obs,
        converged=fit.converged,
    )
    text += "\n" + body + "\n"
    if fit.notes:
        text += "\nNotes:\n\n" + "".join(f"- {note}\n" for note in fit.notes)
    return text


# ---------------------------------------------------------------------------
# Regressions
# ---------------------------------------------------------------------------


def regression_table(results: Sequence[RegressionResult], seed: Optional[int] = None, title: str = "Regression") -> str:
    """Side-by-side markdown table; one column per model, N and R^2 rows last."""
    names: List[str] = []
    for result in results:
        for name in result.names:
            if name not in names:
                names.append(name)
    rows = []
    for name in names:
        row = [_DISPLAY_NAMES.get(name, name)]
        for result in results:
            if name in result.names:
                row.append(coef_cell(*result.coefficient(name)))
            else:
                row.append("")
        rows.append(row)
    rows.append(["N"] + [str(r.n_used) for r in results])
    rows.append(["R^2"] + [f"{r.r2:.3f}" for r in results])
    columns = ["Variables"] + [r.label or r.dependent for r in results]
    cov_types = sorted({r.cov_type for r in results})
    text = header(title, seed=seed, dependent=", ".join(sorted({r.dependent for r in results})), errors=", ".join(cov_types))
    text += "\n" + tabulate(rows, headers=columns, tablefmt=TABLE_FORMAT, disable_numparse=True) + "\n"
    text += "\n***, ** and * mark significance at the 1%, 5% and 10% levels; t-statistics in parentheses.\n"
    return text


def regression_frame(result: RegressionResult) -> pd.DataFrame:
    """One row per coefficient."""
    frame = result.to_frame().reset_index()
    frame["stars"] = [stars(p) for p in result.pvalue]
    frame.insert(0, "model", result.label)
    frame["n_used"] = result.n_used
    frame["r2"] = result.r2
    frame["cov_type"] = result.cov_type
    return frame


# ---------------------------------------------------------------------------
# Granger causality
# ---------------------------------------------------------------------------


def _bic_trace(bic: Dict[int, float]) -> str:
    return " ".join(f"{p}:{value:.4f}" for p, value in sorted(bic.items()))


def granger_table(results: Sequence[GrangerResult], seed: Optional[int] = None) -> str:
    rows = [
        [r.label, r.p, f"{r.f_stat:.4f}{stars(r.p_value)}", f"{r.p_value:.4f}", f"{r.df_num}, {r.df_den}"]
        for r in results
    ]
    text = header("Granger causality", seed=seed)
    text += "\n" + tabulate(rows, headers=["Direction", "Lag", "F", "p-value", "df"], tablefmt=TABLE_FORMAT, disable_numparse=True) + "\n"
    bic = results[0].bic_by_lag if results else {}
    if bic:
        text += f"\nBIC by lag: {_bic_trace(bic)}\n"
    text += '\nNull hypothesis per row: "cause does not Granger-cause effect".\n'
    return text


def granger_frame(results: Sequence[GrangerResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "cause": r.cause,
                "effect": r.effect,
                "lag": r.p,
                "f_stat": r.f_stat,
                "p_value": r.p_value,
                "df_num": r.df_num,
                "df_den": r.df_den,
                "n_obs": r.n_obs,
                "bic_by_lag": _bic_trace(r.bic_by_lag),
            }
            for r in results
        ]
    )


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------

_STATS_FIELDS = ("n", "mean", "min", "max", "std", "skewness", "kurtosis")


def _stats_rows(named: Iterable[Tuple[str, DescriptiveStats]]) -> List[Dict[str, object]]:
    return [{"sample": name, **{f: getattr(s, f) for f in _STATS_FIELDS}} for name, s in named]


def named_stats(stats: Union[DescriptiveStats, SubsampleStats], split_date: Optional[str] = None) -> List[Tuple[str, DescriptiveStats]]:
    if isinstance(stats, SubsampleStats):
        return [
            ("full", stats.full),
            (f"before {split_date}", stats.before),
            (f"from {split_date}", stats.after),
        ]
    return [("full", stats)]


def stats_table(
    named: Sequence[Tuple[str, DescriptiveStats]],
    tests: Sequence[Tuple[str, WelchResult]] = (),
    seed: Optional[int] = None,
    title: str = "Descriptive statistics",
) -> str:
    rows = [
        [r["sample"], r["n"]] + [_fmt(float(r[f]), 6) for f in _STATS_FIELDS[1:]]
        for r in _stats_rows(named)
    ]
    text = header(title, seed=seed)
    text += "\n" + tabulate(rows, headers=["Sample", "N", "Mean", "Min", "Max", "Std", "Skewness", "Kurtosis"], tablefmt=TABLE_FORMAT, disable_numparse=True) + "\n"
    if tests:
        test_rows = [[name, f"{w.t:.4f}{stars(w.p_value)}", f"{w.p_value:.4f}", f"{w.df:.2f}"] for name, w in tests]
        text += "\nWelch t tests (before vs. from the split date):\n\n"
        text += tabulate(test_rows, headers=["Variable", "t", "p-value", "df"], tablefmt=TABLE_FORMAT, disable_numparse=True) + "\n"
    return text


def stats_frame(named: Sequence[Tuple[str, DescriptiveStats]], tests: Sequence[Tuple[str, WelchResult]] = ()) -> pd.DataFrame:
    """Statistics rows followed by one row per Welch test (statistic columns t, p_value, df)."""
    rows = _stats_rows(named)
    for name, w in tests:
        rows.append({"sample": f"welch {name}", "t": w.t, "p_value": w.p_value, "df": w.df})
    return pd.DataFrame(rows, columns=["sample", *_STATS_FIELDS, "t", "p_value", "df"])
