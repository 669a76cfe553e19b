"""Command-line surface.

Usage:
  python -m crashskew fixtures --out fixtures
  python -m crashskew estimate --returns fixtures/returns.csv --out out
  python -m crashskew regress --config studies/covid_crash/run.yaml --models eq2,eq5
  python -m crashskew granger --config studies/covid_crash/run.yaml --pmax 5
  python -m crashskew stats --returns fixtures/returns.csv --split-date 2020-01-20
  python -m crashskew simulate --n 2000 --seed 7 --output sim.csv

Exit codes: 0 success, 1 optimizer failure, 2 invalid input or I/O failure.
Every input is loaded and validated before the first output file is written.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml

from . import report
from .config import RunConfig
from .errors import ConvergenceError, DataValidationError
from .garchs import (
    FilteredPaths,
    FitOptions,
    GarchSFit,
    GarchSParams,
    ShockForm,
    fit_garchs,
    fit_summary,
    load_paths_csv,
    simulate_garchs,
    write_paths_csv,
)
from .granger import GrangerResult, granger_both
from .ingest import (
    ONE_DAY,
    AlignedPanel,
    CountSeries,
    ReturnSeries,
    ValueSeries,
    ZeroPolicy,
    align_panel,
    descriptive_stats,
    extend_counts,
    load_count_csv,
    load_return_csv,
    log_growth,
    split_mask,
    subsample_stats,
    welch_t_test,
)
from .regress import RegressionResult, model_variables, study_models, run_model
from .sentiment import SentimentSeries, build_sentiment, default_reference_window, load_volume_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONVERGENCE = 1
EXIT_INVALID = 2

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

GROWTH_INPUTS = {
    "rCases": "cases",
    "rDeaths": "deaths",
    "rGlobalCases": "global_cases",
    "rGlobalDeaths": "global_deaths",
}
SENTIMENT_COLUMNS = ("fearSent", "D_fear")

# Benchmark parameters for simulation; alpha2 is set so alpha1+alpha2 = 0.99
BENCHMARK = GarchSParams(mu=0.0, alpha0=1e-5, alpha1=0.117, alpha2=0.873, beta0=1e-5, beta1=0.036, beta2=0.148)
FIXTURE_LENGTH = 789
FIXTURE_START = "2018-10-01"
EPIDEMIC_START = "2020-01-20"
GLOBAL_START = "2020-01-05"
SEARCH_START = "2020-01-01"


# ---------------------------------------------------------------------------
# Shared loading
# ---------------------------------------------------------------------------


def _fit_options(config: RunConfig) -> FitOptions:
    return FitOptions(
        shock_form=ShockForm(config.shock_form),
        multistart=config.multistart,
        tolerance=config.tolerance,
        max_iterations=config.max_iterations,
        seed=config.seed,
    )


def _require_skew_source(config: RunConfig) -> None:
    if config.skew is None and config.returns is None:
        raise ValueError("need a skew paths file (--skew) or returns to estimate one (--returns)")


def load_skew(config: RunConfig) -> FilteredPaths:
    """Filtered paths from ``config.skew`` if given, else from a fresh GARCH-S fit of ``config.returns``."""
    if config.skew is not None:
        return load_paths_csv(config.skew)
    logger.info("no skew file given; estimating GARCH-S from %s", config.returns)
    return fit_garchs(load_return_csv(config.returns), _fit_options(config)).paths


def load_growth(path: str, trading: np.ndarray, zero_policy: str) -> ValueSeries:
    """Log growth of a count file, zero-filled back to the day before the first trading day."""
    counts = extend_counts(load_count_csv(path), trading[0] - ONE_DAY)
    return log_growth(counts, ZeroPolicy(zero_policy))


def load_sentiment(config: RunConfig, trading: np.ndarray) -> SentimentSeries:
    volumes = load_volume_csv(config.search)
    window = config.fear_window or default_reference_window(volumes)
    return build_sentiment(volumes, reference_window=window, span=(trading[0], trading[-1]))


def build_panel(config: RunConfig, paths: FilteredPaths, variables: Sequence[str]) -> AlignedPanel:
    """Trading-day panel holding ``skew`` and whichever regressors ``variables`` name."""
    trading = paths.dates
    named: List[Tuple[str, ValueSeries]] = [("skew", paths.skew_series())]
    for variable in variables:
        key = GROWTH_INPUTS.get(variable)
        if key is not None:
            path = getattr(config, key)
            if path is None:
                raise ValueError(f"{variable} needs the {key} input")
            named.append((variable, load_growth(path, trading, config.zero_policy)))
        elif variable in SENTIMENT_COLUMNS and variable not in dict(named):
            if config.search is None:
                raise ValueError(f"{variable} needs the search input")
            sentiment = load_sentiment(config, trading)
            named.append(("fearSent", sentiment.fear_series()))
            named.append(("D_fear", sentiment.dummy_series()))
        elif variable != "skew" and variable not in SENTIMENT_COLUMNS:
            raise DataValidationError(f"no input provides variable {variable!r}")
    return align_panel(trading, named)


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _announce(paths: Sequence[Path]) -> None:
    for path in paths:
        print(f"wrote {path}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_estimate(config: RunConfig) -> GarchSFit:
    """Fit GARCH-S and write garchs_fit.yaml, garchs_fit.md and skew_series.csv."""
    config.validate(required=("returns",))
    fit = fit_garchs(load_return_csv(config.returns), _fit_options(config))

    out = _out_dir(config)
    summary = fit_summary(fit)
    summary["notes"] = list(fit.notes)
    written = [out / "garchs_fit.yaml", out / "garchs_fit.md", out / "skew_series.csv"]
    report.write_text(yaml.safe_dump(summary, sort_keys=False), written[0])
    report.write_text(report.fit_table(fit), written[1])
    write_paths_csv(fit.paths, written[2])
    _announce(written)
    return fit


def select_models(labels: Sequence[str]):
    """Resolve requested labels ("all" selects the whole catalogue) against study_models()."""
    catalogue = study_models()
    if not labels or "all" in labels:
        return list(catalogue.values())
    unknown = [label for label in labels if label not in catalogue]
    if unknown:
        raise DataValidationError(
            f"unknown model label(s): {', '.join(unknown)}; available: {', '.join(catalogue)}"
        )
    return [catalogue[label] for label in labels]


def cmd_regress(config: RunConfig) -> List[RegressionResult]:
    """Run the selected catalogue models; one markdown and one CSV table per model."""
    config.validate()
    _require_skew_source(config)
    specs = select_models(config.models)
    paths = load_skew(config)
    panel = build_panel(config, paths, model_variables(specs))
    cov_type = "HC1" if config.robust else "nonrobust"
    results = [run_model(panel, spec, cov_type=cov_type) for spec in specs]

    out = _out_dir(config)
    written: List[Path] = []
    for spec, result in zip(specs, results):
        markdown = out / f"regress_{spec.label}.md"
        table = out / f"regress_{spec.label}.csv"
        title = f"{spec.label}: {spec.description}" if spec.description else spec.label
        report.write_text(report.regression_table([result], seed=config.seed, title=title), markdown)
        frame = report.regression_frame(result)
        frame["seed"] = config.seed
        report.write_csv(frame, table)
        written += [markdown, table]
    _announce(written)
    return results


def cmd_granger(config: RunConfig) -> List[GrangerResult]:
    """Test sentiment -> skew and skew -> sentiment at one BIC-chosen lag."""
    config.validate(required=("search",))
    _require_skew_source(config)
    paths = load_skew(config)
    sentiment = load_sentiment(config, paths.dates)
    series = sentiment.fear_series() if config.variable == "fearSent" else sentiment.dummy_series()
    panel = align_panel(paths.dates, [("skew", paths.skew_series()), (config.variable, series)])
    keep = panel.usable(["skew", config.variable])
    if not keep.any():
        raise DataValidationError("skew and sentiment share no trading day")
    results = granger_both("skew", panel.column("skew")[keep], config.variable, panel.column(config.variable)[keep], config.p_max)

    out = _out_dir(config)
    written = [out / "granger.md", out / "granger.csv"]
    report.write_text(report.granger_table(results, seed=config.seed), written[0])
    frame = report.granger_frame(results)
    frame["seed"] = config.seed
    report.write_csv(frame, written[1])
    _announce(written)
    return results


def write_dated_csv(path: Path, column: str, dates: np.ndarray, values: np.ndarray, float_format: Optional[str] = "%.17g") -> None:
    frame = pd.DataFrame({"date": np.datetime_as_string(dates, unit="D"), column: values})
    frame.to_csv(path, index=False, float_format=float_format, lineterminator="\n")


def cmd_simulate(
    params: GarchSParams,
    n: int,
    seed: int,
    output: Path,
    shock_form: ShockForm = ShockForm.CUBED,
    start: str = FIXTURE_START,
) -> ReturnSeries:
    """Write a ``date,return`` CSV of simulated GARCH-S returns on weekdays."""
    returns = simulate_garchs(params, n, seed, shock_form, start=start)
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    write_dated_csv(output, "return", returns.dates, returns.values)
    _announce([output])
    return returns


def cmd_stats(config: RunConfig) -> str:
    """Descriptive statistics of returns, optionally split, with Welch tests across the split."""
    config.validate(required=("returns",))
    returns = load_return_csv(config.returns)
    tests = []
    if config.split_date is None:
        named = report.named_stats(descriptive_stats(returns.values))
    else:
        named = report.named_stats(subsample_stats(returns, config.split_date), config.split_date)
        before = split_mask(returns.dates, config.split_date)
        tests.append(("return", welch_t_test(returns.values[before], returns.values[~before])))
        if config.skew is not None:
            paths = load_paths_csv(config.skew)
            early = split_mask(paths.dates, config.split_date)
            tests.append(("skew", welch_t_test(paths.s[early], paths.s[~early])))

    text = report.stats_table(named, tests, seed=config.seed)
    out = _out_dir(config)
    written = [out / "stats.md", out / "stats.csv"]
    report.write_text(text, written[0])
    frame = report.stats_frame(named, tests)
    frame["seed"] = config.seed
    report.write_csv(frame, written[1])
    _announce(written)
    return text


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


FIXTURE_WAVES = {
    "cases": (20.0, [(25, 12, 3000.0), (330, 45, 800.0)]),
    "global_cases": (500.0, [(90, 30, 80000.0), (300, 60, 500000.0), (450, 50, 700000.0)]),
    "search": (100.0, [(25, 15, 5000.0), (340, 45, 1500.0)]),
}
FIXTURE_DEATH_RATES = {"cases": 0.03, "global_cases": 0.02}
# Fixture CSV precision; the checked-in files under fixtures/ use it too
FIXTURE_FLOAT_FORMAT = "%.10g"


def _waves(n: int, base: float, waves: Sequence[Tuple[float, float, float]]) -> np.ndarray:
    """Daily intensity: ``base`` plus bell-shaped waves peak / (1 + ((t - centre) / width)**2)."""
    t = np.arange(n, dtype=float)
    intensity = np.full(n, base)
    for centre, width, peak in waves:
        d = (t - centre) / width
        intensity = intensity + peak / (1.0 + d * d)
    return intensity


def _noisy_counts(intensity: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """intensity + sqrt(intensity) * z rounded half up, floored at zero."""
    return np.maximum(np.floor(intensity + np.sqrt(intensity) * normals + 0.5), 0.0).astype(np.int64)


def _calendar(start: str, end: np.datetime64) -> np.ndarray:
    return np.arange(np.datetime64(start, "D"), end + ONE_DAY, ONE_DAY)


def cmd_fixtures(out: Path, seed: int = 0) -> Dict[str, Path]:
    """Write seed-pinned synthetic inputs for every command.

    Files: returns.csv, cases.csv, deaths.csv, global_cases.csv,
    global_deaths.csv, search.csv and skew_planted.csv, a paths file whose
    skew follows s_t = 0.2 s_{t-1} - 0.08 rCases_{t-1} + N(0, 0.01^2).

    Every draw comes from ``np.random.RandomState(seed)`` (uniforms and
    standard normals only), in file order; returns follow a Gaussian
    GARCH(1,1) at the benchmark alpha0, alpha1, alpha2.
    """
    rs = np.random.RandomState(seed)
    trading = pd.bdate_range(start=FIXTURE_START, periods=FIXTURE_LENGTH).to_numpy().astype("datetime64[D]")
    end = trading[-1]

    z = rs.standard_normal(FIXTURE_LENGTH)
    h = np.empty(FIXTURE_LENGTH)
    r = np.empty(FIXTURE_LENGTH)
    variance = BENCHMARK.unconditional_variance
    for t in range(FIXTURE_LENGTH):
        h[t] = variance
        eps = math.sqrt(variance) * z[t]
        r[t] = BENCHMARK.mu + eps
        variance = BENCHMARK.alpha0 + BENCHMARK.alpha1 * eps * eps + BENCHMARK.alpha2 * variance
    returns = ReturnSeries(dates=trading, values=r)

    counts: Dict[str, CountSeries] = {}
    for name, start, deaths_name in (("cases", EPIDEMIC_START, "deaths"), ("global_cases", GLOBAL_START, "global_deaths")):
        days = _calendar(start, end)
        base, waves = FIXTURE_WAVES[name]
        counts[name] = CountSeries(days, _noisy_counts(_waves(len(days), base, waves), rs.standard_normal(len(days))))
        dead = np.floor(counts[name].counts * FIXTURE_DEATH_RATES[name] + rs.random_sample(len(days)))
        counts[deaths_name] = CountSeries(days, dead.astype(np.int64))
    search_days = _calendar(SEARCH_START, end)
    base, waves = FIXTURE_WAVES["search"]
    search = _noisy_counts(_waves(len(search_days), base, waves), rs.standard_normal(len(search_days)))

    growth = log_growth(extend_counts(counts["cases"], trading[0] - ONE_DAY))
    r_cases = np.nan_to_num(align_panel(trading, [("rCases", growth)]).column("rCases"))
    noise = 0.01 * rs.standard_normal(FIXTURE_LENGTH)
    planted = np.zeros(FIXTURE_LENGTH)
    for t in range(1, FIXTURE_LENGTH):
        planted[t] = 0.2 * planted[t - 1] - 0.08 * r_cases[t - 1] + noise[t]
    skew = FilteredPaths(dates=trading, h=h, s=planted, eta=z)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = {name: out / f"{name}.csv" for name in ("returns", "cases", "deaths", "global_cases", "global_deaths", "search", "skew_planted")}
    write_dated_csv(files["returns"], "return", returns.dates, returns.values, float_format=FIXTURE_FLOAT_FORMAT)
    for name in ("cases", "deaths", "global_cases", "global_deaths"):
        write_dated_csv(files[name], "count", counts[name].dates, counts[name].counts, float_format=None)
    write_dated_csv(files["search"], "volume", search_days, search, float_format=None)
    write_paths_csv(skew, files["skew_planted"], float_format=FIXTURE_FLOAT_FORMAT)
    _announce(list(files.values()))
    return files


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration (flags override its values)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("--log-file", help="also append log records to this file")
    return common


def _input_parser() -> argparse.ArgumentParser:
    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--returns", help="date,return CSV")
    inputs.add_argument("--cases", help="date,count CSV of domestic cases")
    inputs.add_argument("--deaths", help="date,count CSV of domestic deaths")
    inputs.add_argument("--global-cases", help="date,count CSV of global cases")
    inputs.add_argument("--global-deaths", help="date,count CSV of global deaths")
    inputs.add_argument("--search", help="date,volume CSV of search volume")
    inputs.add_argument("--skew", help="date,h,s,eta paths from an earlier estimate run")
    inputs.add_argument("--zero-policy", choices=[p.value for p in ZeroPolicy])
    inputs.add_argument("--fear-window-start", help="first day of the fear-dummy median window")
    inputs.add_argument("--fear-window-end", help="last day of the fear-dummy median window")
    return inputs


def _fitting_parser() -> argparse.ArgumentParser:
    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--shock-form", choices=[f.value for f in ShockForm])
    fitting.add_argument("--multistart", type=int)
    fitting.add_argument("--tolerance", type=float)
    fitting.add_argument("--max-iterations", type=int)
    return fitting


def build_parser() -> argparse.ArgumentParser:
    common, inputs, fitting = _common_parser(), _input_parser(), _fitting_parser()
    parser = argparse.ArgumentParser(prog="crashskew", description="Conditional skewness and pandemic crash-risk toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    estimate = sub.add_parser("estimate", parents=[common, inputs, fitting], help="fit GARCH-S to returns")
    estimate.set_defaults(handler=_run_estimate)

    regress = sub.add_parser("regress", parents=[common, inputs, fitting], help="run catalogue regressions")
    regress.add_argument("--models", help='comma-separated labels or "all"')
    regress.add_argument("--robust", action="store_true", default=None, help="HC1 standard errors")
    regress.set_defaults(handler=_run_regress)

    granger = sub.add_parser("granger", parents=[common, inputs, fitting], help="Granger tests between skew and sentiment")
    granger.add_argument("--pmax", dest="p_max", type=int, help="largest VAR lag considered (default 10)")
    granger.add_argument("--variable", choices=list(SENTIMENT_COLUMNS))
    granger.set_defaults(handler=_run_granger)

    stats = sub.add_parser("stats", parents=[common, inputs], help="descriptive statistics and Welch tests")
    stats.add_argument("--split-date", help="first day of the second subsample")
    stats.set_defaults(handler=_run_stats)

    simulate = sub.add_parser("simulate", parents=[common], help="simulate GARCH-S returns")
    simulate.add_argument("--n", type=int, default=FIXTURE_LENGTH, help="number of returns")
    simulate.add_argument("--start", default=FIXTURE_START, help="first weekday")
    simulate.add_argument("--shock-form", choices=[f.value for f in ShockForm])
    simulate.add_argument("--output", help="CSV path (default <out>/returns.csv)")
    for name in ("mu", "alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2"):
        simulate.add_argument(f"--{name}", type=float, default=getattr(BENCHMARK, name))
    simulate.set_defaults(handler=_run_simulate)

    fixtures = sub.add_parser("fixtures", parents=[common], help="write synthetic input files")
    fixtures.set_defaults(handler=_run_fixtures)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_yaml(args.config) if args.config else RunConfig()
    overrides = {f.name: getattr(args, f.name, None) for f in fields(RunConfig)}
    return config.merged(overrides)


def _run_estimate(config: RunConfig, args: argparse.Namespace) -> None:
    fit = cmd_estimate(config)
    print(report.fit_table(fit))


def _run_regress(config: RunConfig, args: argparse.Namespace) -> None:
    results = cmd_regress(config)
    print(report.regression_table(results, seed=config.seed))


def _run_granger(config: RunConfig, args: argparse.Namespace) -> None:
    results = cmd_granger(config)
    print(report.granger_table(results, seed=config.seed))


def _run_stats(config: RunConfig, args: argparse.Namespace) -> None:
    print(cmd_stats(config))


def _run_simulate(config: RunConfig, args: argparse.Namespace) -> None:
    params = GarchSParams(**{name: getattr(args, name) for name in ("mu", "alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2")})
    output = Path(args.output) if args.output else Path(config.out) / "returns.csv"
    cmd_simulate(params, args.n, config.seed, output, ShockForm(config.shock_form), start=args.start)


def _run_fixtures(config: RunConfig, args: argparse.Namespace) -> None:
    out = config.out if (args.out or args.config) else "fixtures"
    cmd_fixtures(Path(out), seed=config.seed)


def configure_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="a", encoding="utf-8"))
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format=LOG_FORMAT, handlers=handlers, force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.log_file)
    try:
        config = _config_from_args(args)
        args.handler(config, args)
    except ConvergenceError as exc:
        logger.error("%s", exc)
        return EXIT_CONVERGENCE
    except (DataValidationError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
