"""GARCH with conditional skewness (GARCH-S).

Model, for daily returns r_t::

    r_t   = mu + eps_t,            eps_t = sqrt(h_t) * eta_t
    h_t   = alpha0 + alpha1 * eps_{t-1}**2 + alpha2 * h_{t-1}
    s_t   = beta0 + beta1 * g(eta_{t-1}) + beta2 * s_{t-1}

with g(eta) = eta**3 (``cubed``, default) or eta**2 (``squared``). The
innovation density is a Gram-Charlier expansion truncated after the skewness
term and squared so it is non-negative for every s::

    f(eta; s) = phi(eta) * psi(eta, s)**2 / (1 + s**2 / 6)
    psi(eta, s) = 1 + s / 6 * (eta**3 - 3 * eta)

Both recursions are linear in their own state, so they are filtered with
``scipy.signal.lfilter``. Fitting runs Nelder-Mead in an unconstrained
parameterisation and polishes with BFGS on central-difference gradients.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import IO, Callable, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd
from numpy.polynomial import hermite_e
from scipy import optimize, signal, special, stats
from statsmodels.tools.numdiff import approx_fprime, approx_hess3

from .errors import ConvergenceError, DataValidationError
from .ingest import ReturnSeries, Source, ValueSeries, _as_dates, _parse_dates, _parse_floats, _read_rows

logger = logging.getLogger(__name__)

PARAM_NAMES = ("mu", "alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2")
N_PARAMS = len(PARAM_NAMES)
MIN_FIT_LENGTH = 100
BURN_IN = 500
BETA2_CAP = 0.999
# Objective value returned where the likelihood is undefined
PENALTY = 1e10
# Largest max|gradient| per unit of |objective| still counted as a stationary point
GRADIENT_TOLERANCE = 1e-6

# Benchmark criteria the fit report compares against
REFERENCE_AIC = -4.556
REFERENCE_SIC = -4.514


class ShockForm(str, Enum):
    """Shock term of the skewness recursion."""

    CUBED = "cubed"
    SQUARED = "squared"


@dataclass(frozen=True)
class GarchSParams:
    """GARCH-S parameters (returns are fractions, so alpha0 is in return**2 units)."""

    mu: float = 0.0
    alpha0: float = 1e-5
    alpha1: float = 0.05
    alpha2: float = 0.9
    beta0: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float, np.floating)) or not math.isfinite(value):
                raise ValueError(f"{f.name} must be a finite number; got {value!r}")
        if self.alpha0 <= 0:
            raise ValueError(f"alpha0 must be > 0; got {self.alpha0}")
        if self.alpha1 < 0:
            raise ValueError(f"alpha1 must be >= 0; got {self.alpha1}")
        if self.alpha2 < 0:
            raise ValueError(f"alpha2 must be >= 0; got {self.alpha2}")
        if self.alpha1 + self.alpha2 >= 1:
            raise ValueError(f"alpha1+alpha2 must be < 1 for covariance stationarity; got {self.alpha1 + self.alpha2:.6g}")
        if abs(self.beta2) >= 1:
            raise ValueError(f"|beta2| must be < 1 for a stable skewness recursion; got {self.beta2}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values) -> "GarchSParams":
        return cls(**{name: float(v) for name, v in zip(PARAM_NAMES, values)})

    @property
    def unconditional_variance(self) -> float:
        return self.alpha0 / (1.0 - self.alpha1 - self.alpha2)

    @property
    def unconditional_skewness(self) -> float:
        """beta0 / (1 - beta2), the starting value of the skewness recursion."""
        return self.beta0 / (1.0 - self.beta2)


@dataclass
class FilteredPaths:
    """Conditional variance, skewness and standardized residual per trading day."""

    dates: np.ndarray
    h: np.ndarray
    s: np.ndarray
    eta: np.ndarray

    def __post_init__(self) -> None:
        self.dates = _as_dates(self.dates)
        self.h = np.asarray(self.h, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        if not (len(self.dates) == len(self.h) == len(self.s) == len(self.eta)):
            raise ValueError("dates, h, s and eta must have equal length")
        if not np.all(self.h > 0):
            raise ValueError("conditional variances must be positive")

    def __len__(self) -> int:
        return len(self.dates)

    def skew_series(self) -> ValueSeries:
        return ValueSeries(dates=self.dates, values=self.s)


# ---------------------------------------------------------------------------
# Density
# ---------------------------------------------------------------------------


def _gc_logpdf(eta, s):
    psi = 1.0 + s / 6.0 * (eta * eta * eta - 3.0 * eta)
    with np.errstate(divide="ignore"):
        return stats.norm.logpdf(eta) + np.log(psi * psi) - np.log1p(s * s / 6.0)


def gc_log_density(eta, s):
    """Log of the squared Gram-Charlier density f(eta; s).

    Accepts scalars or broadcastable arrays. Where psi(eta, s) = 0 the
    result is -inf.

    Raises:
        ValueError: non-finite input.
    """
    if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(s))):
        raise ValueError("eta and s must be finite")
    out = _gc_logpdf(np.asarray(eta, dtype=float), np.asarray(s, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


# He5 + 9 He3 + 18 He1, the antiderivative factor of phi * He3**2
_HE3_SQUARED_TAIL = (0.0, 18.0, 0.0, 9.0, 0.0, 1.0)
_HE2 = (0.0, 0.0, 1.0)


def gc_cdf(eta, s):
    """Closed-form CDF of f(eta; s), from integrals of phi times Hermite polynomials."""
    eta = np.asarray(eta, dtype=float)
    pdf = stats.norm.pdf(eta)
    cdf = stats.norm.cdf(eta)
    cross = -(s / 3.0) * pdf * hermite_e.hermeval(eta, _HE2)
    square = (s * s / 36.0) * (6.0 * cdf - pdf * hermite_e.hermeval(eta, _HE3_SQUARED_TAIL))
    return (cdf + cross + square) / (1.0 + s * s / 6.0)


# ---------------------------------------------------------------------------
# Filter and likelihood
# ---------------------------------------------------------------------------


def _shock(eta: np.ndarray, shock_form: ShockForm) -> np.ndarray:
    if shock_form is ShockForm.CUBED:
        return eta * eta * eta
    return eta * eta


def _filter(r: np.ndarray, theta: np.ndarray, shock_form: ShockForm):
    """Run both recursions for a raw parameter vector without validation."""
    mu, alpha0, alpha1, alpha2, beta0, beta1, beta2 = theta
    eps = r - mu
    h = np.empty_like(eps)
    h[0] = np.var(eps, ddof=1)
    h[1:], _ = signal.lfilter([1.0], [1.0, -alpha2], alpha0 + alpha1 * eps[:-1] ** 2, zi=[alpha2 * h[0]])
    with np.errstate(invalid="ignore", divide="ignore"):
        eta = eps / np.sqrt(h)
    s = np.empty_like(eps)
    s[0] = beta0 / (1.0 - beta2)
    s[1:], _ = signal.lfilter([1.0], [1.0, -beta2], beta0 + beta1 * _shock(eta[:-1], shock_form), zi=[beta2 * s[0]])
    return h, s, eta


def _neg_loglik(r: np.ndarray, theta: np.ndarray, shock_form: ShockForm) -> float:
    h, s, eta = _filter(r, theta, shock_form)
    if not np.all(h > 0):
        return math.inf
    with np.errstate(invalid="ignore", over="ignore"):
        value = -(np.sum(_gc_logpdf(eta, s)) - 0.5 * np.sum(np.log(h)))
    return float(value) if np.isfinite(value) else math.inf


def _check_returns(returns: ReturnSeries) -> np.ndarray:
    r = returns.values
    if np.var(r) == 0.0:
        raise DataValidationError("degenerate returns: zero variance")
    return r


def filter_paths(
    returns: ReturnSeries, params: GarchSParams, shock_form: Union[ShockForm, str] = ShockForm.CUBED
) -> FilteredPaths:
    """Filter (h_t, s_t, eta_t) for given parameters.

    h_1 is the sample variance of the demeaned returns and s_1 is
    beta0 / (1 - beta2).

    Raises:
        DataValidationError: zero-variance returns.
    """
    shock_form = ShockForm(shock_form)
    r = _check_returns(returns)
    h, s, eta = _filter(r, params.as_array(), shock_form)
    return FilteredPaths(dates=returns.dates, h=h, s=s, eta=eta)


def neg_log_likelihood(
    returns: ReturnSeries, params: GarchSParams, shock_form: Union[ShockForm, str] = ShockForm.CUBED
) -> float:
    """Negative Gram-Charlier log-likelihood summed over every trading day."""
    shock_form = ShockForm(shock_form)
    return _neg_loglik(_check_returns(returns), params.as_array(), shock_form)


def likelihood_gradient(
    returns: ReturnSeries,
    params: GarchSParams,
    shock_form: Union[ShockForm, str] = ShockForm.CUBED,
    rel_step: float = 1e-5,
) -> np.ndarray:
    """Central-difference gradient of the negative log-likelihood in natural parameters.

    The step for coordinate i is ``rel_step * max(|theta_i|, 1e-3)``.
    """
    shock_form = ShockForm(shock_form)
    r = _check_returns(returns)
    theta = params.as_array()
    steps = rel_step * np.maximum(np.abs(theta), 1e-3)
    # centered approx_fprime evaluates at theta +- epsilon/2
    return approx_fprime(theta, lambda t: _neg_loglik(r, t, shock_form), epsilon=2.0 * steps, centered=True)


def information_criteria(loglik: float, k: int, n: int):
    """Per-observation AIC = (-2 lnL + 2k)/N and SIC = (-2 lnL + k ln N)/N."""
    return (-2.0 * loglik + 2.0 * k) / n, (-2.0 * loglik + k * math.log(n)) / n


# ---------------------------------------------------------------------------
# Unconstrained parameterisation
# ---------------------------------------------------------------------------


def to_natural(x: np.ndarray) -> np.ndarray:
    """Map (mu, ln alpha0, logit p, logit w, beta0, beta1, atanh-scaled beta2) to natural parameters."""
    mu, x0, xp, xw, beta0, beta1, xb = x
    p = special.expit(xp)
    w = special.expit(xw)
    return np.array([mu, math.exp(x0), p * w, p * (1.0 - w), beta0, beta1, BETA2_CAP * math.tanh(xb)])


def to_unconstrained(theta: np.ndarray) -> np.ndarray:
    mu, alpha0, alpha1, alpha2, beta0, beta1, beta2 = theta
    p = float(np.clip(alpha1 + alpha2, 1e-8, 1 - 1e-8))
    w = float(np.clip(alpha1 / p if p > 0 else 0.5, 1e-8, 1 - 1e-8))
    b = float(np.clip(beta2 / BETA2_CAP, -1 + 1e-12, 1 - 1e-12))
    return np.array([mu, math.log(alpha0), special.logit(p), special.logit(w), beta0, beta1, math.atanh(b)])


def _objective(r: np.ndarray, shock_form: ShockForm) -> Callable[[np.ndarray], float]:
    def f(x: np.ndarray) -> float:
        try:
            value = _neg_loglik(r, to_natural(x), shock_form)
        except (OverflowError, ValueError):
            return PENALTY
        return value if value < PENALTY else PENALTY

    return f


class _Minimum(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    trace: List[float]


def _minimize(objective: Callable[[np.ndarray], float], x0: np.ndarray, tolerance: float, max_iterations: int) -> _Minimum:
    """Nelder-Mead from ``x0`` then a BFGS polish; never returns a point worse than ``x0``."""
    f0 = objective(x0)
    trace: List[float] = []

    def record(xk: np.ndarray) -> None:
        trace.append(objective(xk))

    simplex = optimize.minimize(
        objective,
        x0,
        method="Nelder-Mead",
        callback=record,
        options={
            "maxiter": max_iterations,
            "xatol": 1e-5,
            "fatol": tolerance * max(1.0, abs(f0)),
            "adaptive": True,
        },
    )
    accepted = [float(simplex.fun)]
    polish = optimize.minimize(
        objective,
        simplex.x,
        method="BFGS",
        jac=lambda x: approx_fprime(x, objective, centered=True),
        callback=lambda xk: accepted.append(objective(xk)),
        options={"maxiter": max_iterations, "gtol": 1e-6},
    )
    best_x, best_f = x0, f0
    for candidate in (simplex, polish):
        if np.isfinite(candidate.fun) and candidate.fun <= best_f:
            best_x, best_f = candidate.x, float(candidate.fun)
    # status 1 is an exhausted iteration budget
    stopped_early = polish.status != 1 and settled(accepted, polish.jac, tolerance)
    converged = bool(simplex.success or polish.success or stopped_early) and best_f < PENALTY
    return _Minimum(np.asarray(best_x), best_f, int(simplex.nit + polish.nit), converged, trace)


def settled(accepted: Sequence[float], gradient: np.ndarray, tolerance: float) -> bool:
    """Whether a search that stopped on its own has reached a stationary point.

    True when the last accepted step changed the objective by less than
    ``tolerance`` relative to its size, or when max |gradient| is below
    ``GRADIENT_TOLERANCE`` per unit of objective.
    """
    scale = max(1.0, abs(accepted[-1]))
    if len(accepted) >= 2 and abs(accepted[-1] - accepted[-2]) < tolerance * scale:
        return True
    gradient = np.asarray(gradient, dtype=float)
    return bool(gradient.size and np.all(np.isfinite(gradient)) and np.max(np.abs(gradient)) <= GRADIENT_TOLERANCE * scale)


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------


class Garch11Fit(NamedTuple):
    mu: float
    alpha0: float
    alpha1: float
    alpha2: float
    loglik: float


def _fit_garch11(r: np.ndarray, tolerance: float, max_iterations: int):
    variance = float(np.var(r, ddof=1))
    start = np.array([float(np.mean(r)), variance * 0.05, 0.05, 0.90, 0.0, 0.0, 0.0])
    full = _objective(r, ShockForm.CUBED)

    def gaussian(x4: np.ndarray) -> float:
        return full(np.concatenate([x4, [0.0, 0.0, 0.0]]))

    found = _minimize(gaussian, to_unconstrained(start)[:4], tolerance, max_iterations)
    theta = to_natural(np.concatenate([found.x, [0.0, 0.0, 0.0]]))
    fit = Garch11Fit(*(float(v) for v in theta[:4]), loglik=-found.fun)
    return fit, found


def fit_garch11(returns: ReturnSeries, tolerance: float = 1e-9, max_iterations: int = 2000) -> Garch11Fit:
    """Gaussian GARCH(1,1) maximum likelihood, the starting point for GARCH-S.

    Raises:
        DataValidationError: fewer than 100 returns or zero variance.
        ConvergenceError: the optimizer did not converge.
    """
    r = _require_fit_length(returns)
    fit, found = _fit_garch11(r, tolerance, max_iterations)
    if not found.converged:
        raise ConvergenceError("GARCH(1,1) fit did not converge", iterations=found.iterations)
    logger.info("GARCH(1,1): alpha1=%.4f alpha2=%.4f loglik=%.3f", fit.alpha1, fit.alpha2, fit.loglik)
    return fit


def _require_fit_length(returns: ReturnSeries) -> np.ndarray:
    if len(returns) < MIN_FIT_LENGTH:
        raise DataValidationError(f"need at least {MIN_FIT_LENGTH} returns to fit; got {len(returns)}")
    return _check_returns(returns)


@dataclass
class FitOptions:
    shock_form: ShockForm = ShockForm.CUBED
    multistart: int = 3
    tolerance: float = 1e-9
    max_iterations: int = 2000
    seed: int = 0

    def __post_init__(self) -> None:
        self.shock_form = ShockForm(self.shock_form)
        if self.multistart < 1:
            raise ValueError("multistart must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class StartResult:
    index: int
    start_loglik: float
    loglik: float
    converged: bool
    iterations: int


@dataclass
class GarchSFit:
    """Result of a GARCH-S fit.

    ``stderr`` and ``tstat`` are NaN where the Hessian was unusable.
    ``trace`` holds the best objective after each simplex iteration of the
    winning start.
    """

    params: GarchSParams
    loglik: float
    aic: float
    sic: float
    stderr: Dict[str, float]
    tstat: Dict[str, float]
    paths: FilteredPaths
    converged: bool
    iterations: int
    shock_form: ShockForm
    seed: int
    n_obs: int
    starts: List[StartResult] = field(default_factory=list)
    trace: List[float] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def hessian_ok(self) -> bool:
        return all(math.isfinite(v) for v in self.stderr.values())


def _standard_errors(objective: Callable[[np.ndarray], float], x_hat: np.ndarray) -> np.ndarray:
    """Delta-method standard errors of the natural parameters from the observed information."""
    steps = 1e-4 * (1.0 + np.abs(x_hat))
    hessian = approx_hess3(x_hat, objective, epsilon=steps)
    if not np.all(np.isfinite(hessian)):
        raise np.linalg.LinAlgError("Hessian has non-finite entries")
    hessian = 0.5 * (hessian + hessian.T)
    np.linalg.cholesky(hessian)
    cov_x = np.linalg.inv(hessian)
    jac = approx_fprime(x_hat, to_natural, centered=True)
    cov = jac @ cov_x @ jac.T
    variances = np.diag(cov)
    with np.errstate(invalid="ignore"):
        return np.where(variances > 0, np.sqrt(variances), np.nan)


def fit_garchs(returns: ReturnSeries, options: Optional[FitOptions] = None) -> GarchSFit:
    """Maximum-likelihood GARCH-S fit with multiple starts.

    Start 0 is the GARCH(1,1) fit with (beta0, beta1, beta2) =
    (0.9 * sample skewness, 0.01, 0.1); further starts perturb it by up to
    +-20% per coordinate in the unconstrained space using ``options.seed``.
    The best converged start wins, ties going to the lower start index.

    Raises:
        DataValidationError: fewer than 100 returns or zero variance.
        ConvergenceError: no start converged.
    """
    options = options or FitOptions()
    r = _require_fit_length(returns)
    shock_form = options.shock_form

    seed_fit, seed_min = _fit_garch11(r, options.tolerance, options.max_iterations)
    if not seed_min.converged:
        logger.warning("GARCH(1,1) seed fit did not converge; using its best point as the seed")
    skew = float(stats.skew(r))
    seed_theta = np.array(
        [seed_fit.mu, seed_fit.alpha0, seed_fit.alpha1, seed_fit.alpha2, skew * (1.0 - 0.1), 0.01, 0.1]
    )
    x_seed = to_unconstrained(seed_theta)
    rng = np.random.default_rng(options.seed)
    starts = [x_seed] + [x_seed * (1.0 + rng.uniform(-0.2, 0.2, size=N_PARAMS)) for _ in range(options.multistart - 1)]

    objective = _objective(r, shock_form)
    results: List[StartResult] = []
    minima: List[_Minimum] = []
    for index, x0 in enumerate(starts):
        found = _minimize(objective, x0, options.tolerance, options.max_iterations)
        results.append(
            StartResult(
                index=index,
                start_loglik=-objective(x0),
                loglik=-found.fun,
                converged=found.converged,
                iterations=found.iterations,
            )
        )
        minima.append(found)
        logger.info("start %d: loglik=%.4f converged=%s iterations=%d", index, -found.fun, found.converged, found.iterations)

    converged = [i for i, res in enumerate(results) if res.converged]
    total_iterations = sum(res.iterations for res in results)
    if not converged:
        raise ConvergenceError(f"none of {len(starts)} GARCH-S starts converged", iterations=total_iterations)
    best = min(converged, key=lambda i: (-results[i].loglik, i))
    x_hat = minima[best].x
    params = GarchSParams.from_array(to_natural(x_hat))
    loglik = -minima[best].fun

    notes: List[str] = []
    try:
        stderr = _standard_errors(objective, x_hat)
    except np.linalg.LinAlgError as exc:
        logger.warning("standard errors unavailable: %s", exc)
        notes.append("Hessian not positive definite; standard errors unavailable")
        stderr = np.full(N_PARAMS, np.nan)

    values = params.as_array()
    with np.errstate(invalid="ignore", divide="ignore"):
        tstat = np.where(stderr > 0, values / stderr, np.nan)

    n = len(r)
    aic, sic = information_criteria(loglik, N_PARAMS, n)
    notes.append(
        f"AIC/SIC are per-observation, (-2 lnL + 2k)/N and (-2 lnL + k ln N)/N with k={N_PARAMS}, N={n}; "
        f"benchmark values {REFERENCE_AIC}/{REFERENCE_SIC} are not reproduced by this convention from their own lnL, k and N"
    )

    return GarchSFit(
        params=params,
        loglik=loglik,
        aic=aic,
        sic=sic,
        stderr=dict(zip(PARAM_NAMES, map(float, stderr))),
        tstat=dict(zip(PARAM_NAMES, map(float, tstat))),
        paths=filter_paths(returns, params, shock_form),
        converged=True,
        iterations=total_iterations,
        shock_form=shock_form,
        seed=options.seed,
        n_obs=n,
        starts=results,
        trace=minima[best].trace,
        notes=notes,
    )


def fit_summary(fit: GarchSFit) -> Dict[str, object]:
    """Flat name -> value mapping of a fit, for the key-value export."""
    summary: Dict[str, object] = {
        "shock_form": fit.shock_form.value,
        "seed": fit.seed,
        "n_obs": fit.n_obs,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "loglik": fit.loglik,
        "aic": fit.aic,
        "sic": fit.sic,
    }
    for name in PARAM_NAMES:
        summary[name] = float(getattr(fit.params, name))
        summary[f"{name}_stderr"] = fit.stderr[name]
        summary[f"{name}_tstat"] = fit.tstat[name]
    return summary


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class _InverseCdf:
    """Tabulated inverse of gc_cdf, rebuilt when s drifts more than ``rebuild`` from the last table."""

    def __init__(self, points: int = 4096, bound: float = 12.0, rebuild: float = 1e-3):
        self.grid = np.linspace(-bound, bound, points)
        self.rebuild = rebuild
        self.s: Optional[float] = None
        self.cdf = self.grid

    def __call__(self, u: float, s: float) -> float:
        if self.s is None or abs(s - self.s) > self.rebuild:
            table = np.clip(gc_cdf(self.grid, s), 0.0, 1.0)
            self.cdf = np.maximum.accumulate(table)
            self.s = s
        return float(np.interp(u, self.cdf, self.grid))


def simulate_garchs(
    params: GarchSParams,
    n: int,
    seed: int,
    shock_form: Union[ShockForm, str] = ShockForm.CUBED,
    start: str = "2017-01-02",
    burn_in: int = BURN_IN,
) -> ReturnSeries:
    """Simulate ``n`` GARCH-S returns on consecutive weekdays from ``start``.

    Innovations are drawn from f(eta; s_t) by inverse transform; the first
    ``burn_in`` steps are discarded. The variance starts at its unconditional
    level and the skewness at beta0 / (1 - beta2).
    """
    shock_form = ShockForm(shock_form)
    if n < 2:
        raise ValueError(f"n must be >= 2; got {n}")
    rng = np.random.default_rng(seed)
    uniforms = rng.random(n + burn_in)
    inverse = _InverseCdf()

    mu, alpha0, alpha1, alpha2, beta0, beta1, beta2 = params.as_array()
    h = params.unconditional_variance
    s = params.unconditional_skewness
    out = np.empty(n + burn_in)
    for t, u in enumerate(uniforms):
        eta = inverse(u, s)
        eps = math.sqrt(h) * eta
        out[t] = mu + eps
        h = alpha0 + alpha1 * eps * eps + alpha2 * h
        shock = eta * eta * eta if shock_form is ShockForm.CUBED else eta * eta
        s = beta0 + beta1 * shock + beta2 * s

    dates = pd.bdate_range(start=start, periods=n).to_numpy().astype("datetime64[D]")
    return ReturnSeries(dates=dates, values=out[burn_in:])


# ---------------------------------------------------------------------------
# Path files
# ---------------------------------------------------------------------------

PATHS_HEADER = ("date", "h", "s", "eta")


def write_paths_csv(paths: FilteredPaths, target: Union[str, Path, IO[str]], float_format: str = "%.17g") -> None:
    """Write ``date,h,s,eta`` rows, by default with round-trip float precision."""
    frame = pd.DataFrame(
        {
            "date": np.datetime_as_string(paths.dates, unit="D"),
            "h": paths.h,
            "s": paths.s,
            "eta": paths.eta,
        }
    )
    frame.to_csv(target, index=False, float_format=float_format, lineterminator="\n")


def load_paths_csv(source: Source) -> FilteredPaths:
    """Load a ``date,h,s,eta`` file written by ``write_paths_csv`` (or by hand)."""
    frame = _read_rows(source, PATHS_HEADER)
    dates = _parse_dates(frame["date"])
    columns = {name: _parse_floats(frame[name], name) for name in ("h", "s", "eta")}
    order = np.argsort(dates, kind="stable")
    if np.any(np.diff(dates[order]) == np.timedelta64(0, "D")):
        raise DataValidationError("duplicate date in paths file")
    try:
        return FilteredPaths(dates=dates[order], **{k: v[order] for k, v in columns.items()})
    except ValueError as exc:
        raise DataValidationError(str(exc)) from exc
