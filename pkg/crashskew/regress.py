"""Declarative regression models and OLS estimation.

A model is a dependent column plus an ordered list of terms. Each term is a
(variable, lag) pair, optionally multiplied by a second (variable, lag)
pair. Terms are written compactly as ``variable@lag`` and interactions as
``rCases@1*fearSent@0``.

YAML catalogue structure (crashskew/data/study_models.yaml):
    models:
      - label: eq5
        description: "Skew on lagged case growth, fear sentiment and their interaction"
        dependent: skew
        intercept: true        # optional, default true
        terms:
          - skew@1
          - rCases@1
          - fearSent@0
          - rCases@1*fearSent@0
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import statsmodels.api as sm

from .errors import DataValidationError
from .ingest import AlignedPanel, interaction_label, lag_label

logger = logging.getLogger(__name__)

INTERCEPT = "const"
COV_TYPES = ("nonrobust", "HC1")
# Relative norm below which a design column counts as collinear with earlier ones
RANK_TOLERANCE = 1e-10
CATALOGUE_PATH = Path(__file__).with_name("data") / "study_models.yaml"


@dataclass(frozen=True)
class Term:
    """One regressor: ``variable`` lagged ``lag`` trading days, optionally times another lagged variable."""

    variable: str
    lag: int = 0
    interact_with: Optional[Tuple[str, int]] = None

    def __post_init__(self) -> None:
        if not self.variable:
            raise ValueError("term variable must be non-empty")
        if not isinstance(self.lag, int) or self.lag < 0:
            raise ValueError(f"lag must be a non-negative integer; got {self.lag!r}")
        if self.interact_with is not None:
            other, other_lag = self.interact_with
            if not other:
                raise ValueError("interaction variable must be non-empty")
            if not isinstance(other_lag, int) or other_lag < 0:
                raise ValueError(f"interaction lag must be a non-negative integer; got {other_lag!r}")
            object.__setattr__(self, "interact_with", (str(other), int(other_lag)))

    @property
    def label(self) -> str:
        own = lag_label(self.variable, self.lag)
        if self.interact_with is None:
            return own
        return interaction_label(own, lag_label(*self.interact_with))

    @classmethod
    def parse(cls, text: str) -> "Term":
        """Parse ``var@lag`` or ``var@lag*other@lag``; a missing ``@lag`` means lag 0."""
        parts = [p.strip() for p in str(text).split("*")]
        if len(parts) > 2 or not all(parts):
            raise ValueError(f"cannot parse term {text!r}")
        pairs = []
        for part in parts:
            name, _, lag = part.partition("@")
            try:
                pairs.append((name.strip(), int(lag) if lag else 0))
            except ValueError:
                raise ValueError(f"cannot parse lag in term {text!r}") from None
        if len(pairs) == 1:
            return cls(*pairs[0])
        return cls(pairs[0][0], pairs[0][1], interact_with=pairs[1])

    def __str__(self) -> str:
        text = f"{self.variable}@{self.lag}"
        if self.interact_with is not None:
            text += f"*{self.interact_with[0]}@{self.interact_with[1]}"
        return text


@dataclass
class ModelSpec:
    """A regression model over an AlignedPanel.

    Attributes:
        dependent: column label of the dependent variable (taken at lag 0).
        terms: ordered regressors.
        intercept: prepend a column of ones.
        label: catalogue key, e.g. "eq5".
        description: free text for reports.
    """

    dependent: str
    terms: List[Term] = field(default_factory=list)
    intercept: bool = True
    label: str = ""
    description: str = ""

    def __post_init__(self) -> None:
        self.terms = [t if isinstance(t, Term) else Term.parse(t) for t in self.terms]
        if not self.dependent:
            raise ValueError("dependent must be non-empty")
        if not self.terms and not self.intercept:
            raise ValueError("model needs at least one term or an intercept")
        keys = [(t.variable, t.lag, t.interact_with) for t in self.terms]
        if len(set(keys)) != len(keys):
            dupes = sorted({str(t) for t, k in zip(self.terms, keys) if keys.count(k) > 1})
            raise ValueError(f"duplicate term(s): {', '.join(dupes)}")

    @property
    def names(self) -> List[str]:
        return ([INTERCEPT] if self.intercept else []) + [t.label for t in self.terms]

    @classmethod
    def from_yaml_dict(cls, data: Dict[str, Any]) -> "ModelSpec":
        """Deserialize one catalogue entry."""
        return cls(
            dependent=data.get("dependent", ""),
            terms=[Term.parse(t) for t in data.get("terms", []) or []],
            intercept=bool(data.get("intercept", True)),
            label=str(data.get("label", "")),
            description=str(data.get("description", "")),
        )


@dataclass
class RegressionResult:
    """OLS estimates in design-column order (intercept first when present)."""

    names: List[str]
    coef: np.ndarray
    stderr: np.ndarray
    tstat: np.ndarray
    pvalue: np.ndarray
    r2: float
    n_used: int
    rss: float
    label: str = ""
    dependent: str = ""
    cov_type: str = "nonrobust"

    def __post_init__(self) -> None:
        if not (len(self.names) == len(self.coef) == len(self.stderr) == len(self.tstat) == len(self.pvalue)):
            raise ValueError("names, coef, stderr, tstat and pvalue must have equal length")

    def coefficient(self, name: str) -> Tuple[float, float, float]:
        """Return (coef, tstat, pvalue) for a named design column."""
        try:
            i = self.names.index(name)
        except ValueError:
            raise KeyError(f"no coefficient {name!r}; have {', '.join(self.names)}") from None
        return float(self.coef[i]), float(self.tstat[i]), float(self.pvalue[i])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"coef": self.coef, "stderr": self.stderr, "tstat": self.tstat, "pvalue": self.pvalue},
            index=pd.Index(self.names, name="term"),
        )


class Design(NamedTuple):
    y: np.ndarray
    X: np.ndarray
    n_used: int
    names: List[str]
    dates: np.ndarray


def _resolve(panel: AlignedPanel, variable: str, lag: int) -> np.ndarray:
    """Column ``variable`` at ``lag``: a pre-lagged panel column if present, else a shift within the panel."""
    label = lag_label(variable, lag)
    if label in panel.columns:
        return panel.columns[label]
    base = panel.column(variable)
    if lag >= len(base):
        raise DataValidationError(f"lag {lag} for {variable!r} exceeds the {len(base)} panel rows")
    shifted = np.full(len(base), np.nan)
    shifted[lag:] = base[: len(base) - lag]
    return shifted


def build_design(panel: AlignedPanel, spec: ModelSpec) -> Design:
    """Materialize y and X for ``spec``, dropping rows with any missing value.

    Raises:
        DataValidationError: unknown column, or no usable row remains.
    """
    y = panel.column(spec.dependent)
    columns = []
    for term in spec.terms:
        values = _resolve(panel, term.variable, term.lag)
        if term.interact_with is not None:
            values = values * _resolve(panel, *term.interact_with)
        columns.append(values)
    if spec.intercept:
        columns.insert(0, np.ones(len(panel)))
    X = np.column_stack(columns)

    keep = np.isfinite(y) & np.all(np.isfinite(X), axis=1)
    n_used = int(keep.sum())
    if n_used == 0:
        raise DataValidationError(f"model {spec.label or spec.dependent!r}: every row has a missing value")
    logger.info("model %s: %d of %d rows usable", spec.label or spec.dependent, n_used, len(panel))
    return Design(y=y[keep], X=X[keep], n_used=n_used, names=spec.names, dates=panel.dates[keep])


def fit_least_squares(y: np.ndarray, X: np.ndarray, cov_type: str = "nonrobust"):
    """statsmodels OLS fit of y on X as given (no constant is added)."""
    if cov_type not in COV_TYPES:
        raise ValueError(f"cov_type must be one of {COV_TYPES}; got {cov_type!r}")
    return sm.OLS(np.asarray(y, dtype=float), np.asarray(X, dtype=float)).fit(cov_type=cov_type)


def check_rank(X: np.ndarray, names: Sequence[str]) -> None:
    """Raise DataValidationError naming the first column whose norm after projection on earlier columns vanishes."""
    r = np.linalg.qr(X, mode="r")
    norms = np.linalg.norm(X, axis=0)
    collinear = np.flatnonzero(np.abs(np.diag(r)) <= RANK_TOLERANCE * norms)
    if collinear.size:
        raise DataValidationError(
            f"design is rank deficient: column {names[collinear[0]]!r} is collinear with earlier columns"
        )


def ols_fit(
    y: np.ndarray,
    X: np.ndarray,
    names: Optional[Sequence[str]] = None,
    cov_type: str = "nonrobust",
    label: str = "",
    dependent: str = "",
) -> RegressionResult:
    """Ordinary least squares with classical (or HC1) standard errors.

    R^2 uses the centered total sum of squares when X has a constant column.

    Raises:
        DataValidationError: n <= k, or X is rank deficient.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    names = list(names) if names is not None else [f"x{i}" for i in range(k)]
    if len(names) != k:
        raise ValueError(f"got {len(names)} names for {k} columns")
    if len(y) != n:
        raise ValueError(f"y has {len(y)} rows; X has {n}")
    if n <= k:
        raise DataValidationError(f"need more rows than columns; got {n} rows for {k} columns")
    check_rank(X, names)

    fit = fit_least_squares(y, X, cov_type)
    return RegressionResult(
        names=names,
        coef=np.asarray(fit.params),
        stderr=np.asarray(fit.bse),
        tstat=np.asarray(fit.tvalues),
        pvalue=np.asarray(fit.pvalues),
        r2=float(fit.rsquared),
        n_used=n,
        rss=float(fit.ssr),
        label=label,
        dependent=dependent,
        cov_type=cov_type,
    )


def run_model(panel: AlignedPanel, spec: ModelSpec, cov_type: str = "nonrobust") -> RegressionResult:
    """build_design followed by ols_fit."""
    design = build_design(panel, spec)
    return ols_fit(design.y, design.X, design.names, cov_type=cov_type, label=spec.label, dependent=spec.dependent)


def model_variables(specs: Sequence[ModelSpec]) -> List[str]:
    """Every base variable the specs reference, in first-use order."""
    seen: Dict[str, None] = {}
    for spec in specs:
        seen.setdefault(spec.dependent)
        for term in spec.terms:
            seen.setdefault(term.variable)
            if term.interact_with is not None:
                seen.setdefault(term.interact_with[0])
    return list(seen)


def load_models(filepath: Union[str, Path]) -> Dict[str, ModelSpec]:
    """Load a model catalogue YAML file into an ordered label -> ModelSpec map."""
    try:
        import yaml
    except Exception as exc:  # pragma: no cover - dependency/platform
        raise RuntimeError("PyYAML is required to load model catalogues") from exc

    path = Path(filepath)
    if not path.exists():
        raise FileNotFoundError(f"model catalogue not found: {filepath}")
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}

    models: Dict[str, ModelSpec] = {}
    for entry in data.get("models", []) or []:
        spec = ModelSpec.from_yaml_dict(entry)
        if not spec.label:
            raise ValueError(f"{path.name}: model entry without a label")
        if spec.label in models:
            raise ValueError(f"{path.name}: duplicate model label {spec.label!r}")
        models[spec.label] = spec
    return models


def study_models() -> Dict[str, ModelSpec]:
    """The bundled crash-risk model catalogue, keyed by equation label."""
    return load_models(CATALOGUE_PATH)
