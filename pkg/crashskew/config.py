"""Run configuration: a flat YAML mapping plus command-line overrides.

Example (studies/covid_crash/run.yaml):
    returns: ../../fixtures/returns.csv
    cases: ../../fixtures/cases.csv
    search: ../../fixtures/search.csv
    shock_form: cubed
    seed: 0
    out: out

Relative input paths resolve against the directory of the YAML file.
Flags given on the command line win over file values.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from .garchs import ShockForm
from .ingest import ZeroPolicy, to_day

INPUT_KEYS = ("returns", "cases", "deaths", "global_cases", "global_deaths", "search", "skew")
SENTIMENT_VARIABLES = ("fearSent", "D_fear")


@dataclass
class RunConfig:
    """Everything a command needs besides its own positional choices.

    Attributes:
        returns ... search: input CSV paths; None when not supplied.
        skew: optional ``date,h,s,eta`` file from an earlier estimate run.
        fear_window_start/end: inclusive reference window for the fear
            dummy; both None selects the default (calendar 2020 when covered).
    """

    returns: Optional[str] = None
    cases: Optional[str] = None
    deaths: Optional[str] = None
    global_cases: Optional[str] = None
    global_deaths: Optional[str] = None
    search: Optional[str] = None
    skew: Optional[str] = None
    zero_policy: str = ZeroPolicy.LOG1P.value
    shock_form: str = ShockForm.CUBED.value
    fear_window_start: Optional[str] = None
    fear_window_end: Optional[str] = None
    multistart: int = 3
    seed: int = 0
    tolerance: float = 1e-9
    max_iterations: int = 2000
    p_max: int = 10
    split_date: Optional[str] = None
    models: List[str] = field(default_factory=lambda: ["all"])
    robust: bool = False
    variable: str = "fearSent"
    out: str = "out"

    @classmethod
    def from_yaml(cls, filepath: Union[str, Path]) -> "RunConfig":
        """Load a flat ``key: value`` YAML file.

        Raises:
            FileNotFoundError: the file does not exist.
            ValueError: the document is not a mapping or has an unknown key.
        """
        try:
            import yaml
        except Exception as exc:  # pragma: no cover - dependency/platform
            raise RuntimeError("PyYAML is required to load run configuration") from exc

        path = Path(filepath)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {filepath}")
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ValueError(f"{path.name}: expected a key: value mapping")

        base = path.resolve().parent
        for key in INPUT_KEYS + ("out",):
            value = data.get(key)
            if value is not None and not Path(str(value)).is_absolute():
                data[key] = str(base / str(value))
        return cls.from_mapping(data)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        values = dict(data)
        if isinstance(values.get("models"), str):
            values["models"] = _split_models(values["models"])
        for key in ("split_date", "fear_window_start", "fear_window_end"):
            if values.get(key) is not None:
                values[key] = str(values[key])
        return cls(**values)

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Return a copy with every non-None override applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if isinstance(changes.get("models"), str):
            changes["models"] = _split_models(changes["models"])
        return replace(self, **changes)

    def validate(self, required: Sequence[str] = ()) -> "RunConfig":
        """Check enumerations, ranges and input paths.

        Args:
            required: input keys that must be set for the command at hand.

        Raises:
            ValueError: an illegal value or a missing required input.
            FileNotFoundError: a referenced input path does not exist.
        """
        ZeroPolicy(self.zero_policy)
        ShockForm(self.shock_form)
        if self.variable not in SENTIMENT_VARIABLES:
            raise ValueError(f"variable must be one of {SENTIMENT_VARIABLES}; got {self.variable!r}")
        if self.multistart < 1:
            raise ValueError("multistart must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.p_max < 1:
            raise ValueError("p_max must be >= 1")
        if (self.fear_window_start is None) != (self.fear_window_end is None):
            raise ValueError("fear_window_start and fear_window_end must be given together")
        for key in ("split_date", "fear_window_start", "fear_window_end"):
            value = getattr(self, key)
            if value is not None:
                try:
                    to_day(value)
                except (ValueError, TypeError):
                    raise ValueError(f"{key} is not a date: {value!r}") from None

        for key in required:
            if getattr(self, key) is None:
                raise ValueError(f"missing required input: {key}")
        for key in INPUT_KEYS:
            value = getattr(self, key)
            if value is not None and not Path(value).is_file():
                raise FileNotFoundError(f"{key} file not found: {value}")
        return self

    @property
    def fear_window(self):
        if self.fear_window_start is None:
            return None
        return (self.fear_window_start, self.fear_window_end)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _split_models(text: str) -> List[str]:
    return [label.strip() for label in text.split(",") if label.strip()]
