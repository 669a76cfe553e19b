"""Tests for RunConfig loading, merging and validation."""

from pathlib import Path

import pytest

from crashskew.config import RunConfig


def _touch(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("date,return\n")
    return path


class TestFromYaml:
    """Test RunConfig.from_yaml."""

    def test_relative_inputs_resolve_against_file(self, tmp_path):
        _touch(tmp_path / "data" / "returns.csv")
        study = tmp_path / "study"
        study.mkdir()
        cfg_path = study / "run.yaml"
        cfg_path.write_text("returns: ../data/returns.csv\nout: results\nseed: 7\n")

        cfg = RunConfig.from_yaml(cfg_path)
        assert Path(cfg.returns).resolve() == (tmp_path / "data" / "returns.csv").resolve()
        assert Path(cfg.out) == study.resolve() / "results"
        assert cfg.seed == 7

    def test_absolute_inputs_untouched(self, tmp_path):
        target = _touch(tmp_path / "returns.csv").resolve()
        cfg_path = tmp_path / "sub" / "run.yaml"
        cfg_path.parent.mkdir()
        cfg_path.write_text(f"returns: {target}\n")
        assert RunConfig.from_yaml(cfg_path).returns == str(target)

    def test_dates_and_model_list(self, tmp_path):
        cfg_path = tmp_path / "run.yaml"
        cfg_path.write_text("split_date: 2020-02-24\nmodels: eq2, eq5\n")
        cfg = RunConfig.from_yaml(cfg_path)
        assert cfg.split_date == "2020-02-24"
        assert cfg.models == ["eq2", "eq5"]

    def test_unknown_key(self, tmp_path):
        cfg_path = tmp_path / "run.yaml"
        cfg_path.write_text("retruns: x.csv\n")
        with pytest.raises(ValueError) as err:
            RunConfig.from_yaml(cfg_path)
        assert "retruns" in str(err.value)

    def test_not_a_mapping(self, tmp_path):
        cfg_path = tmp_path / "run.yaml"
        cfg_path.write_text("- a\n- b\n")
        with pytest.raises(ValueError):
            RunConfig.from_yaml(cfg_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            RunConfig.from_yaml(tmp_path / "missing.yaml")

    def test_empty_file_gives_defaults(self, tmp_path):
        cfg_path = tmp_path / "run.yaml"
        cfg_path.write_text("")
        assert RunConfig.from_yaml(cfg_path) == RunConfig()


class TestMerged:
    """Test flag overrides."""

    def test_flags_win(self):
        cfg = RunConfig(seed=1, shock_form="cubed").merged({"seed": 5, "shock_form": None})
        assert cfg.seed == 5
        assert cfg.shock_form == "cubed"

    def test_model_string_split(self):
        assert RunConfig().merged({"models": "eq2,eq3"}).models == ["eq2", "eq3"]


class TestValidate:
    """Test RunConfig.validate."""

    def test_defaults_are_valid(self):
        assert RunConfig().validate() is not None

    def test_bad_shock_form(self):
        with pytest.raises(ValueError):
            RunConfig(shock_form="quartic").validate()

    def test_bad_zero_policy(self):
        with pytest.raises(ValueError):
            RunConfig(zero_policy="drop").validate()

    def test_bad_variable(self):
        with pytest.raises(ValueError):
            RunConfig(variable="fear").validate()

    def test_half_open_fear_window(self):
        with pytest.raises(ValueError):
            RunConfig(fear_window_start="2020-01-01").validate()

    def test_bad_split_date(self):
        with pytest.raises(ValueError) as err:
            RunConfig(split_date="not a date").validate()
        assert "split_date" in str(err.value)

    def test_missing_required_input(self):
        with pytest.raises(ValueError) as err:
            RunConfig().validate(required=("returns",))
        assert "returns" in str(err.value)

    def test_missing_input_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            RunConfig(returns=str(tmp_path / "nope.csv")).validate()

    def test_fear_window_pair(self):
        cfg = RunConfig(fear_window_start="2020-01-01", fear_window_end="2020-06-30")
        assert cfg.fear_window == ("2020-01-01", "2020-06-30")
        assert RunConfig().fear_window is None

    def test_to_dict_round_trips(self):
        cfg = RunConfig(seed=3, models=["eq2"])
        assert RunConfig.from_mapping(cfg.to_dict()) == cfg
