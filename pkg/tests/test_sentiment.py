"""Tests for the fear sentiment index and dummy."""

import io
import math

import numpy as np
import pytest

from crashskew.errors import DataValidationError
from crashskew.ingest import align_panel
from crashskew.sentiment import (
    VolumeSeries,
    build_sentiment,
    default_reference_window,
    fear_dummy,
    fear_sentiment,
    load_volume_csv,
)


def _volumes(start: str, values) -> VolumeSeries:
    first = np.datetime64(start)
    return VolumeSeries(dates=first + np.arange(len(values)), values=values)


class TestFearSentiment:
    """Test the fear index."""

    def test_zero_volume(self):
        assert fear_sentiment(0) == 0.0

    def test_known_value(self):
        assert fear_sentiment(99) == pytest.approx(math.log(100))

    def test_hundred(self):
        assert fear_sentiment(100) == pytest.approx(4.61512, abs=5e-6)

    def test_strictly_increasing(self):
        grid = np.linspace(0.0, 1e6, 2001)
        values = [fear_sentiment(v) for v in grid]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_negative_volume(self):
        with pytest.raises(ValueError):
            fear_sentiment(-1)

    def test_non_finite_volume(self):
        with pytest.raises(ValueError):
            fear_sentiment(float("nan"))


class TestFearDummy:
    """Test the fear dummy."""

    def test_strictly_above_median(self):
        volumes = _volumes("2020-01-01", [1.0, 2.0, 3.0, 4.0, 5.0])
        assert fear_dummy(volumes).tolist() == [0, 0, 0, 1, 1]

    def test_reference_window_sets_threshold(self):
        volumes = _volumes("2020-01-01", [10.0, 20.0, 1.0, 2.0])
        dummy = fear_dummy(volumes, ("2020-01-03", "2020-01-04"))
        assert dummy.tolist() == [1, 1, 0, 1]

    def test_equal_volumes_give_zero(self):
        assert fear_dummy(_volumes("2020-01-01", [7.0] * 6)).tolist() == [0] * 6

    def test_window_over_last_four(self):
        volumes = _volumes("2020-01-01", [5.0, 1.0, 4.0, 2.0, 3.0, 9.0])
        window = ("2020-01-03", "2020-01-06")
        selected = sorted([4.0, 2.0, 3.0, 9.0])
        median = (selected[1] + selected[2]) / 2
        assert median == 3.5
        assert fear_dummy(volumes, window).tolist() == [int(v > median) for v in volumes.values]
        assert fear_dummy(volumes, window).tolist() == [1, 0, 1, 0, 0, 1]

    def test_rank_invariance(self):
        rng = np.random.default_rng(0)
        raw = rng.uniform(0.0, 100.0, size=41)
        window = ("2020-01-10", "2020-02-05")
        base = fear_dummy(_volumes("2020-01-01", raw), window)
        for transform in (np.log1p, np.sqrt, lambda v: 3.0 * v + 2.0, lambda v: v ** 3):
            assert np.array_equal(fear_dummy(_volumes("2020-01-01", transform(raw)), window), base)

    @pytest.mark.parametrize("n", [1, 2, 7, 10, 31])
    def test_at_most_half_above(self, n):
        values = np.random.default_rng(n).permutation(np.arange(1.0, n + 1))
        assert fear_dummy(_volumes("2020-01-01", values)).sum() <= n // 2

    def test_empty_window(self):
        volumes = _volumes("2020-01-01", [1.0, 2.0])
        with pytest.raises(DataValidationError):
            fear_dummy(volumes, ("2021-01-01", "2021-12-31"))


class TestLoadVolumeCsv:
    """Test the search volume loader."""

    def test_sorted(self):
        volumes = load_volume_csv(io.BytesIO(b"date,volume\n2020-01-02,5\n2020-01-01,3\n"))
        assert volumes.values.tolist() == [3.0, 5.0]

    def test_negative_volume_line(self):
        with pytest.raises(DataValidationError) as err:
            load_volume_csv(io.BytesIO(b"date,volume\n2020-01-01,3\n2020-01-02,-5\n"))
        assert err.value.line == 3


class TestBuildSentiment:
    """Test daily sentiment construction."""

    def test_padding_before_coverage(self):
        volumes = _volumes("2020-01-03", [9.0, 0.0])
        sentiment = build_sentiment(volumes, span=("2020-01-01", "2020-01-04"))
        assert len(sentiment.dates) == 4
        assert sentiment.fear_sent.tolist() == pytest.approx([0.0, 0.0, math.log(10), 0.0])
        assert sentiment.d_fear.tolist() == [0, 0, 1, 0]

    def test_series_views(self):
        sentiment = build_sentiment(_volumes("2020-01-01", [0.0, 3.0]))
        assert sentiment.fear_series().values.tolist() == pytest.approx([0.0, math.log(4)])
        assert sentiment.dummy_series().values.tolist() == [0.0, 1.0]

    def test_empty_volumes(self):
        empty = VolumeSeries(dates=np.array([], dtype="datetime64[D]"), values=[])
        with pytest.raises(DataValidationError):
            build_sentiment(empty)

    def test_default_window_uses_2020(self):
        assert default_reference_window(_volumes("2019-12-30", [1.0] * 5)) == ("2020-01-01", "2020-12-31")
        assert default_reference_window(_volumes("2021-06-01", [1.0] * 5)) is None

    def test_days_after_coverage_missing(self):
        sentiment = build_sentiment(_volumes("2020-01-01", [50.0, 60.0, 70.0]), span=("2020-01-01", "2020-01-06"))
        assert sentiment.fear_sent[:3] == pytest.approx(np.log1p([50.0, 60.0, 70.0]))
        assert np.isnan(sentiment.fear_sent[3:]).all()
        assert np.isnan(sentiment.d_fear[3:]).all()

    def test_interior_gap_missing(self):
        volumes = VolumeSeries(
            dates=np.array(["2020-01-01", "2020-01-02", "2020-01-05"], dtype="datetime64[D]"),
            values=[5.0, 6.0, 7.0],
        )
        sentiment = build_sentiment(volumes, span=("2020-01-01", "2020-01-05"))
        assert np.isnan(sentiment.fear_sent).tolist() == [False, False, True, True, False]
        assert np.isnan(sentiment.d_fear).tolist() == [False, False, True, True, False]

    def test_threshold_ignores_padding(self):
        volumes = _volumes("2020-01-20", np.arange(1.0, 21.0))
        window = ("2020-01-01", "2020-12-31")
        unpadded = build_sentiment(volumes, reference_window=window)
        padded = build_sentiment(volumes, reference_window=window, span=("2019-06-01", "2020-02-08"))
        assert unpadded.d_fear.sum() == 10
        assert np.nansum(padded.d_fear) == 10
        assert np.array_equal(padded.d_fear[padded.dates >= np.datetime64("2020-01-20")], unpadded.d_fear)

    def test_missing_days_are_not_usable(self):
        sentiment = build_sentiment(_volumes("2020-01-01", [50.0, 60.0]), span=("2019-12-30", "2020-01-04"))
        trading = np.array(["2019-12-30", "2020-01-02", "2020-01-03"], dtype="datetime64[D]")
        panel = align_panel(trading, [("fearSent", sentiment.fear_series()), ("D_fear", sentiment.dummy_series())])
        assert panel.usable(["fearSent", "D_fear"]).tolist() == [True, True, False]
        assert panel.column("fearSent")[0] == 0.0
