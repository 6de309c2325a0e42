"""Histogram analysis: unused levels, run edges, margin filtering, oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from graytext.analysis import (
    GRAY_LEVELS,
    AnalysisThresholds,
    GrayHistogram,
    candidate_oracle,
    design_colors,
    edge_colors,
    histogram_from_samples,
    unused_grays,
)
from graytext.errors import InvalidGrayLevel

DEFAULTS = AnalysisThresholds()


def hist_with_used(levels, count=10) -> GrayHistogram:
    bins = np.zeros(GRAY_LEVELS, dtype=np.int64)
    bins[list(levels)] = count
    return GrayHistogram(bins)


def span(*ranges):
    """Concatenate inclusive (lo, hi) ranges into one sorted level array."""
    return np.concatenate([np.arange(lo, hi + 1) for lo, hi in ranges])


class TestThresholds:
    def test_defaults(self):
        assert DEFAULTS.vertical_fraction == 0.0
        assert DEFAULTS.min_margin == 16

    @pytest.mark.parametrize("fraction", [-0.1, 1.5, 2.0])
    def test_fraction_out_of_range(self, fraction):
        with pytest.raises(ValueError):
            AnalysisThresholds(vertical_fraction=fraction)

    @pytest.mark.parametrize("margin", [-1, 256])
    def test_margin_out_of_range(self, margin):
        with pytest.raises(ValueError):
            AnalysisThresholds(min_margin=margin)


class TestHistogram:
    def test_from_samples_counts(self):
        hist = histogram_from_samples([0, 0, 5, 255])
        assert hist.bins[0] == 2
        assert hist.bins[5] == 1
        assert hist.bins[255] == 1
        assert hist.total() == 4

    def test_from_samples_accepts_2d(self):
        hist = histogram_from_samples(np.full((4, 4), 7, np.uint8))
        assert hist.bins[7] == 16

    def test_from_samples_rejects_out_of_range(self):
        with pytest.raises(InvalidGrayLevel):
            histogram_from_samples([1, 256])
        with pytest.raises(InvalidGrayLevel):
            histogram_from_samples([-1])

    def test_wrong_shape_rejected(self):
        with pytest.raises(ValueError):
            GrayHistogram(np.zeros(255, dtype=np.int64))

    def test_negative_bins_rejected(self):
        bins = np.zeros(GRAY_LEVELS, dtype=np.int64)
        bins[3] = -1
        with pytest.raises(ValueError):
            GrayHistogram(bins)


class TestUnusedGrays:
    def test_zero_fraction_means_any_hit_is_used(self):
        unused = unused_grays(hist_with_used([10], count=1), DEFAULTS)
        assert 10 not in unused
        assert len(unused) == 255

    def test_empty_histogram_leaves_everything_unused(self):
        unused = unused_grays(GrayHistogram(np.zeros(GRAY_LEVELS, np.int64)), DEFAULTS)
        assert len(unused) == GRAY_LEVELS

    def test_fraction_threshold_is_exact(self):
        # max = 4, fraction 0.5 -> threshold 2.0; a bin of exactly 2 is unused
        bins = np.zeros(GRAY_LEVELS, dtype=np.int64)
        bins[0] = 4
        bins[1] = 2
        bins[2] = 3
        thresholds = AnalysisThresholds(vertical_fraction=0.5)
        unused = unused_grays(GrayHistogram(bins), thresholds)
        assert 0 not in unused
        assert 1 in unused
        assert 2 not in unused

    def test_fraction_one_marks_everything_unused(self):
        bins = np.zeros(GRAY_LEVELS, dtype=np.int64)
        bins[7] = 5
        bins[8] = 5
        bins[9] = 4
        thresholds = AnalysisThresholds(vertical_fraction=1.0)
        unused = unused_grays(GrayHistogram(bins), thresholds)
        # threshold = 5; bins <= 5 are unused, i.e. everything
        assert len(unused) == GRAY_LEVELS


class TestEdgeColors:
    def test_single_used_level_is_its_own_edge(self):
        unused = unused_grays(hist_with_used([100]), DEFAULTS)
        assert edge_colors(unused).tolist() == [100]

    def test_run_keeps_only_its_ends(self):
        unused = unused_grays(hist_with_used([100, 101, 102]), DEFAULTS)
        assert edge_colors(unused).tolist() == [100, 102]

    def test_boundary_runs_at_0_and_255(self):
        unused = unused_grays(hist_with_used([0, 1, 254, 255]), DEFAULTS)
        # 0 and 255 touch the array ends, not unused levels; the inner ends do
        assert edge_colors(unused).tolist() == [1, 254]

    def test_no_unused_levels_means_no_edges(self):
        assert edge_colors(np.array([], dtype=np.int64)).size == 0

    def test_everything_unused_means_no_edges(self):
        assert edge_colors(np.arange(GRAY_LEVELS)).size == 0

    def test_rejects_unsorted_levels(self):
        with pytest.raises(InvalidGrayLevel):
            edge_colors(np.array([5, 3]))

    def test_rejects_out_of_range_levels(self):
        with pytest.raises(InvalidGrayLevel):
            edge_colors(np.array([0, 256]))


class TestDesignColors:
    def test_single_used_level(self):
        got = design_colors(hist_with_used([100]), DEFAULTS)
        assert np.array_equal(got, span((0, 83), (117, 255)))

    def test_short_used_run(self):
        got = design_colors(hist_with_used([100, 101, 102]), DEFAULTS)
        assert np.array_equal(got, span((0, 83), (119, 255)))

    def test_used_level_at_zero_clamps_the_band(self):
        got = design_colors(hist_with_used([0]), DEFAULTS)
        assert np.array_equal(got, span((17, 255)))

    def test_all_levels_used_leaves_nothing(self):
        assert design_colors(hist_with_used(range(GRAY_LEVELS)), DEFAULTS).size == 0

    def test_margin_zero_returns_unused_unchanged(self):
        hist = hist_with_used([100])
        thresholds = AnalysisThresholds(min_margin=0)
        got = design_colors(hist, thresholds)
        assert np.array_equal(got, unused_grays(hist, thresholds))

    def test_empty_histogram_allows_everything(self):
        got = design_colors(GrayHistogram(np.zeros(GRAY_LEVELS, np.int64)), DEFAULTS)
        assert np.array_equal(got, np.arange(GRAY_LEVELS))

    def test_survivors_clear_every_used_level(self):
        rng = np.random.default_rng(7)
        bins = np.where(rng.random(GRAY_LEVELS) < 0.2, 5, 0)
        hist = GrayHistogram(bins)
        got = design_colors(hist, DEFAULTS)
        used = np.flatnonzero(bins)
        for g in got:
            assert np.abs(used - g).min() > DEFAULTS.min_margin


class TestOracleAgreement:
    @pytest.mark.parametrize("margin", [0, 8, 16, 24])
    def test_all_single_level_histograms(self, margin):
        thresholds = AnalysisThresholds(min_margin=margin)
        for level in range(GRAY_LEVELS):
            hist = hist_with_used([level])
            assert np.array_equal(
                design_colors(hist, thresholds), candidate_oracle(hist, thresholds)
            ), f"level {level}, margin {margin}"

    @settings(max_examples=150, deadline=None)
    @given(
        bins=hnp.arrays(np.int64, (GRAY_LEVELS,), elements=st.integers(0, 5000)),
        margin=st.integers(0, 255),
        fraction=st.floats(0.0, 1.0, allow_nan=False),
    )
    def test_random_histograms(self, bins, margin, fraction):
        hist = GrayHistogram(bins)
        thresholds = AnalysisThresholds(vertical_fraction=fraction, min_margin=margin)
        assert np.array_equal(
            design_colors(hist, thresholds), candidate_oracle(hist, thresholds)
        )

    def test_oracle_on_saturated_histogram(self):
        assert candidate_oracle(hist_with_used(range(GRAY_LEVELS)), DEFAULTS).size == 0
