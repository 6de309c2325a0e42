"""Gray-level histogram analysis.

Given the 256-bin gray histogram of the pixels surrounding a prospective text
placement, work out which gray values the text may use while staying clearly
distinguishable from everything already there. Two filters run in sequence:

1. a *frequency* filter — a gray level counts as "used" when its bin exceeds
   ``max(bins) * vertical_fraction``; everything else is unused;
2. a *margin* filter — drop every unused gray within ``min_margin`` levels of
   an edge of a used run, so the final choice sits at least ``min_margin + 1``
   levels away from every used gray.

The candidate sets produced here drive color selection for every rendered
word; :func:`candidate_oracle` is a deliberately independent re-derivation
kept for tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGrayLevel

GRAY_LEVELS = 256

# Gray-level sets are plain 1-D int64 arrays, strictly ascending, every value
# in [0, 255]. All functions below produce them in that form.
GrayLevelSet = np.ndarray


@dataclass(frozen=True)
class AnalysisThresholds:
    """Tuning knobs for the histogram analysis.

    Attributes:
        vertical_fraction: fraction of the tallest bin a gray level must
            exceed to count as used. 0.0 (the default) means any nonzero bin
            marks its level as used. The product ``max * fraction`` is
            compared exactly, with no rounding.
        min_margin: minimum distance, in gray levels, kept between a chosen
            text gray and the nearest edge of a used run. 0 disables the
            margin filter.
    """

    vertical_fraction: float = 0.0
    min_margin: int = 16

    def __post_init__(self) -> None:
        if not 0.0 <= self.vertical_fraction <= 1.0:
            raise ValueError(
                f"vertical_fraction must be within [0, 1], got {self.vertical_fraction!r}"
            )
        if not 0 <= int(self.min_margin) <= 255:
            raise ValueError(f"min_margin must be within [0, 255], got {self.min_margin!r}")


@dataclass(frozen=True)
class GrayHistogram:
    """Occurrence counts for each of the 256 gray levels."""

    bins: np.ndarray

    def __post_init__(self) -> None:
        bins = np.asarray(self.bins, dtype=np.int64)
        if bins.shape != (GRAY_LEVELS,):
            raise ValueError(f"expected exactly {GRAY_LEVELS} bins, got shape {bins.shape}")
        if (bins < 0).any():
            raise ValueError("histogram bins must be non-negative")
        object.__setattr__(self, "bins", bins)

    def total(self) -> int:
        """Number of samples counted into the histogram."""
        return int(self.bins.sum())


def histogram_from_samples(samples) -> GrayHistogram:
    """Count gray-level occurrences into a 256-bin histogram.

    Args:
        samples: any array-like of integer gray values in [0, 255]; it is
            flattened, so masked pixel selections can be passed directly.

    Raises:
        InvalidGrayLevel: if any sample falls outside [0, 255].
    """
    arr = np.asarray(samples, dtype=np.int64).ravel()
    if arr.size and (int(arr.min()) < 0 or int(arr.max()) > 255):
        raise InvalidGrayLevel(
            f"gray samples must lie in [0, 255]; saw range [{arr.min()}, {arr.max()}]"
        )
    return GrayHistogram(np.bincount(arr, minlength=GRAY_LEVELS))


def unused_grays(hist: GrayHistogram, thresholds: AnalysisThresholds) -> GrayLevelSet:
    """Gray levels whose frequency is at or below the vertical threshold.

    The threshold is ``max(bins) * vertical_fraction``, compared exactly.
    An all-zero histogram leaves every level unused.
    """
    thresh = hist.bins.max() * thresholds.vertical_fraction
    return np.flatnonzero(hist.bins <= thresh)


def edge_colors(unused: GrayLevelSet) -> GrayLevelSet:
    """Used gray levels adjacent to an unused one.

    These are the boundaries of the used runs. Keeping a margin from every
    boundary keeps the same margin from every used level, because any used
    level deeper inside a run is farther from all unused grays than the
    run's edge on that side.
    """
    unused_mask = _level_mask(unused)
    next_to_unused = np.zeros(GRAY_LEVELS, dtype=bool)
    next_to_unused[:-1] |= unused_mask[1:]
    next_to_unused[1:] |= unused_mask[:-1]
    return np.flatnonzero(next_to_unused & ~unused_mask)


def design_colors(hist: GrayHistogram, thresholds: AnalysisThresholds) -> GrayLevelSet:
    """Candidate text grays for a region with this histogram.

    The unused grays, minus a band of ``min_margin`` levels on both sides of
    every edge color (band ends clamped to [0, 255], both ends inclusive).
    May be empty: busy regions can use up every gray level.
    """
    unused = unused_grays(hist, thresholds)
    margin = thresholds.min_margin
    if margin <= 0:
        return unused
    valid = np.zeros(GRAY_LEVELS, dtype=bool)
    valid[unused] = True
    for edge in edge_colors(unused):
        valid[max(0, edge - margin) : edge + margin + 1] = False
    return np.flatnonzero(valid)


def candidate_oracle(hist: GrayHistogram, thresholds: AnalysisThresholds) -> GrayLevelSet:
    """Brute-force reference for :func:`design_colors`.

    Enumerates the full 256x256 grid of (gray, used-level) pairs and keeps a
    gray only when it is unused and farther than ``min_margin`` from *every*
    used level. No run edges, no interval arithmetic — this is an independent
    route kept for tests, and it must stay independent so the two can check
    each other. Do not "optimize" it to share code with design_colors.
    """
    thresh = hist.bins.max() * thresholds.vertical_fraction
    unused_mask = hist.bins <= thresh
    levels = np.arange(GRAY_LEVELS)
    far_enough = np.abs(levels[:, None] - levels[None, :]) > thresholds.min_margin
    # row g survives when every used column u is far enough away
    ok = unused_mask & (far_enough | unused_mask[None, :]).all(axis=1)
    return np.flatnonzero(ok)


def _level_mask(levels) -> np.ndarray:
    """Validate a gray-level set and return it as a 256-slot boolean mask."""
    arr = np.asarray(levels, dtype=np.int64).ravel()
    if arr.size:
        if (np.diff(arr) <= 0).any():
            raise InvalidGrayLevel("gray-level sets must be strictly ascending")
        if int(arr[0]) < 0 or int(arr[-1]) > 255:
            raise InvalidGrayLevel(
                f"gray levels must lie in [0, 255]; saw range [{arr[0]}, {arr[-1]}]"
            )
    mask = np.zeros(GRAY_LEVELS, dtype=bool)
    mask[arr] = True
    return mask
