"""End-to-end synthesis: place words, analyze surroundings, pick grays, draw.

The contract everything here serves: for every rendered word, the gray it was
drawn with differs by more than ``min_margin`` from every gray level that was
used (above the frequency threshold) in the 2-pixel ring around its mask *at
the moment it was drawn*. Analysis always runs against the composited state,
so the guarantee extends to words drawn over earlier words.
"""

from __future__ import annotations

import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    AnalysisThresholds,
    GrayHistogram,
    GrayLevelSet,
    design_colors,
    histogram_from_samples,
)
from .errors import EmptyCandidates, MissingGlyph, NoFit, OutOfBounds, ZeroArea
from .glyphs import BORDER_RADIUS, GlyphMask, TextStyle, dilate, rasterize, ring_from_dilated

logger = logging.getLogger(__name__)

# A background/image state is a uint8 numpy array: (H, W) gray or (H, W, 3) RGB.
BackgroundState = np.ndarray


@dataclass(frozen=True)
class Placement:
    """Top-left corner of the *dilated* mask in image coordinates."""

    x: int
    y: int


@dataclass
class InstanceAnalysis:
    """What the analysis saw at the accepted placement."""

    histogram: GrayHistogram
    candidates: GrayLevelSet


@dataclass
class PlacedWord:
    """Successful placement: geometry plus the analysis that approved it."""

    placement: Placement
    glyph: GlyphMask
    dilated: np.ndarray
    border: np.ndarray
    histogram: GrayHistogram
    candidates: GrayLevelSet
    retries_used: int


@dataclass
class Abandoned:
    """Every tried placement had an empty candidate set."""

    word: str
    retries_used: int
    placements: list[Placement]


@dataclass
class TextInstance:
    """One word successfully rendered onto an image."""

    word: str
    style: TextStyle
    placement: Placement
    chosen_gray: int
    candidate_count: int
    retries_used: int
    quad: np.ndarray  # (4, 2) float corners in image coordinates
    bbox: tuple[float, float, float, float]  # axis-aligned hull of quad
    analysis: InstanceAnalysis | None = field(default=None, repr=False)


@dataclass(frozen=True)
class SynthesisConfig:
    """Everything that shapes a synthesis run (and nothing that doesn't)."""

    thresholds: AnalysisThresholds = AnalysisThresholds()
    max_retries: int = 20
    words_per_image: int = 1
    height_range: tuple[int, int] = (16, 64)
    rotation_range: tuple[float, float] = (-15.0, 15.0)
    seed: int = 0
    alpha_blend: bool = False

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.words_per_image < 1:
            raise ValueError(f"words_per_image must be >= 1, got {self.words_per_image}")
        lo, hi = self.height_range
        if not (1 <= lo <= hi):
            raise ValueError(f"height_range must satisfy 1 <= lo <= hi, got {self.height_range}")
        rlo, rhi = self.rotation_range
        if rlo > rhi:
            raise ValueError(f"rotation_range must satisfy lo <= hi, got {self.rotation_range}")


def image_rng(seed: int, image_index: int) -> np.random.Generator:
    """Independent, platform-stable RNG stream for one image.

    PCG64 seeded from (seed, image_index), so any image can be generated on
    any worker in any order and the bytes come out the same.
    """
    ss = np.random.SeedSequence(
        entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(image_index),)
    )
    return np.random.Generator(np.random.PCG64(ss))


def to_gray(pixels: np.ndarray) -> np.ndarray:
    """Plain-average grayscale: floor((r + g + b) / 3). Identity on gray input."""
    if pixels.ndim == 2:
        return pixels
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected (H, W) or (H, W, 3) pixels, got shape {pixels.shape}")
    total = (
        pixels[..., 0].astype(np.uint16)
        + pixels[..., 1].astype(np.uint16)
        + pixels[..., 2].astype(np.uint16)
    )
    return (total // 3).astype(np.uint8)


def sample_border_grays(
    state: BackgroundState, placement: Placement, border: np.ndarray
) -> GrayHistogram:
    """Histogram the image grays under a border ring placed at ``placement``.

    Raises:
        OutOfBounds: the ring does not fit inside the image there.
    """
    ring_h, ring_w = border.shape
    img_h, img_w = state.shape[:2]
    if (
        placement.x < 0
        or placement.y < 0
        or placement.x + ring_w > img_w
        or placement.y + ring_h > img_h
    ):
        raise OutOfBounds(
            f"ring {ring_w}x{ring_h} at ({placement.x}, {placement.y}) "
            f"exceeds image {img_w}x{img_h}"
        )
    crop = state[placement.y : placement.y + ring_h, placement.x : placement.x + ring_w]
    return histogram_from_samples(to_gray(crop)[border])


def pick_color(candidates: GrayLevelSet, rng: np.random.Generator) -> int:
    """Uniform random choice from the candidate set."""
    if len(candidates) == 0:
        raise EmptyCandidates("no candidate gray levels to choose from")
    return int(candidates[int(rng.integers(len(candidates)))])


def try_place(
    word: str,
    style: TextStyle,
    state: BackgroundState,
    config: SynthesisConfig,
    library,
    rng: np.random.Generator,
    timer: "StageTimer | None" = None,
) -> PlacedWord | Abandoned:
    """Rasterize a word and hunt for a placement with usable gray levels.

    Runs up to ``config.max_retries`` rounds. Each round draws a placement
    uniformly from every position that keeps both the dilated mask and the
    annotation quad inside the image, then analyzes the ring around the mask
    against the current image state. The first round whose candidate set is
    non-empty wins; ``retries_used`` counts the failed rounds before it.

    Raises:
        NoFit: no position keeps the word inside the image at all.
        MissingGlyph/ZeroArea: the word cannot be rasterized in this style.
    """
    timer = timer or _NULL_TIMER
    with timer.stage("rasterize"):
        glyph = rasterize(word, style, library)
        dilated = dilate(glyph.bits, BORDER_RADIUS)
        border = ring_from_dilated(dilated, glyph.bits, BORDER_RADIUS)

    img_h, img_w = state.shape[:2]
    dil_h, dil_w = dilated.shape
    # quad corners sit at placement + BORDER_RADIUS + quad; keep them inside too
    quad_lo = glyph.quad.min(axis=0) + BORDER_RADIUS
    quad_hi = glyph.quad.max(axis=0) + BORDER_RADIUS
    x_lo = max(0, int(math.ceil(-quad_lo[0] - 1e-9)))
    y_lo = max(0, int(math.ceil(-quad_lo[1] - 1e-9)))
    x_hi = min(img_w - dil_w, int(math.floor(img_w - quad_hi[0] + 1e-9)))
    y_hi = min(img_h - dil_h, int(math.floor(img_h - quad_hi[1] + 1e-9)))
    if x_lo > x_hi or y_lo > y_hi:
        raise NoFit(
            f"word {word!r} ({dil_w}x{dil_h} with ring) cannot fit inside {img_w}x{img_h}"
        )

    tried: list[Placement] = []
    with timer.stage("analyze"):
        for round_no in range(config.max_retries):
            placement = Placement(
                x=int(rng.integers(x_lo, x_hi + 1)), y=int(rng.integers(y_lo, y_hi + 1))
            )
            tried.append(placement)
            hist = sample_border_grays(state, placement, border)
            candidates = design_colors(hist, config.thresholds)
            if len(candidates):
                return PlacedWord(
                    placement=placement,
                    glyph=glyph,
                    dilated=dilated,
                    border=border,
                    histogram=hist,
                    candidates=candidates,
                    retries_used=round_no,
                )
    return Abandoned(word=word, retries_used=config.max_retries, placements=tried)


def composite(
    state: BackgroundState,
    placement: Placement,
    glyph: GlyphMask,
    gray: int,
    alpha_blend: bool = False,
) -> None:
    """Draw a glyph onto the image state, in place.

    Hard mode sets every mask pixel to exactly (gray, gray, gray) and touches
    nothing else. Alpha mode blends by antialiased coverage instead; fully
    covered pixels still land exactly on the gray.
    """
    if not 0 <= gray <= 255:
        raise ValueError(f"gray must be within [0, 255], got {gray}")
    y0 = placement.y + BORDER_RADIUS
    x0 = placement.x + BORDER_RADIUS
    region = state[y0 : y0 + glyph.height, x0 : x0 + glyph.width]
    if not alpha_blend:
        region[glyph.bits] = gray
        return
    alpha = glyph.coverage.astype(np.float64) / 255.0
    if region.ndim == 3:
        alpha = alpha[..., None]
    blended = np.rint(region.astype(np.float64) * (1.0 - alpha) + float(gray) * alpha)
    region[...] = blended.astype(np.uint8)
    full = glyph.coverage == 255
    region[full] = gray


def synthesize_image(
    background: BackgroundState,
    words: list[str],
    library,
    config: SynthesisConfig,
    rng: np.random.Generator,
    timer: "StageTimer | None" = None,
) -> tuple[BackgroundState, list[TextInstance], int]:
    """Render a list of words onto a copy of the background.

    Words are processed in order against the evolving composited state. Words
    that cannot be placed (empty candidates after all retries, nothing fits,
    or the sampled font cannot shape them) are counted as abandoned and
    logged; they never fail the image. Returns (image, instances, abandoned).
    """
    timer = timer or _NULL_TIMER
    state = np.array(background, dtype=np.uint8, copy=True)
    instances: list[TextInstance] = []
    abandoned = 0
    for word in words:
        word_started = time.perf_counter()
        style = sample_style(config, library, rng)
        try:
            placed = try_place(word, style, state, config, library, rng, timer=timer)
        except (NoFit, MissingGlyph, ZeroArea) as exc:
            logger.info("abandoning %r: %s", word, exc)
            abandoned += 1
            continue
        if isinstance(placed, Abandoned):
            logger.info(
                "abandoning %r after %d rounds without candidates; tried %s",
                word,
                placed.retries_used,
                [(p.x, p.y) for p in placed.placements],
            )
            abandoned += 1
            continue
        gray = pick_color(placed.candidates, rng)
        with timer.stage("composite"):
            composite(state, placed.placement, placed.glyph, gray, config.alpha_blend)
        quad = placed.glyph.quad + np.array(
            [placed.placement.x + BORDER_RADIUS, placed.placement.y + BORDER_RADIUS],
            dtype=np.float64,
        )
        bbox = (
            float(quad[:, 0].min()),
            float(quad[:, 1].min()),
            float(quad[:, 0].max()),
            float(quad[:, 1].max()),
        )
        instances.append(
            TextInstance(
                word=word,
                style=style,
                placement=placed.placement,
                chosen_gray=gray,
                candidate_count=int(len(placed.candidates)),
                retries_used=placed.retries_used,
                quad=quad,
                bbox=bbox,
                analysis=InstanceAnalysis(
                    histogram=placed.histogram, candidates=placed.candidates
                ),
            )
        )
        timer.instance(time.perf_counter() - word_started)
    return state, instances, abandoned


def sample_style(config: SynthesisConfig, library, rng: np.random.Generator) -> TextStyle:
    """Draw a style: uniform font, uniform integer height, uniform rotation."""
    font_id = int(rng.integers(len(library)))
    lo, hi = config.height_range
    pixel_height = int(rng.integers(lo, hi + 1))
    rlo, rhi = config.rotation_range
    rotation = float(rng.uniform(rlo, rhi))
    return TextStyle(font_id=font_id, pixel_height=pixel_height, rotation_deg=rotation)


class StageTimer:
    """Accumulates per-stage wall time and per-instance latency (seconds)."""

    def __init__(self) -> None:
        self.totals: dict[str, float] = {}
        self.instance_seconds: list[float] = []

    @contextmanager
    def stage(self, name: str):
        started = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] = self.totals.get(name, 0.0) + (time.perf_counter() - started)

    def instance(self, seconds: float) -> None:
        self.instance_seconds.append(seconds)


class _NullStageTimer(StageTimer):
    @contextmanager
    def stage(self, name: str):
        yield

    def instance(self, seconds: float) -> None:
        pass


_NULL_TIMER = _NullStageTimer()
