"""Word rasterization and binary-mask morphology.

A word becomes a tight binary mask (ink = True) plus the antialiased coverage
it was cut from and the four corners of its rotated word box. Rotation uses
our own nearest-neighbor resampler so the annotated quad and the raster are
exactly consistent, independent of any image library's resampling behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from PIL import Image, ImageDraw

from .errors import MissingGlyph, ZeroArea

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .assets import FontLibrary

# A mask bit is set when antialiased coverage exceeds half.
BINARIZE_COVERAGE = 0.5
# Radius (Chebyshev) of the ring sampled around text before placement.
BORDER_RADIUS = 2


@dataclass(frozen=True)
class TextStyle:
    """How a word is drawn: which font, how tall, how tilted.

    pixel_height is the nominal em size handed to the font engine; the tight
    ink mask is usually a little shorter or taller depending on ascenders and
    descenders.
    """

    font_id: int
    pixel_height: int
    rotation_deg: float = 0.0


@dataclass
class GlyphMask:
    """Tight binary raster of a (possibly rotated) word.

    Attributes:
        bits: bool array, True where ink coverage exceeds one half. Tight:
            the first/last row and column each contain at least one True.
        coverage: uint8 antialiased coverage in [0, 255], same shape as and
            aligned with ``bits``.
        quad: (4, 2) float corners of the rotated word box in mask
            coordinates, ordered top-left, top-right, bottom-right,
            bottom-left of the unrotated box. Corners may poke slightly
            outside the tight raster when the rotated box's empty corners
            were cropped away.
    """

    bits: np.ndarray
    coverage: np.ndarray
    quad: np.ndarray = field(repr=False)

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])


def rasterize(word: str, style: TextStyle, library: "FontLibrary") -> GlyphMask:
    """Render a word to a tight binary mask in the given style.

    Antialiased coverage is binarized at one-half; nonzero rotation resamples
    the mask nearest-neighbor and re-crops tight.

    Raises:
        MissingGlyph: the font cannot shape one or more characters.
        ZeroArea: the word produced no ink (empty/whitespace-only).
    """
    if not word:
        raise ZeroArea("cannot rasterize an empty word")
    unsupported = library.unsupported_chars(style.font_id, word)
    if unsupported:
        raise MissingGlyph(
            f"font {library.describe(style.font_id)} has no glyph for "
            f"{', '.join(repr(c) for c in sorted(unsupported))}"
        )
    face = library.face(style.font_id, style.pixel_height)

    x0, y0, x1, y1 = face.getbbox(word)
    w, h = x1 - x0, y1 - y0
    if w <= 0 or h <= 0:
        raise ZeroArea(f"word {word!r} has no ink at height {style.pixel_height}")
    # one pixel of slack on every side; hinting can spill past the metrics box
    img = Image.new("L", (w + 2, h + 2), 0)
    ImageDraw.Draw(img).text((1 - x0, 1 - y0), word, font=face, fill=255)
    coverage = np.asarray(img)
    bits = coverage > int(255 * BINARIZE_COVERAGE)
    if not bits.any():
        raise ZeroArea(f"word {word!r} has no ink at height {style.pixel_height}")

    bits, coverage = _tight_crop(bits, coverage)
    mask_h, mask_w = bits.shape
    quad = np.array(
        [(0.0, 0.0), (mask_w, 0.0), (mask_w, mask_h), (0.0, mask_h)], dtype=np.float64
    )

    deg = float(style.rotation_deg) % 360.0
    if deg != 0.0:
        bits, coverage, quad = _rotate_nearest(bits, coverage, deg)
        if not bits.any():
            raise ZeroArea(f"word {word!r} lost all ink when rotated {style.rotation_deg} deg")
        bits, coverage, offset = _tight_crop(bits, coverage, return_offset=True)
        quad = quad - offset
    return GlyphMask(bits=bits, coverage=coverage, quad=quad)


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Dilate a binary mask with a square (Chebyshev) structuring element.

    The canvas grows by ``radius`` on every side, so output pixel (x, y) is
    True iff some input pixel within Chebyshev distance ``radius`` of
    (x - radius, y - radius) is True. Nothing is ever clipped.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    out = np.zeros((h + 2 * radius, w + 2 * radius), dtype=bool)
    for dy in range(2 * radius + 1):
        for dx in range(2 * radius + 1):
            out[dy : dy + h, dx : dx + w] |= mask
    return out


def border_of(mask: np.ndarray, radius: int = BORDER_RADIUS) -> np.ndarray:
    """Ring around the ink: the dilation minus the ink itself.

    Same canvas as :func:`dilate`; disjoint from the (recentered) input, and
    their union is exactly the dilation.
    """
    return ring_from_dilated(dilate(mask, radius), mask, radius)


def ring_from_dilated(dilated: np.ndarray, mask: np.ndarray, radius: int) -> np.ndarray:
    """border_of when the dilation is already at hand (hot path helper)."""
    inner = np.zeros_like(dilated)
    inner[radius : radius + mask.shape[0], radius : radius + mask.shape[1]] = mask
    return dilated & ~inner


def _tight_crop(bits, coverage, return_offset=False):
    rows = np.flatnonzero(bits.any(axis=1))
    cols = np.flatnonzero(bits.any(axis=0))
    r0, r1 = rows[0], rows[-1] + 1
    c0, c1 = cols[0], cols[-1] + 1
    if return_offset:
        return bits[r0:r1, c0:c1], coverage[r0:r1, c0:c1], np.array([c0, r0], dtype=np.float64)
    return bits[r0:r1, c0:c1], coverage[r0:r1, c0:c1]


def _rotate_nearest(bits, coverage, deg):
    """Rotate rasters by ``deg`` (visually counterclockwise, y-down coords).

    Nearest-neighbor inverse mapping on an expanded canvas; returns the
    rotated rasters plus the forward-mapped corner quad of the input box.
    """
    theta = math.radians(deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    h, w = bits.shape
    center = np.array([w / 2.0, h / 2.0])

    corners = np.array([(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)], dtype=np.float64)
    # forward map, y-down screen coords: (x, y) -> (c*x + s*y, -s*x + c*y)
    fwd = np.array([[cos_t, -sin_t], [sin_t, cos_t]])  # row-vector form
    rotated = (corners - center) @ fwd
    lo = rotated.min(axis=0)
    hi = rotated.max(axis=0)
    out_w = max(1, int(math.ceil(hi[0] - lo[0] - 1e-9)))
    out_h = max(1, int(math.ceil(hi[1] - lo[1] - 1e-9)))
    quad = rotated - lo

    # inverse map of every output pixel center back into the source
    xs = np.arange(out_w, dtype=np.float64) + 0.5 + lo[0]
    ys = np.arange(out_h, dtype=np.float64) + 0.5 + lo[1]
    gx, gy = np.meshgrid(xs, ys)
    src_x = np.floor(cos_t * gx - sin_t * gy + center[0]).astype(np.intp)
    src_y = np.floor(sin_t * gx + cos_t * gy + center[1]).astype(np.intp)
    valid = (src_x >= 0) & (src_x < w) & (src_y >= 0) & (src_y < h)
    src_x = np.clip(src_x, 0, w - 1)
    src_y = np.clip(src_y, 0, h - 1)

    out_bits = np.where(valid, bits[src_y, src_x], False)
    out_cov = np.where(valid, coverage[src_y, src_x], 0).astype(np.uint8)
    return out_bits, out_cov, quad
