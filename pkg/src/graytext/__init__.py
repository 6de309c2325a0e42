"""Scene-text synthesis with histogram-margin gray selection.

Renders words onto background images at gray levels chosen so the text stays
clearly distinguishable from the pixels around it: the ring around each
placement is histogrammed, used gray levels and a safety margin around the
edges of their runs are removed, and the text gray is drawn uniformly from
what remains. Placements without usable grays are retried and eventually
abandoned rather than rendered illegibly.
"""

__version__ = "0.1.0"

from .analysis import (
    GRAY_LEVELS,
    AnalysisThresholds,
    GrayHistogram,
    candidate_oracle,
    design_colors,
    edge_colors,
    histogram_from_samples,
    unused_grays,
)
from .assets import (
    BackgroundPool,
    FontLibrary,
    WordCorpus,
    load_backgrounds,
    load_corpus,
    load_fonts,
)
from .glyphs import BORDER_RADIUS, GlyphMask, TextStyle, border_of, dilate, rasterize
from .pipeline import (
    Abandoned,
    Placement,
    SynthesisConfig,
    TextInstance,
    composite,
    image_rng,
    pick_color,
    sample_border_grays,
    synthesize_image,
    to_gray,
    try_place,
)
from .dataset import write_manifest, write_sample
from .validation import validate_dataset

__all__ = [
    "__version__",
    "GRAY_LEVELS",
    "AnalysisThresholds",
    "GrayHistogram",
    "candidate_oracle",
    "design_colors",
    "edge_colors",
    "histogram_from_samples",
    "unused_grays",
    "BackgroundPool",
    "FontLibrary",
    "WordCorpus",
    "load_backgrounds",
    "load_corpus",
    "load_fonts",
    "BORDER_RADIUS",
    "GlyphMask",
    "TextStyle",
    "border_of",
    "dilate",
    "rasterize",
    "Abandoned",
    "Placement",
    "SynthesisConfig",
    "TextInstance",
    "composite",
    "image_rng",
    "pick_color",
    "sample_border_grays",
    "synthesize_image",
    "to_gray",
    "try_place",
    "write_manifest",
    "write_sample",
    "validate_dataset",
]
