"""Generate-run execution, serial or multi-process.

Every image draws from its own RNG stream keyed by (seed, image index), and
workers run the exact same per-index function the serial path runs, so the
output bytes do not depend on the job count or on scheduling order.
"""

from __future__ import annotations

import logging
import multiprocessing
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .assets import load_backgrounds, load_corpus, load_fonts
from .analysis import AnalysisThresholds
from .dataset import (
    ANALYSIS_DIR,
    IMAGES_DIR,
    analysis_csv,
    analysis_name,
    build_manifest,
    build_record,
    encode_png,
    image_name,
    label_line,
    write_labels,
    write_manifest,
)
from .pipeline import SynthesisConfig, image_rng, synthesize_image

logger = logging.getLogger(__name__)


@dataclass
class GenerateOptions:
    """Merged CLI/config-file options for one generate (or bench) run."""

    backgrounds: str
    fonts: str
    corpus: str
    count: int
    out: str | None = None
    words_per_image: int = 1
    seed: int = 0
    min_margin: int = 16
    vertical_thresh: float = 0.0
    max_retries: int = 20
    min_height: int = 16
    max_height: int = 64
    min_rotation: float = -15.0
    max_rotation: float = 15.0
    emit_analysis: bool = False
    alpha_blend: bool = False
    jobs: int = 1

    def synthesis_config(self) -> SynthesisConfig:
        return SynthesisConfig(
            thresholds=AnalysisThresholds(
                vertical_fraction=self.vertical_thresh, min_margin=self.min_margin
            ),
            max_retries=self.max_retries,
            words_per_image=self.words_per_image,
            height_range=(self.min_height, self.max_height),
            rotation_range=(self.min_rotation, self.max_rotation),
            seed=self.seed,
            alpha_blend=self.alpha_blend,
        )


# Per-process synthesis context (assets + config), set up once per worker.
_WORKER: dict = {}


def _init_worker(opts_dict: dict) -> None:
    opts = GenerateOptions(**opts_dict)
    _WORKER["opts"] = opts
    _WORKER["config"] = opts.synthesis_config()
    _WORKER["library"] = load_fonts(opts.fonts)
    _WORKER["pool"] = load_backgrounds(opts.backgrounds)
    _WORKER["corpus"] = load_corpus(opts.corpus)


def _render_index(index: int):
    """Synthesize image ``index`` from scratch; returns everything to persist.

    Draw order from the per-image stream: background, then the word indices,
    then (inside the pipeline) per-word style, placements, and gray.
    """
    opts = _WORKER["opts"]
    config = _WORKER["config"]
    pool = _WORKER["pool"]
    corpus = _WORKER["corpus"]
    rng = image_rng(config.seed, index)
    background = pool.pixels(int(rng.integers(len(pool))))
    words = [
        corpus.words[int(rng.integers(len(corpus)))] for _ in range(config.words_per_image)
    ]
    image, instances, abandoned = synthesize_image(
        background, words, _WORKER["library"], config, rng
    )
    record = build_record(index, image, instances)
    csvs = (
        [(k, analysis_csv(inst)) for k, inst in enumerate(instances)]
        if opts.emit_analysis
        else []
    )
    return index, encode_png(image), label_line(record), csvs, len(instances), abandoned


def run_generate(opts: GenerateOptions) -> dict:
    """Execute a full generate run; returns a summary dict for the CLI."""
    if opts.count < 1:
        raise ValueError(f"count must be >= 1, got {opts.count}")
    if opts.jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {opts.jobs}")
    if opts.out is None:
        raise ValueError("an output directory is required")
    config = opts.synthesis_config()

    out = Path(opts.out)
    images_dir = out / IMAGES_DIR
    images_dir.mkdir(parents=True, exist_ok=True)
    stale = sorted(images_dir.glob("*.png"))
    if stale:
        raise ValueError(
            f"output directory already holds {len(stale)} generated image(s); "
            "write each run into a fresh directory"
        )
    if opts.emit_analysis:
        (out / ANALYSIS_DIR).mkdir(parents=True, exist_ok=True)

    # Load assets in the parent regardless of job count: digests go into the
    # manifest, and a broken corpus should fail before any worker spawns.
    library = load_fonts(opts.fonts)
    pool = load_backgrounds(opts.backgrounds)
    corpus = load_corpus(opts.corpus)

    started = time.perf_counter()
    lines: list[bytes] = []
    total_instances = 0
    total_abandoned = 0
    for index, png, line, csvs, n_instances, n_abandoned in _iter_results(opts):
        (images_dir / image_name(index)).write_bytes(png)
        for k, text in csvs:
            (out / ANALYSIS_DIR / analysis_name(index, k)).write_text(text, "utf-8")
        lines.append(line)
        total_instances += n_instances
        total_abandoned += n_abandoned
    write_labels(out, lines)
    elapsed = time.perf_counter() - started

    manifest = build_manifest(
        config,
        assets={
            "fonts": {
                "path": str(opts.fonts),
                "count": len(library),
                "digest": library.digest(),
            },
            "backgrounds": {
                "path": str(opts.backgrounds),
                "count": len(pool),
                "digest": pool.digest(),
            },
            "corpus": {
                "path": str(opts.corpus),
                "count": len(corpus),
                "digest": corpus.digest(),
            },
        },
        counts={
            "images": opts.count,
            "instances": total_instances,
            "abandoned": total_abandoned,
        },
    )
    write_manifest(out, manifest)
    logger.info(
        "generated %d images / %d instances (%d abandoned) in %.2fs",
        opts.count, total_instances, total_abandoned, elapsed,
    )
    return {
        "images": opts.count,
        "instances": total_instances,
        "abandoned": total_abandoned,
        "elapsed_s": elapsed,
        "out": str(out),
    }


def _iter_results(opts: GenerateOptions):
    """Yield per-index render results in index order, serial or pooled."""
    opts_dict = asdict(opts)
    if opts.jobs <= 1:
        _init_worker(opts_dict)
        for index in range(opts.count):
            yield _render_index(index)
        return
    # Platform-default start method. Workers rebuild their own context via the
    # initializer, so nothing depends on what fork may or may not inherit.
    chunksize = max(1, min(16, opts.count // (opts.jobs * 4) or 1))
    with multiprocessing.Pool(opts.jobs, initializer=_init_worker, initargs=(opts_dict,)) as pool:
        yield from pool.imap(_render_index, range(opts.count), chunksize=chunksize)
