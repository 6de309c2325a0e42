"""Command-line interface.

Subcommands:
    generate   synthesize a labeled dataset
    analyze    inspect the gray analysis for one word on one image
    bench      measure single-threaded synthesis throughput
    validate   re-check a generated dataset against its guarantees

Exit codes: 0 success, 1 bad configuration or input validation, 2 broken
invariant (failed validation, no candidate grays), 3 I/O trouble.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import __version__
from .analysis import (
    GRAY_LEVELS,
    AnalysisThresholds,
    design_colors,
    edge_colors,
    unused_grays,
)
from .assets import FontEntry, FontLibrary
from .bench import run_bench
from .errors import DatasetError, GraytextError
from .glyphs import BORDER_RADIUS, TextStyle, dilate, rasterize, ring_from_dilated
from .pipeline import Placement, image_rng, sample_border_grays
from .runner import GenerateOptions, run_generate
from .validation import validate_dataset

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_IO = 3

# Hard defaults for everything a config file may also set; flag > file > this.
_OPTION_DEFAULTS = {
    "backgrounds": None,
    "fonts": None,
    "corpus": None,
    "out": None,
    "count": None,
    "words_per_image": 1,
    "seed": 0,
    "min_margin": 16,
    "vertical_thresh": 0.0,
    "max_retries": 20,
    "min_height": 16,
    "max_height": 64,
    "min_rotation": -15.0,
    "max_rotation": 15.0,
    "emit_analysis": False,
    "alpha_blend": False,
    "jobs": 1,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; here that code means a broken
    invariant, so usage problems are remapped to the config exit."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GraytextError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graytext", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"graytext {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="synthesize a labeled dataset")
    _add_run_arguments(gen)
    gen.add_argument("--out", type=Path, default=None, help="output dataset directory")
    gen.add_argument(
        "--emit-analysis",
        action="store_const", const=True, default=None,
        help="also write per-instance histogram CSVs under analysis/",
    )
    gen.add_argument(
        "--jobs", type=int, default=None,
        help="worker processes (default 1; output bytes are identical either way)",
    )
    gen.set_defaults(func=cmd_generate)

    ana = sub.add_parser("analyze", help="inspect the gray analysis for one placement")
    ana.add_argument("--image", type=Path, required=True, help="background image to analyze")
    ana.add_argument("--word", required=True, help="word whose footprint is analyzed")
    ana.add_argument("--font-file", type=Path, required=True, help="TTF/OTF to render with")
    ana.add_argument("--x", type=int, default=None, help="placement x (with --y)")
    ana.add_argument("--y", type=int, default=None, help="placement y (with --x)")
    ana.add_argument("--height", type=int, default=32, help="pixel height (default 32)")
    ana.add_argument("--rotation", type=float, default=0.0, help="rotation degrees (default 0)")
    ana.add_argument("--seed", type=int, default=0, help="seed for the random placement")
    ana.add_argument("--min-margin", type=int, default=16)
    ana.add_argument("--vertical-thresh", type=float, default=0.0)
    ana.add_argument("--out", type=Path, default=None, help="write CSV here instead of stdout")
    ana.set_defaults(func=cmd_analyze)

    ben = sub.add_parser("bench", help="measure single-threaded throughput")
    _add_run_arguments(ben)
    ben.set_defaults(func=cmd_bench)

    val = sub.add_parser("validate", help="re-check a generated dataset")
    val.add_argument("--dataset", type=Path, required=True, help="dataset directory")
    val.add_argument(
        "--fonts", type=Path, default=None,
        help="font directory override (defaults to the one recorded in meta.json)",
    )
    val.set_defaults(func=cmd_validate)
    return parser


def _add_run_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backgrounds", type=Path, default=None, help="background image directory")
    p.add_argument("--fonts", type=Path, default=None, help="font directory")
    p.add_argument("--corpus", type=Path, default=None, help="newline-delimited word list")
    p.add_argument("--count", type=int, default=None, help="number of images to synthesize")
    p.add_argument("--words-per-image", type=int, default=None, help="words per image (default 1)")
    p.add_argument("--seed", type=int, default=None, help="base RNG seed (default 0)")
    p.add_argument("--min-margin", type=int, default=None, help="gray-level margin (default 16)")
    p.add_argument(
        "--vertical-thresh", type=float, default=None,
        help="used-level frequency fraction (default 0.0)",
    )
    p.add_argument(
        "--max-retries", type=int, default=None,
        help="placement rounds before a word is abandoned (default 20)",
    )
    p.add_argument("--min-height", type=int, default=None, help="min pixel height (default 16)")
    p.add_argument("--max-height", type=int, default=None, help="max pixel height (default 64)")
    p.add_argument(
        "--min-rotation", type=float, default=None, help="min rotation degrees (default -15)"
    )
    p.add_argument(
        "--max-rotation", type=float, default=None, help="max rotation degrees (default 15)"
    )
    p.add_argument(
        "--alpha-blend",
        action="store_const", const=True, default=None,
        help="blend ink by antialiased coverage instead of hard compositing",
    )
    p.add_argument(
        "--config", type=Path, default=None,
        help="JSON file holding any of these options (explicit flags win)",
    )


def _merge_options(args: argparse.Namespace, required: tuple[str, ...]) -> dict:
    merged = dict(_OPTION_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text("utf-8"))
        except OSError as exc:
            raise ValueError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(loaded) - set(_OPTION_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(loaded)
    for key in _OPTION_DEFAULTS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    missing = [key for key in required if merged.get(key) is None]
    if missing:
        raise ValueError(
            "missing required option(s): " + ", ".join(f"--{m.replace('_', '-')}" for m in missing)
        )
    for key in ("backgrounds", "fonts", "corpus", "out"):
        if merged.get(key) is not None:
            merged[key] = str(merged[key])
    return merged


def cmd_generate(args: argparse.Namespace) -> int:
    merged = _merge_options(args, required=("backgrounds", "fonts", "corpus", "out", "count"))
    opts = GenerateOptions(**merged)
    summary = run_generate(opts)
    rate = summary["instances"] / summary["elapsed_s"] if summary["elapsed_s"] > 0 else 0.0
    print(
        f"generated {summary['images']} images, {summary['instances']} instances "
        f"({summary['abandoned']} abandoned) in {summary['elapsed_s']:.2f}s "
        f"({rate:.1f} instances/s)"
    )
    print(f"dataset: {summary['out']}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    if (args.x is None) != (args.y is None):
        raise ValueError("--x and --y must be given together (or both omitted)")
    thresholds = AnalysisThresholds(
        vertical_fraction=args.vertical_thresh, min_margin=args.min_margin
    )
    try:
        with Image.open(args.image) as img:
            if img.mode == "L":
                state = np.asarray(img, dtype=np.uint8)
            else:
                state = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ValueError(f"cannot decode image: {exc}") from exc

    library = FontLibrary(
        [FontEntry(font_id=0, path=Path(args.font_file), family=Path(args.font_file).stem)]
    )
    style = TextStyle(font_id=0, pixel_height=args.height, rotation_deg=args.rotation)
    glyph = rasterize(args.word, style, library)
    dilated = dilate(glyph.bits, BORDER_RADIUS)
    border = ring_from_dilated(dilated, glyph.bits, BORDER_RADIUS)

    img_h, img_w = state.shape[:2]
    dil_h, dil_w = dilated.shape
    if args.x is not None:
        placement = Placement(x=args.x, y=args.y)
    else:
        x_hi, y_hi = img_w - dil_w, img_h - dil_h
        if x_hi < 0 or y_hi < 0:
            raise ValueError(
                f"word footprint {dil_w}x{dil_h} does not fit in the {img_w}x{img_h} image"
            )
        rng = image_rng(args.seed, 0)
        placement = Placement(
            x=int(rng.integers(0, x_hi + 1)), y=int(rng.integers(0, y_hi + 1))
        )
    hist = sample_border_grays(state, placement, border)
    unused = unused_grays(hist, thresholds)
    edges = edge_colors(unused)
    candidates = design_colors(hist, thresholds)

    rows = _analysis_rows(hist.bins, unused, edges, candidates)
    if args.out is not None:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(rows)
    else:
        csv.writer(sys.stdout).writerows(rows)
    print(
        f"placement x={placement.x} y={placement.y} | ring {dil_w}x{dil_h} | "
        f"{hist.total()} ring pixels | {len(unused)} unused, {len(edges)} edges, "
        f"{len(candidates)} candidates",
        file=sys.stderr,
    )
    if len(candidates) == 0:
        print("no candidate gray levels at this placement", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _analysis_rows(bins, unused, edges, candidates):
    unused_f = np.zeros(GRAY_LEVELS, dtype=int)
    unused_f[unused] = 1
    edge_f = np.zeros(GRAY_LEVELS, dtype=int)
    edge_f[edges] = 1
    cand_f = np.zeros(GRAY_LEVELS, dtype=int)
    cand_f[candidates] = 1
    rows = [["gray", "count", "is_unused", "is_edge", "is_candidate"]]
    rows.extend(
        [g, int(bins[g]), int(unused_f[g]), int(edge_f[g]), int(cand_f[g])]
        for g in range(GRAY_LEVELS)
    )
    return rows


def cmd_bench(args: argparse.Namespace) -> int:
    merged = _merge_options(args, required=("backgrounds", "fonts", "corpus", "count"))
    merged.pop("out", None)
    merged.pop("emit_analysis", None)
    merged.pop("jobs", None)
    stats = run_bench(GenerateOptions(**merged))
    for line in stats.lines():
        print(line)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = validate_dataset(args.dataset, fonts_dir=args.fonts)
    for issue in report.issues:
        print(str(issue), file=sys.stderr)
    status = "ok"
    code = EXIT_OK
    if report.violations:
        status, code = "INVARIANT VIOLATIONS", EXIT_INVARIANT
    if report.corrupt:
        status, code = "CORRUPT", EXIT_IO
    note = f", {report.unverifiable} ring(s) unverifiable" if report.unverifiable else ""
    print(
        f"validate: {report.images} images, {report.instances} instances, "
        f"{len(report.violations)} violation(s), {len(report.corrupt)} corrupt file(s)"
        f"{note} -> {status}"
    )
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
