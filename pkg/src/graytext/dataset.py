"""Dataset directory layout, annotation records, manifest.

Layout under the output directory:

    meta.json                    run manifest (config, asset digests, counts)
    labels.jsonl                 one JSON record per image, in index order
    images/00000000.png          lossless PNG per image
    analysis/00000000_0.csv      optional per-instance histogram dumps

Annotation records and label lines are built deterministically (fixed key
order, plain json floats), so identical runs produce byte-identical files.
"""

from __future__ import annotations

import io
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .analysis import GRAY_LEVELS
from .errors import DatasetError
from .pipeline import TextInstance

IMAGES_DIR = "images"
ANALYSIS_DIR = "analysis"
LABELS_NAME = "labels.jsonl"
META_NAME = "meta.json"


def image_name(index: int) -> str:
    return f"{index:08d}.png"


def analysis_name(index: int, instance_index: int) -> str:
    return f"{index:08d}_{instance_index}.csv"


def encode_png(image: np.ndarray) -> bytes:
    """Encode a (H, W) or (H, W, 3) uint8 array as PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(image).save(buf, format="PNG")
    return buf.getvalue()


def instance_record(instance: TextInstance) -> dict:
    """JSON-safe projection of one rendered word.

    Carries everything needed to re-derive the mask geometry offline
    (font_id + pixel_height + rotation_deg + placement), which is how
    datasets get re-checked without access to the original run.
    """
    return {
        "word": instance.word,
        "font_id": instance.style.font_id,
        "pixel_height": instance.style.pixel_height,
        "rotation_deg": instance.style.rotation_deg,
        "x": instance.placement.x,
        "y": instance.placement.y,
        "quad": [[float(px), float(py)] for px, py in instance.quad],
        "bbox": [float(v) for v in instance.bbox],
        "chosen_gray": instance.chosen_gray,
        "candidate_count": instance.candidate_count,
        "retries_used": instance.retries_used,
    }


def build_record(index: int, image: np.ndarray, instances: list[TextInstance]) -> dict:
    height, width = image.shape[:2]
    return {
        "image": image_name(index),
        "width": int(width),
        "height": int(height),
        "instances": [instance_record(inst) for inst in instances],
    }


def label_line(record: dict) -> bytes:
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False).encode("utf-8") + b"\n"


def analysis_csv(instance: TextInstance) -> str:
    """256-row CSV of the histogram the placement was approved against."""
    if instance.analysis is None:
        raise ValueError("instance carries no analysis data")
    bins = instance.analysis.histogram.bins
    candidate = np.zeros(GRAY_LEVELS, dtype=bool)
    candidate[instance.analysis.candidates] = True
    lines = ["gray,count,is_candidate"]
    lines.extend(f"{g},{int(bins[g])},{int(candidate[g])}" for g in range(GRAY_LEVELS))
    return "\n".join(lines) + "\n"


def write_sample(
    out_dir: str | Path,
    index: int,
    image: np.ndarray,
    instances: list[TextInstance],
    emit_analysis: bool = False,
) -> dict:
    """Write one image (and optional analysis CSVs); return its label record.

    The caller owns labels.jsonl, appending records in index order.
    """
    out_dir = Path(out_dir)
    (out_dir / IMAGES_DIR).mkdir(parents=True, exist_ok=True)
    (out_dir / IMAGES_DIR / image_name(index)).write_bytes(encode_png(image))
    if emit_analysis:
        adir = out_dir / ANALYSIS_DIR
        adir.mkdir(parents=True, exist_ok=True)
        for k, inst in enumerate(instances):
            (adir / analysis_name(index, k)).write_text(analysis_csv(inst), "utf-8")
    return build_record(index, image, instances)


def write_labels(out_dir: str | Path, lines: list[bytes]) -> Path:
    path = Path(out_dir) / LABELS_NAME
    with open(path, "wb") as fh:
        for line in lines:
            fh.write(line)
    return path


def build_manifest(config, assets: dict, counts: dict) -> dict:
    """Assemble the run manifest. Everything but created_at is deterministic."""
    return {
        "tool": "graytext",
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config": {
            "seed": config.seed,
            "words_per_image": config.words_per_image,
            "max_retries": config.max_retries,
            "vertical_fraction": config.thresholds.vertical_fraction,
            "min_margin": config.thresholds.min_margin,
            "height_range": list(config.height_range),
            "rotation_range": list(config.rotation_range),
            "alpha_blend": config.alpha_blend,
        },
        "assets": assets,
        "counts": counts,
        "decisions": {
            "grayscale": "floor((r+g+b)/3)",
            "border_radius": 2,
            "structuring_element": "square",
            "binarize_coverage": 0.5,
            "rotation_resampling": "nearest",
            "compositing": "coverage_blend" if config.alpha_blend else "hard",
            "analysis_state": "composited",
            "placement": "uniform_in_bounds",
            "rng": "pcg64(seed, image_index)",
        },
    }


def write_manifest(out_dir: str | Path, manifest: dict) -> Path:
    path = Path(out_dir) / META_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n", "utf-8")
    return path


def read_manifest(root: str | Path) -> dict:
    path = Path(root) / META_NAME
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read manifest: {exc}", file=str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"manifest is not valid JSON: {exc}", file=str(path)) from exc


def iter_labels(root: str | Path):
    """Yield (line_number, record) from labels.jsonl; raise DatasetError on junk."""
    path = Path(root) / LABELS_NAME
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield line_no, json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DatasetError(
                        f"label line is not valid JSON: {exc}", file=str(path), line=line_no
                    ) from exc
    except OSError as exc:
        raise DatasetError(f"cannot read labels: {exc}", file=str(path)) from exc
