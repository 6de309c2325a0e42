"""Offline dataset validation.

Re-derives every instance's mask geometry from its annotation (word, font,
height, rotation, placement), re-samples the border ring from the persisted
PNG, and re-checks the contrast guarantee: the chosen gray differs by more
than ``min_margin`` from every gray level used in the ring at render time.

Pixels whose render-time value is unrecoverable from the final image are
excluded before the check: ink of instances rendered *later* (it overwrote
the ring), and — for alpha-blended datasets — any pixel a later instance's
antialiasing touched, plus the instance's own fringe. Exclusion can only
shrink the recomputed used set, so the check never passes spuriously; for
the default single-word hard-compositing datasets nothing is excluded and
the recheck is bit-exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .analysis import AnalysisThresholds, histogram_from_samples
from .assets import FontLibrary, load_fonts
from .dataset import IMAGES_DIR, iter_labels, read_manifest
from .errors import DatasetError, GraytextError
from .glyphs import BORDER_RADIUS, TextStyle, dilate, rasterize, ring_from_dilated
from .pipeline import to_gray

logger = logging.getLogger(__name__)

_EPS = 1e-6


@dataclass
class Issue:
    severity: str  # "corrupt" (unreadable data) or "violation" (broken invariant)
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.where}: {self.message}"


@dataclass
class Report:
    images: int = 0
    instances: int = 0
    unverifiable: int = 0
    issues: list[Issue] = field(default_factory=list)

    @property
    def corrupt(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "corrupt"]

    @property
    def violations(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "violation"]

    @property
    def ok(self) -> bool:
        return not self.issues


def validate_dataset(root: str | Path, fonts_dir: str | Path | None = None) -> Report:
    """Validate a generated dataset directory end to end.

    Args:
        root: dataset directory (holds meta.json, labels.jsonl, images/).
        fonts_dir: override for the font directory recorded in the manifest
            (needed when the dataset moved relative to its assets).

    Raises:
        DatasetError: manifest or labels are missing/unreadable, or the font
            directory cannot be loaded at all.
    """
    root = Path(root)
    report = Report()
    manifest = read_manifest(root)
    config = manifest.get("config", {})
    thresholds = AnalysisThresholds(
        vertical_fraction=float(config.get("vertical_fraction", 0.0)),
        min_margin=int(config.get("min_margin", 16)),
    )
    alpha_blend = bool(config.get("alpha_blend", False))
    max_retries = int(config.get("max_retries", 20))

    fonts_path = Path(fonts_dir) if fonts_dir else Path(manifest["assets"]["fonts"]["path"])
    try:
        library = load_fonts(fonts_path)
    except (OSError, GraytextError) as exc:
        raise DatasetError(
            f"cannot load fonts to re-derive masks ({exc}); pass an explicit font directory",
            file=str(fonts_path),
        ) from exc
    recorded_digest = manifest.get("assets", {}).get("fonts", {}).get("digest")
    if recorded_digest and library.digest() != recorded_digest:
        logger.warning(
            "font directory digest differs from the manifest; re-derived masks may disagree"
        )

    labels_file = str(root / "labels.jsonl")
    seen_images = 0
    seen_instances = 0
    for line_no, record in iter_labels(root):
        seen_images += 1
        where = f"{labels_file}:{line_no}"
        image = _load_image(root, record, where, report)
        if image is None:
            continue
        seen_instances += _check_image(
            record, image, library, thresholds, alpha_blend, max_retries, where, report
        )

    report.images = seen_images
    report.instances = seen_instances
    _check_counts(root, manifest, seen_images, seen_instances, report)
    return report


def _load_image(root: Path, record: dict, where: str, report: Report):
    name = record.get("image")
    if not isinstance(name, str):
        report.issues.append(Issue("corrupt", where, "record has no image name"))
        return None
    path = root / IMAGES_DIR / name
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                pixels = np.asarray(img, dtype=np.uint8)
            else:
                pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        report.issues.append(Issue("corrupt", str(path), f"image unreadable: {exc}"))
        return None
    height, width = pixels.shape[:2]
    if width != record.get("width") or height != record.get("height"):
        report.issues.append(
            Issue(
                "violation",
                where,
                f"image is {width}x{height} but the record says "
                f"{record.get('width')}x{record.get('height')}",
            )
        )
    return pixels


def _check_image(
    record, image, library, thresholds, alpha_blend, max_retries, where, report
) -> int:
    img_h, img_w = image.shape[:2]
    instances = record.get("instances", [])
    if not isinstance(instances, list):
        report.issues.append(Issue("corrupt", where, "instances is not a list"))
        return 0

    derived = []
    for k, inst in enumerate(instances):
        iwhere = f"{where} instance {k}"
        geom = _derive_geometry(inst, library, iwhere, report)
        derived.append(geom)
        _check_fields(inst, geom, img_w, img_h, max_retries, iwhere, report)

    # Pixels perturbed after each instance's ring was sampled, accumulated
    # back to front: later ink (hard) or anything later antialiasing touched.
    perturbed_after = [np.zeros((img_h, img_w), dtype=bool) for _ in instances]
    running = np.zeros((img_h, img_w), dtype=bool)
    for k in range(len(instances) - 1, -1, -1):
        perturbed_after[k] = running.copy()
        geom = derived[k]
        if geom is not None:
            running |= _paint(
                geom["coverage"] > 0 if alpha_blend else geom["bits"],
                geom["ink_origin"],
                img_h,
                img_w,
            )

    verified = 0
    for k, inst in enumerate(instances):
        geom = derived[k]
        if geom is None:
            continue
        iwhere = f"{where} instance {k}"
        _check_contrast(
            inst, geom, image, perturbed_after[k], thresholds, alpha_blend, iwhere, report
        )
        verified += 1
    return len(instances)


def _derive_geometry(inst, library, iwhere, report):
    try:
        style = TextStyle(
            font_id=int(inst["font_id"]),
            pixel_height=int(inst["pixel_height"]),
            rotation_deg=float(inst["rotation_deg"]),
        )
        x, y = int(inst["x"]), int(inst["y"])
        word = inst["word"]
    except (KeyError, TypeError, ValueError) as exc:
        report.issues.append(Issue("corrupt", iwhere, f"missing or malformed field: {exc}"))
        return None
    if not 0 <= style.font_id < len(library):
        report.issues.append(
            Issue("violation", iwhere, f"font_id {style.font_id} outside the library")
        )
        return None
    try:
        glyph = rasterize(word, style, library)
    except GraytextError as exc:
        report.issues.append(Issue("violation", iwhere, f"cannot re-derive mask: {exc}"))
        return None
    dilated = dilate(glyph.bits, BORDER_RADIUS)
    border = ring_from_dilated(dilated, glyph.bits, BORDER_RADIUS)
    return {
        "glyph": glyph,
        "bits": glyph.bits,
        "coverage": glyph.coverage,
        "border": border,
        "dilated_shape": dilated.shape,
        "ring_origin": (x, y),
        "ink_origin": (x + BORDER_RADIUS, y + BORDER_RADIUS),
        "quad": glyph.quad + np.array([x + BORDER_RADIUS, y + BORDER_RADIUS], dtype=np.float64),
    }


def _check_fields(inst, geom, img_w, img_h, max_retries, iwhere, report):
    gray = inst.get("chosen_gray")
    if not isinstance(gray, int) or not 0 <= gray <= 255:
        report.issues.append(Issue("violation", iwhere, f"chosen_gray {gray!r} not in [0, 255]"))
    retries = inst.get("retries_used")
    if not isinstance(retries, int) or not 0 <= retries <= max_retries:
        report.issues.append(
            Issue("violation", iwhere, f"retries_used {retries!r} not in [0, {max_retries}]")
        )
    count = inst.get("candidate_count")
    if not isinstance(count, int) or count < 1:
        report.issues.append(Issue("violation", iwhere, f"candidate_count {count!r} < 1"))

    quad = np.asarray(inst.get("quad", []), dtype=np.float64)
    if quad.shape != (4, 2):
        report.issues.append(Issue("corrupt", iwhere, "quad is not 4 points"))
        return
    if (
        quad[:, 0].min() < -_EPS
        or quad[:, 1].min() < -_EPS
        or quad[:, 0].max() > img_w + _EPS
        or quad[:, 1].max() > img_h + _EPS
    ):
        report.issues.append(
            Issue("violation", iwhere, f"quad leaves the {img_w}x{img_h} image bounds")
        )
    bbox = inst.get("bbox")
    hull = [quad[:, 0].min(), quad[:, 1].min(), quad[:, 0].max(), quad[:, 1].max()]
    if bbox is None or len(bbox) != 4 or any(abs(a - b) > 1e-4 for a, b in zip(bbox, hull)):
        report.issues.append(Issue("violation", iwhere, "bbox is not the hull of quad"))
    if geom is not None:
        if not np.allclose(geom["quad"], quad, atol=1e-3):
            report.issues.append(
                Issue("violation", iwhere, "quad disagrees with re-derived mask geometry")
            )
        ring_h, ring_w = geom["dilated_shape"]
        x, y = geom["ring_origin"]
        if x < 0 or y < 0 or x + ring_w > img_w or y + ring_h > img_h:
            report.issues.append(
                Issue("violation", iwhere, "placement leaves the image bounds")
            )


def _check_contrast(inst, geom, image, perturbed, thresholds, alpha_blend, iwhere, report):
    gray = inst.get("chosen_gray")
    if not isinstance(gray, int):
        return
    x, y = geom["ring_origin"]
    ring_h, ring_w = geom["dilated_shape"]
    img_h, img_w = image.shape[:2]
    if x < 0 or y < 0 or x + ring_w > img_w or y + ring_h > img_h:
        return  # already reported as a bounds violation

    grays = to_gray(image[y : y + ring_h, x : x + ring_w])
    ring = geom["border"] & ~perturbed[y : y + ring_h, x : x + ring_w]
    if alpha_blend:
        fringe = np.zeros((ring_h, ring_w), dtype=bool)
        bits = geom["bits"]
        cov = geom["coverage"]
        fringe[
            BORDER_RADIUS : BORDER_RADIUS + bits.shape[0],
            BORDER_RADIUS : BORDER_RADIUS + bits.shape[1],
        ] = (cov > 0) & ~bits
        ring &= ~fringe
    if not ring.any():
        report.unverifiable += 1
        logger.info("%s: ring fully overwritten by later instances; cannot re-check", iwhere)
        return
    hist = histogram_from_samples(grays[ring])
    thresh = hist.bins.max() * thresholds.vertical_fraction
    used = np.flatnonzero(hist.bins > thresh)
    bad = used[np.abs(used - gray) <= thresholds.min_margin]
    if bad.size:
        report.issues.append(
            Issue(
                "violation",
                iwhere,
                f"contrast guarantee broken: chosen gray {gray} is within "
                f"{thresholds.min_margin} of used level(s) {bad.tolist()}",
            )
        )

    if not alpha_blend:
        ink = geom["bits"] & ~perturbed[
            y + BORDER_RADIUS : y + BORDER_RADIUS + geom["bits"].shape[0],
            x + BORDER_RADIUS : x + BORDER_RADIUS + geom["bits"].shape[1],
        ]
        if ink.any():
            body = image[
                y + BORDER_RADIUS : y + BORDER_RADIUS + ink.shape[0],
                x + BORDER_RADIUS : x + BORDER_RADIUS + ink.shape[1],
            ][ink]
            if not bool((body == gray).all()):
                report.issues.append(
                    Issue(
                        "violation",
                        iwhere,
                        f"ink pixels are not exactly gray {gray} (tampered or mis-written image)",
                    )
                )


def _paint(mask: np.ndarray, origin: tuple[int, int], img_h: int, img_w: int) -> np.ndarray:
    """Place a local mask onto a full-image canvas, clipping at the edges."""
    canvas = np.zeros((img_h, img_w), dtype=bool)
    x, y = origin
    h, w = mask.shape
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(img_w, x + w), min(img_h, y + h)
    if x0 < x1 and y0 < y1:
        canvas[y0:y1, x0:x1] = mask[y0 - y : y1 - y, x0 - x : x1 - x]
    return canvas


def _check_counts(root: Path, manifest: dict, images: int, instances: int, report: Report):
    pngs = len(list((root / IMAGES_DIR).glob("*.png"))) if (root / IMAGES_DIR).is_dir() else 0
    if pngs != images:
        report.issues.append(
            Issue(
                "violation",
                str(root),
                f"{images} label records but {pngs} PNG files under {IMAGES_DIR}/",
            )
        )
    counts = manifest.get("counts", {})
    if counts.get("images") != images:
        report.issues.append(
            Issue(
                "violation",
                str(root / "meta.json"),
                f"manifest says {counts.get('images')} images, labels hold {images}",
            )
        )
    if counts.get("instances") != instances:
        report.issues.append(
            Issue(
                "violation",
                str(root / "meta.json"),
                f"manifest says {counts.get('instances')} instances, labels hold {instances}",
            )
        )
