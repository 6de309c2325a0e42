"""Asset corpora: font libraries, background pools, word lists.

Loaders validate up front so synthesis never trips over a broken file mid-run:
unparseable fonts and undecodable or undersized backgrounds are skipped with a
warning, and an empty result is an error. Entry ids are assigned in sorted
relative-path order, so the same directory always yields the same ids.
"""

from __future__ import annotations

import hashlib
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageFont, UnidentifiedImageError
from fontTools.ttLib import TTFont

from .errors import EmptyCorpus, EmptyLibrary, EmptyPool

logger = logging.getLogger(__name__)

FONT_SUFFIXES = {".ttf", ".otf"}
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}
MIN_BACKGROUND_SIZE = (64, 64)

# How many decoded backgrounds each pool keeps in memory.
_DECODE_CACHE_SIZE = 64


@dataclass(frozen=True)
class FontEntry:
    font_id: int
    path: Path
    family: str


class FontLibrary:
    """TrueType/OpenType fonts indexed by a stable integer id.

    Lazily caches one FreeType face per (font_id, pixel size) and the set of
    codepoints each font maps, so missing glyphs are caught before rendering.
    Not safe to share across processes; workers each load their own copy.
    """

    def __init__(self, entries: list[FontEntry]):
        if not entries:
            raise EmptyLibrary("font library has no entries")
        self.entries = list(entries)
        self._faces: dict[tuple[int, int], ImageFont.FreeTypeFont] = {}
        self._codepoints: dict[int, frozenset[int]] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def describe(self, font_id: int) -> str:
        entry = self.entries[font_id]
        return f"#{entry.font_id} {entry.family!r} ({entry.path.name})"

    def face(self, font_id: int, pixel_height: int) -> ImageFont.FreeTypeFont:
        key = (font_id, int(pixel_height))
        face = self._faces.get(key)
        if face is None:
            face = ImageFont.truetype(str(self.entries[font_id].path), int(pixel_height))
            self._faces[key] = face
        return face

    def codepoints(self, font_id: int) -> frozenset[int]:
        cps = self._codepoints.get(font_id)
        if cps is None:
            path = self.entries[font_id].path
            try:
                with TTFont(str(path), lazy=True) as tt:
                    cmap = tt.getBestCmap()
            except Exception:
                logger.warning("could not read character map of %s", path)
                cmap = None
            cps = frozenset(cmap or ())
            self._codepoints[font_id] = cps
        return cps

    def unsupported_chars(self, font_id: int, text: str) -> set[str]:
        cps = self.codepoints(font_id)
        return {ch for ch in text if ord(ch) not in cps}

    def digest(self) -> str:
        return _digest_files([e.path for e in self.entries])


@dataclass(frozen=True)
class BackgroundEntry:
    path: Path
    width: int
    height: int


class BackgroundPool:
    """Background images, decoded lazily and cached (small LRU).

    Grayscale files stay single-channel; everything else is decoded to RGB.
    Decoded arrays are handed out read-only — synthesis copies before drawing.
    """

    def __init__(self, entries: list[BackgroundEntry]):
        if not entries:
            raise EmptyPool("background pool has no entries")
        self.entries = list(entries)
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def __len__(self) -> int:
        return len(self.entries)

    def pixels(self, index: int) -> np.ndarray:
        cached = self._cache.get(index)
        if cached is not None:
            self._cache.move_to_end(index)
            return cached
        entry = self.entries[index]
        with Image.open(entry.path) as img:
            if img.mode == "L":
                arr = np.asarray(img, dtype=np.uint8)
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self._cache[index] = arr
        if len(self._cache) > _DECODE_CACHE_SIZE:
            self._cache.popitem(last=False)
        return arr

    def digest(self) -> str:
        return _digest_files([e.path for e in self.entries])


@dataclass(frozen=True)
class WordCorpus:
    """Words eligible for rendering, in file order."""

    words: tuple[str, ...]
    source: Path | None = None

    def __len__(self) -> int:
        return len(self.words)

    def digest(self) -> str:
        h = hashlib.sha256()
        for word in self.words:
            h.update(word.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


def load_fonts(directory: str | Path) -> FontLibrary:
    """Scan a directory tree for .ttf/.otf files and build a library.

    Ids follow sorted relative-path order. Files fontTools cannot parse are
    skipped with a warning.

    Raises:
        EmptyLibrary: nothing usable was found.
        OSError/NotADirectoryError: the directory cannot be read.
    """
    directory = Path(directory)
    paths = sorted(
        p for p in directory.rglob("*") if p.is_file() and p.suffix.lower() in FONT_SUFFIXES
    )
    if not paths and not directory.is_dir():
        raise NotADirectoryError(f"font directory not found: {directory}")
    entries = []
    for path in paths:
        try:
            with TTFont(str(path), lazy=True) as tt:
                name = tt["name"]
                family = name.getDebugName(16) or name.getDebugName(1) or path.stem
        except Exception as exc:
            logger.warning("skipping unparseable font %s (%s)", path, exc)
            continue
        entries.append(FontEntry(font_id=len(entries), path=path, family=str(family)))
    if not entries:
        raise EmptyLibrary(f"no usable fonts under {directory}")
    logger.info("loaded %d fonts from %s", len(entries), directory)
    return FontLibrary(entries)


def load_backgrounds(
    directory: str | Path, min_size: tuple[int, int] = MIN_BACKGROUND_SIZE
) -> BackgroundPool:
    """Scan a directory tree for background images.

    Files that do not decode, or that are smaller than ``min_size`` (w, h),
    are skipped with a warning.

    Raises:
        EmptyPool: nothing usable was found.
        OSError/NotADirectoryError: the directory cannot be read.
    """
    directory = Path(directory)
    paths = sorted(
        p for p in directory.rglob("*") if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not paths and not directory.is_dir():
        raise NotADirectoryError(f"background directory not found: {directory}")
    min_w, min_h = min_size
    entries = []
    for path in paths:
        try:
            with Image.open(path) as img:
                width, height = img.size
                img.verify()
        except (UnidentifiedImageError, OSError, SyntaxError) as exc:
            logger.warning("skipping unreadable background %s (%s)", path, exc)
            continue
        if width < min_w or height < min_h:
            logger.warning(
                "skipping undersized background %s (%dx%d < %dx%d)",
                path, width, height, min_w, min_h,
            )
            continue
        entries.append(BackgroundEntry(path=path, width=width, height=height))
    if not entries:
        raise EmptyPool(f"no usable backgrounds under {directory}")
    logger.info("loaded %d backgrounds from %s", len(entries), directory)
    return BackgroundPool(entries)


def load_corpus(path: str | Path) -> WordCorpus:
    """Read a newline-delimited word list; blank lines are dropped."""
    path = Path(path)
    words = tuple(w for w in (line.strip() for line in path.read_text("utf-8").splitlines()) if w)
    if not words:
        raise EmptyCorpus(f"no words in {path}")
    logger.info("loaded %d words from %s", len(words), path)
    return WordCorpus(words=words, source=path)


def _digest_files(paths: list[Path]) -> str:
    """Order-sensitive SHA-256 over file names and contents."""
    h = hashlib.sha256()
    for path in paths:
        h.update(path.name.encode("utf-8"))
        h.update(b"\0")
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
        h.update(b"\n")
    return h.hexdigest()
