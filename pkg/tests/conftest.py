"""Shared fixtures: real fonts, synthetic backgrounds, word lists.

The suite renders with the DejaVu faces that ship inside matplotlib, so it
needs no network access and no system font directory. Backgrounds are
generated procedurally — gradients, noise, stripes, blobs — so their gray
structure is known and varied.

test_acceptance.py records one line per acceptance criterion through the
``acceptance`` fixture; the lines are printed in a summary section at the end
of the run.
"""

from __future__ import annotations

import shutil
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

# Gray values spaced so that *every* level in [0, 255] lies within 16 of one
# of them: consecutive anchors are at most 32 apart (255 - 224 = 31).
# A background built from these leaves no candidate gray anywhere.
FULL_COVERAGE_ANCHORS = (0, 32, 64, 96, 128, 160, 192, 224, 255)

_FONT_FILES = ("DejaVuSans.ttf", "DejaVuSans-Bold.ttf", "DejaVuSerif.ttf")

_WORDS = """
    amber bolt cedar drift ember flint grove harbor iris jagged
    kernel lumen marsh novel orbit plume quartz ridge slate tidal
    umber vexed willow xenon yeast zephyr basalt cobalt dune ochre
    """.split()

_WIDE_WORDS = ("mmmm", "wwww", "moon", "worm")


def _matplotlib_ttf_dir() -> Path:
    import matplotlib

    return Path(matplotlib.get_data_path()) / "fonts" / "ttf"


@pytest.fixture(scope="session")
def font_dir(tmp_path_factory) -> Path:
    """Directory with three real TrueType faces (ids in sorted-name order)."""
    target = tmp_path_factory.mktemp("fonts")
    source = _matplotlib_ttf_dir()
    for name in _FONT_FILES:
        shutil.copy(source / name, target / name)
    return target


@pytest.fixture(scope="session")
def sans_font(tmp_path_factory) -> Path:
    """A single .ttf file, for tests that must pin font_id 0 to one face."""
    target = tmp_path_factory.mktemp("onefont")
    shutil.copy(_matplotlib_ttf_dir() / "DejaVuSans.ttf", target / "DejaVuSans.ttf")
    return target / "DejaVuSans.ttf"


@pytest.fixture(scope="session")
def library(font_dir):
    from graytext.assets import load_fonts

    return load_fonts(font_dir)


@pytest.fixture(scope="session")
def sans_library(sans_font):
    from graytext.assets import load_fonts

    return load_fonts(sans_font.parent)


def paint_backgrounds(target: Path, specs) -> Path:
    """Write one PNG per (name, array) pair into ``target``."""
    target.mkdir(parents=True, exist_ok=True)
    for name, pixels in specs:
        Image.fromarray(pixels).save(target / f"{name}.png")
    return target


def varied_backgrounds(rng: np.random.Generator, width=400, height=300):
    """A dozen backgrounds with deliberately different gray structure.

    Every one of them leaves candidate grays for any ring a word can cast:
    gradients use long runs, noise stays inside a narrow band, palettes use a
    handful of well-separated levels.
    """
    w, h = width, height
    xs = np.linspace(0, 255, w).astype(np.uint8)
    ys = np.linspace(0, 255, h).astype(np.uint8)
    yy, xx = np.mgrid[0:h, 0:w]

    flat = np.full((h, w), 128, np.uint8)
    grad_h = np.tile(xs, (h, 1))
    grad_v = np.tile(ys[:, None], (1, w))
    radial = np.clip(np.hypot(xx - w / 2, yy - h / 2) * (255 / (w / 2)), 0, 255).astype(np.uint8)
    narrow_noise = rng.integers(90, 111, (h, w)).astype(np.uint8)
    palette = np.asarray([0, 60, 120, 180, 240], np.uint8)[rng.integers(0, 5, (h, w))]
    checker = np.where(((xx // 16) + (yy // 16)) % 2 == 0, 40, 200).astype(np.uint8)
    stripes = np.asarray([30, 90, 150], np.uint8)[(xx // 24) % 3]
    bands = np.where(yy < h // 2, 70, 190).astype(np.uint8)

    rgb_grad = np.stack([grad_h, grad_v, flat], axis=-1)
    rgb_dark = np.zeros((h, w, 3), np.uint8)
    rgb_dark[..., 0] = 35
    rgb_dark[..., 1] = 50
    rgb_dark[..., 2] = 20
    rgb_noise = np.repeat(narrow_noise[..., None], 3, axis=-1).copy()
    rgb_noise[..., 2] = rng.integers(100, 121, (h, w)).astype(np.uint8)

    return [
        ("flat", flat),
        ("grad_h", grad_h),
        ("grad_v", grad_v),
        ("radial", radial),
        ("narrow_noise", narrow_noise),
        ("palette", palette),
        ("checker", checker),
        ("stripes", stripes),
        ("bands", bands),
        ("rgb_grad", rgb_grad),
        ("rgb_dark", rgb_dark),
        ("rgb_noise", rgb_noise),
    ]


@pytest.fixture(scope="session")
def background_dir(tmp_path_factory) -> Path:
    rng = np.random.default_rng(424242)
    return paint_backgrounds(
        tmp_path_factory.mktemp("backgrounds"), varied_backgrounds(rng)
    )


@pytest.fixture(scope="session")
def vga_background_dir(tmp_path_factory) -> Path:
    """640x480 backgrounds for throughput measurements."""
    rng = np.random.default_rng(99)
    specs = varied_backgrounds(rng, width=640, height=480)[:6]
    return paint_backgrounds(tmp_path_factory.mktemp("vga"), specs)


def full_coverage_background(width: int, height: int) -> np.ndarray:
    """Vertical 1px stripes cycling the anchor grays.

    Any border ring wider than the 9-column period samples every anchor, so
    every gray level in [0, 255] sits within 16 of a used level and the
    candidate set is empty no matter where a word lands.
    """
    anchors = np.asarray(FULL_COVERAGE_ANCHORS, np.uint8)
    columns = anchors[np.arange(width) % len(anchors)]
    return np.tile(columns, (height, 1))


@pytest.fixture(scope="session")
def hopeless_background_dir(tmp_path_factory) -> Path:
    return paint_backgrounds(
        tmp_path_factory.mktemp("hopeless"),
        [("anchor_stripes", full_coverage_background(320, 240))],
    )


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("corpus") / "words.txt"
    path.write_text("\n".join(_WORDS) + "\n", "utf-8")
    return path


@pytest.fixture(scope="session")
def wide_corpus_file(tmp_path_factory) -> Path:
    """Words that are wide at any sampled height (>= the stripe period)."""
    path = tmp_path_factory.mktemp("wide_corpus") / "words.txt"
    path.write_text("\n".join(_WIDE_WORDS) + "\n", "utf-8")
    return path


# --- acceptance-criteria reporting -----------------------------------------

CRITERIA = {
    1: "candidate selection agrees with the brute-force oracle",
    2: "hand-traced candidate sets match exactly",
    3: "contrast guarantee holds across a regenerated dataset",
    4: "hopeless backgrounds abandon after the full retry budget",
    5: "repeat and parallel runs are byte-identical",
    6: "single-threaded synthesis meets the throughput budget",
    7: "dilation/border invariants hold on randomized masks",
}


class AcceptanceLog:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self) -> None:
        self.lines: dict[int, str] = {}

    def check(self, criterion: int, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        self.lines[criterion] = (
            f"[{status}] criterion {criterion}: {CRITERIA[criterion]} — {detail}"
        )
        assert passed, f"criterion {criterion}: {detail}"

    @contextmanager
    def guard(self, criterion: int):
        """Record a FAIL line even when the test dies before its check."""
        try:
            yield
        except BaseException as exc:
            if criterion not in self.lines:
                detail = f"errored before evaluation: {str(exc)[:160]}"
                self.lines[criterion] = (
                    f"[FAIL] criterion {criterion}: {CRITERIA[criterion]} — {detail}"
                )
            raise


_ACCEPTANCE_KEY = pytest.StashKey()


@pytest.fixture(scope="session")
def acceptance(request) -> AcceptanceLog:
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, AcceptanceLog())


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE_KEY, None)
    if log is None or not log.lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log.lines):
        terminalreporter.write_line(log.lines[number])
