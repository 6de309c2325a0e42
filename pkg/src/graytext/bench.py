"""Single-threaded throughput measurement.

Times the synthesis stages (rasterize, analyze, composite) per instance and
keeps PNG encoding out of the hot number: encoded bytes are produced and
discarded, timed separately, and never written to disk.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .pipeline import StageTimer, image_rng, synthesize_image
from .dataset import encode_png
from .runner import GenerateOptions, _init_worker, _WORKER


@dataclass
class BenchStats:
    images: int
    instances: int
    abandoned: int
    wall_s: float
    synth_wall_s: float
    encode_s: float
    median_ms: float
    p95_ms: float
    instances_per_s: float
    images_per_s: float
    stage_totals_s: dict[str, float] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [
            f"images                {self.images}",
            f"instances             {self.instances} ({self.abandoned} abandoned)",
            f"wall clock            {self.wall_s * 1000:.1f} ms total",
            f"synthesis wall        {self.synth_wall_s * 1000:.1f} ms (encode excluded)",
            f"per-instance latency  median {self.median_ms:.3f} ms, p95 {self.p95_ms:.3f} ms",
            f"throughput            {self.instances_per_s:.1f} instances/s, "
            f"{self.images_per_s:.1f} images/s",
        ]
        for name in ("rasterize", "analyze", "composite"):
            if name in self.stage_totals_s:
                out.append(f"stage {name:<15} {self.stage_totals_s[name] * 1000:.1f} ms total")
        out.append(f"stage {'encode':<15} {self.encode_s * 1000:.1f} ms total (not in latency)")
        return out


def run_bench(opts: GenerateOptions) -> BenchStats:
    """Generate ``opts.count`` images in-process and measure per-stage cost."""
    if opts.count < 1:
        raise ValueError(f"count must be >= 1, got {opts.count}")
    _init_worker(asdict(opts))
    config = _WORKER["config"]
    pool = _WORKER["pool"]
    corpus = _WORKER["corpus"]
    library = _WORKER["library"]

    # warm caches (font faces, decoded backgrounds) outside the clock
    for i in range(len(pool.entries)):
        pool.pixels(i)

    timer = StageTimer()
    encode_s = 0.0
    instances = 0
    abandoned = 0
    started = time.perf_counter()
    for index in range(opts.count):
        rng = image_rng(config.seed, index)
        background = pool.pixels(int(rng.integers(len(pool))))
        words = [
            corpus.words[int(rng.integers(len(corpus)))]
            for _ in range(config.words_per_image)
        ]
        image, placed, dropped = synthesize_image(
            background, words, library, config, rng, timer=timer
        )
        instances += len(placed)
        abandoned += dropped
        t_enc = time.perf_counter()
        encode_png(image)
        encode_s += time.perf_counter() - t_enc
    wall_s = time.perf_counter() - started

    if not timer.instance_seconds:
        raise ValueError("benchmark rendered no instances; nothing to measure")
    latencies_ms = np.asarray(timer.instance_seconds) * 1000.0
    synth_wall_s = wall_s - encode_s
    return BenchStats(
        images=opts.count,
        instances=instances,
        abandoned=abandoned,
        wall_s=wall_s,
        synth_wall_s=synth_wall_s,
        encode_s=encode_s,
        median_ms=float(np.percentile(latencies_ms, 50)),
        p95_ms=float(np.percentile(latencies_ms, 95)),
        instances_per_s=instances / synth_wall_s if synth_wall_s > 0 else float("inf"),
        images_per_s=opts.count / synth_wall_s if synth_wall_s > 0 else float("inf"),
        stage_totals_s=dict(timer.totals),
    )
