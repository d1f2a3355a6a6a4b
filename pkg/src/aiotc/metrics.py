"""Evaluation metrics for a compression run: ratio, wall time, RMSE,
iteration count, CPU utilization and resident-memory delta."""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from .errors import DimensionMismatch, ZeroCompressedSize
from .images import GrayImage

__all__ = [
    "RunMetrics",
    "ResourceSample",
    "compression_ratio",
    "format_ratio",
    "rmse",
    "timed",
    "sample_resources",
]


@dataclass
class ResourceSample:
    at_s: float
    rss_bytes: int


@dataclass
class RunMetrics:
    """Everything recorded for one (image, pipeline, parameters) run."""

    original_bytes: int
    compressed_bytes: int          # payload only
    compressed_bytes_total: int    # payload + header
    wall_time_s: float
    iterations: int
    rmse: float
    cpu_percent: Optional[float] = None
    mem_mb: Optional[float] = None
    samples: list[ResourceSample] = field(default_factory=list)

    @property
    def ratio(self) -> Fraction:
        return compression_ratio(self.original_bytes, self.compressed_bytes)

    @property
    def ratio_total(self) -> Fraction:
        return compression_ratio(self.original_bytes, self.compressed_bytes_total)

    def to_dict(self) -> dict[str, Any]:
        return {
            "original_bytes": self.original_bytes,
            "compressed_payload_bytes": self.compressed_bytes,
            "compressed_total_bytes": self.compressed_bytes_total,
            "ratio": format_ratio(self.ratio),
            "ratio_exact": f"{self.ratio.numerator}/{self.ratio.denominator}",
            "ratio_total": format_ratio(self.ratio_total),
            "time_s": self.wall_time_s,
            "iterations": self.iterations,
            "rmse": self.rmse,
            "cpu_percent": self.cpu_percent,
            "mem_mb": self.mem_mb,
        }


def compression_ratio(original_bytes: int, compressed_bytes: int) -> Fraction:
    """Original size over compressed size, exact."""
    if compressed_bytes < 1:
        raise ZeroCompressedSize("compressed size must be >= 1 byte")
    return Fraction(original_bytes, compressed_bytes)


def format_ratio(ratio: Fraction) -> str:
    """Display form 'N:1' with N rounded half-up."""
    n = math.floor(ratio + Fraction(1, 2))
    return f"{n}:1"


def rmse(a: GrayImage, b: GrayImage) -> float:
    """Root mean square per-pixel error; 0 means lossless."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}"
        )
    xa = np.frombuffer(a.pixels, dtype=np.uint8).astype(np.float64)
    xb = np.frombuffer(b.pixels, dtype=np.uint8).astype(np.float64)
    return float(np.sqrt(np.mean((xa - xb) ** 2)))


def timed(op: Callable[[], Any]) -> tuple[Any, float]:
    """Run ``op`` and return (result, monotonic wall seconds)."""
    start = time.perf_counter()
    result = op()
    return result, time.perf_counter() - start


def sample_resources(
    during: Callable[[], Any], cadence_s: float = 0.1
) -> tuple[Any, Optional[float], Optional[float], list[ResourceSample]]:
    """Run ``during`` while sampling process RSS at the given cadence.

    Returns (result, cpu_percent, mem_mb_peak_delta, samples). CPU percent is
    process CPU time over wall time, so it can exceed 100 on multicore.
    When the platform exposes no counters, the run still succeeds and the
    resource fields come back None.
    """
    try:
        import psutil

        proc = psutil.Process()
        baseline_rss = proc.memory_info().rss
    except Exception:
        proc = None
        baseline_rss = None

    samples: list[ResourceSample] = []
    stop = threading.Event()
    t0 = time.perf_counter()

    def sampler() -> None:
        while not stop.is_set():
            if proc is not None:
                try:
                    samples.append(
                        ResourceSample(
                            at_s=time.perf_counter() - t0,
                            rss_bytes=proc.memory_info().rss,
                        )
                    )
                except Exception:
                    pass
            stop.wait(cadence_s)

    thread = threading.Thread(target=sampler, daemon=True)
    thread.start()
    cpu0 = time.process_time()
    try:
        result = during()
    finally:
        cpu1 = time.process_time()
        wall = time.perf_counter() - t0
        stop.set()
        thread.join()

    cpu_percent: Optional[float] = None
    if wall > 0:
        cpu_percent = (cpu1 - cpu0) / wall * 100.0
    mem_mb: Optional[float] = None
    if proc is not None and baseline_rss is not None:
        try:
            final_rss = proc.memory_info().rss
        except Exception:
            final_rss = baseline_rss
        peak = max([s.rss_bytes for s in samples] + [final_rss])
        mem_mb = max(0.0, (peak - baseline_rss) / (1024 * 1024))
    return result, cpu_percent, mem_mb, samples
