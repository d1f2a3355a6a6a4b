"""Principal-component projection of the image matrix, score quantization
for entropy coding, and reconstruction.

The image is treated as a height x width matrix, column-centered, and
factored with an SVD; the top k = ceil(f * min(height, width)) right
singular vectors form the basis. Scores are mapped per component to a
16-bit alphabet so the arithmetic coder has a finite symbol set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteScore
from .images import GrayImage

__all__ = ["PcaBasis", "ScoreBlock", "fit_project", "quantize_scores",
           "dequantize_scores", "reconstruct"]


@dataclass(frozen=True)
class PcaBasis:
    mean: np.ndarray              # per-column means, length = width
    components: np.ndarray        # k x width, orthonormal rows
    singular_values: np.ndarray   # top k, descending
    retain_fraction: float

    @property
    def k(self) -> int:
        return self.components.shape[0]


@dataclass(frozen=True)
class ScoreBlock:
    """Projections of the centered rows onto the basis, optionally quantized.

    ``quantized`` holds per-score integers in [0, 2^bits - 1]; ``mins`` and
    ``maxs`` record each component's affine range for inversion.
    """

    scores: np.ndarray            # height x k, float64
    bits: int | None = None
    mins: np.ndarray | None = None
    maxs: np.ndarray | None = None
    quantized: np.ndarray | None = None


def retained_components(retain_fraction: float, height: int, width: int) -> int:
    if not 0 < retain_fraction <= 1:
        raise ValueError(f"retain fraction must be in (0, 1], got {retain_fraction}")
    return math.ceil(retain_fraction * min(height, width))


def fit_project(img: GrayImage, retain_fraction: float = 0.5) -> tuple[PcaBasis, ScoreBlock]:
    """Column-center the image matrix, factor it, keep the top components.

    A constant image has zero variance everywhere; it comes back with an
    arbitrary orthonormal basis and all-zero scores, which reconstructs
    exactly.
    """
    if img.height < 2 or img.width < 2:
        raise DimensionMismatch("PCA needs at least a 2x2 image")
    k = retained_components(retain_fraction, img.height, img.width)
    x = img.as_array().astype(np.float64)
    mean = x.mean(axis=0)
    centered = x - mean
    # SVD of the centered matrix: numerically stabler than forming the
    # covariance, and the right singular vectors are the same eigenvectors.
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:k]
    scores = centered @ components.T
    basis = PcaBasis(
        mean=mean,
        components=components,
        singular_values=s[:k],
        retain_fraction=retain_fraction,
    )
    return basis, ScoreBlock(scores=scores)


def quantize_scores(scores: np.ndarray, bits: int = 16) -> ScoreBlock:
    """Affine map of each component's scores onto [0, 2^bits - 1], half-up.

    Components with a degenerate (min == max) range map to 0 and invert to
    the constant.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if not np.isfinite(scores).all():
        raise NonFiniteScore("scores contain NaN or infinity")
    if not 1 <= bits <= 16:
        raise ValueError(f"bits must be in [1, 16], got {bits}")
    mins = scores.min(axis=0)
    maxs = scores.max(axis=0)
    span = maxs - mins
    top = (1 << bits) - 1
    safe = np.where(span > 0, span, 1.0)
    q = np.floor((scores - mins) / safe * top + 0.5)
    q = np.clip(q, 0, top)
    q[:, span == 0] = 0
    return ScoreBlock(
        scores=scores,
        bits=bits,
        mins=mins,
        maxs=maxs,
        quantized=q.astype(np.uint32),
    )


def dequantize_scores(block: ScoreBlock) -> np.ndarray:
    if block.quantized is None:
        raise ValueError("score block was never quantized")
    top = (1 << block.bits) - 1
    span = block.maxs - block.mins
    return block.quantized.astype(np.float64) / top * span + block.mins


def reconstruct(basis: PcaBasis, scores: np.ndarray) -> GrayImage:
    """Invert the projection: scores @ components + mean, rounded half-up
    and clamped to [0, 255]."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] != basis.k:
        raise DimensionMismatch(
            f"scores have shape {scores.shape}, basis holds {basis.k} components"
        )
    approx = scores @ basis.components + basis.mean
    pixels = np.clip(np.floor(approx + 0.5), 0, 255).astype(np.uint8)
    return GrayImage.from_array(pixels)
