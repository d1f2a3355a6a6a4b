"""The four end-to-end compression pipelines and their shared decompressor.

standard     flatten -> frequency model -> arithmetic code (lossless)
pca          project -> 16-bit score symbols -> code; reconstruct from basis
cardinality  quantize intensities to L levels -> code; midpoint reconstruction
optimized    round model probabilities to n decimals, sort descending, merge
             similar symbols into groups of up to ``group_size``; code the
             group-index stream and reconstruct from group representatives

Every pipeline returns the serializable artifact, the reconstruction the
decompressor produces for it, and an iteration trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import coder
from .coder import (
    BACKEND_EXACT,
    BACKEND_RENORM64,
    BACKENDS,
    CoderState,
    allocate_frequencies,
    decode,
    encode,
    encode_step,
    finish_state,
    initial_state,
)
from .container import (
    RECON_NONE,
    RECON_PCA,
    RECON_QUANTIZER,
    RECON_REPRESENTATIVES,
    VERSION,
    CompressedArtifact,
    ModelSection,
    ReconSection,
)
from .errors import CorruptCodeword
from .images import GrayImage, SymbolSequence, flatten, unflatten
from .models import (
    GroupedModel,
    ProbabilityModel,
    QuantizerSpec,
    build_model,
    dequantize,
    group_similar,
    quantize,
    round_probabilities_detailed,
    sort_descending,
)
from .pca import (
    PcaBasis,
    ScoreBlock,
    dequantize_scores,
    fit_project,
    quantize_scores,
    reconstruct,
)

__all__ = [
    "PipelineConfig",
    "IterationTrace",
    "run",
    "run_standard",
    "run_pca",
    "run_cardinality",
    "run_optimized",
    "check_stop",
    "decompress",
]

VARIANT_DEFAULTS = {
    "standard": {},
    "pca": {"retain": 0.5},
    "cardinality": {"levels": 32},
    "optimized": {"decimals": 3, "group_size": 6},
}

SCORE_BITS = 16


@dataclass(frozen=True)
class PipelineConfig:
    """Which pipeline to run and with what parameters.

    Parameters may only be given for the variant they belong to; missing
    ones take the documented defaults (levels 32, retain 0.5, decimals 3,
    group size 6).
    """

    variant: str
    decimals: Optional[int] = None
    group_size: Optional[int] = None
    levels: Optional[int] = None
    retain: Optional[float] = None
    backend: str = BACKEND_RENORM64

    def __post_init__(self) -> None:
        if self.variant not in VARIANT_DEFAULTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        allowed = VARIANT_DEFAULTS[self.variant]
        for name in ("decimals", "group_size", "levels", "retain"):
            value = getattr(self, name)
            if value is None:
                if name in allowed:
                    object.__setattr__(self, name, allowed[name])
            elif name not in allowed:
                raise ValueError(
                    f"{name} does not apply to the {self.variant} variant"
                )
        if self.variant == "optimized":
            if not 3 <= self.decimals <= 6:
                raise ValueError(f"decimals must be in [3, 6], got {self.decimals}")
            if self.group_size < 1:
                raise ValueError("group_size must be >= 1")


@dataclass(frozen=True)
class IterationTrace:
    """Interval-update accounting for one run."""

    iterations: int
    converged_by_threshold: bool = False
    objective_history: Optional[tuple[float, ...]] = None


def check_stop(state: CoderState, decimals: int, probability) -> bool:
    """Stopping rule for the optimized pipeline's coding loop.

    A step may be skipped only when it is information-free (the symbol's
    group probability is exactly 1, so the decoder can reinsert it from the
    header's symbol count alone) and the interval-width change it would
    cause rounds to zero at ``decimals`` places - which for a certain
    symbol it always does, since the width does not move at all.
    """
    p = Fraction(probability)
    if p != 1:
        return False
    shrink = state.width() * (1 - p)
    return math.floor(shrink * 10**decimals + Fraction(1, 2)) == 0


def _model_section(model: ProbabilityModel | GroupedModel, backend: str) -> ModelSection:
    view = model.coding_view()
    if isinstance(model, GroupedModel):
        symbols = tuple(range(len(model)))
    else:
        symbols = model.symbols
    if backend == BACKEND_EXACT:
        return ModelSection(kind="exact", symbols=symbols,
                            counts=view.counts, total=view.total)
    freqs = allocate_frequencies(view.counts, view.total)
    return ModelSection(kind="renorm64", symbols=symbols,
                        counts=tuple(freqs), total=coder.FREQ_TOTAL)


def _artifact(variant, img, n_symbols, model_section, recon, payload, cfg,
              **params) -> CompressedArtifact:
    return CompressedArtifact(
        version=VERSION,
        variant=variant,
        width=img.width,
        height=img.height,
        n_symbols=n_symbols,
        decimals=params.get("decimals"),
        levels=params.get("levels"),
        retain=params.get("retain"),
        group_size=params.get("group_size"),
        model=model_section,
        recon=recon,
        payload=payload,
    )


def run_standard(img: GrayImage, cfg: PipelineConfig):
    seq = flatten(img)
    model = build_model(seq)
    payload, iterations = encode(seq, model, cfg.backend)
    artifact = _artifact(
        "standard", img, len(seq), _model_section(model, cfg.backend),
        ReconSection(), payload, cfg,
    )
    return artifact, decompress(artifact), IterationTrace(iterations=iterations)


def run_pca(img: GrayImage, cfg: PipelineConfig):
    basis, block = fit_project(img, cfg.retain)
    qblock = quantize_scores(block.scores, SCORE_BITS)
    seq = SymbolSequence(
        symbols=tuple(qblock.quantized.ravel().tolist()),
        alphabet_bound=1 << SCORE_BITS,
    )
    model = build_model(seq)
    payload, iterations = encode(seq, model, cfg.backend)
    recon = ReconSection(
        kind=RECON_PCA,
        pca_mean=tuple(basis.mean.tolist()),
        pca_components=tuple(basis.components.ravel().tolist()),
        pca_mins=tuple(qblock.mins.tolist()),
        pca_maxs=tuple(qblock.maxs.tolist()),
        score_bits=SCORE_BITS,
    )
    artifact = _artifact(
        "pca", img, len(seq), _model_section(model, cfg.backend),
        recon, payload, cfg, retain=cfg.retain,
    )
    return artifact, decompress(artifact), IterationTrace(iterations=iterations)


def run_cardinality(img: GrayImage, cfg: PipelineConfig):
    spec = QuantizerSpec(levels=cfg.levels)
    levels_img = quantize(img, spec)
    seq = flatten(levels_img)
    model = build_model(seq)
    payload, iterations = encode(seq, model, cfg.backend)
    artifact = _artifact(
        "cardinality", img, len(seq), _model_section(model, cfg.backend),
        ReconSection(kind=RECON_QUANTIZER, levels=cfg.levels),
        payload, cfg, levels=cfg.levels,
    )
    return artifact, decompress(artifact), IterationTrace(iterations=iterations)


def run_optimized(img: GrayImage, cfg: PipelineConfig):
    seq = flatten(img)
    base = build_model(seq)
    rounded, aliases = round_probabilities_detailed(base, cfg.decimals)
    grouped = group_similar(
        sort_descending(rounded),
        threshold=Fraction(1, 10**cfg.decimals),
        max_group_size=cfg.group_size,
    )
    symbols = seq.symbols
    if aliases:
        symbols = tuple(aliases.get(s, s) for s in symbols)
        seq = SymbolSequence(symbols=symbols, alphabet_bound=seq.alphabet_bound)

    if len(grouped) == 1:
        # Every pixel maps to the same certain group. The first step is
        # coded; the rest are zero-information and the stopping rule skips
        # them (it is constant across these steps, so one check covers all).
        state = initial_state(grouped, cfg.backend)
        encode_step(state, symbols[0], grouped)
        iterations = 1
        skippable = check_stop(state, cfg.decimals, grouped.group_probability(0))
        if not skippable:  # defensive: a certain symbol is always skippable
            for s in symbols[1:]:
                encode_step(state, s, grouped)
                iterations += 1
        payload = finish_state(state)
        converged = skippable and len(symbols) > 1
    else:
        payload, iterations = encode(seq, grouped, cfg.backend)
        converged = False

    artifact = _artifact(
        "optimized", img, len(seq), _model_section(grouped, cfg.backend),
        ReconSection(kind=RECON_REPRESENTATIVES,
                     representatives=grouped.representatives()),
        payload, cfg, decimals=cfg.decimals, group_size=cfg.group_size,
    )
    trace = IterationTrace(iterations=iterations, converged_by_threshold=converged)
    return artifact, decompress(artifact), trace


_RUNNERS = {
    "standard": run_standard,
    "pca": run_pca,
    "cardinality": run_cardinality,
    "optimized": run_optimized,
}


def run(img: GrayImage, cfg: PipelineConfig):
    """Dispatch to the variant's pipeline; total over all valid configs."""
    return _RUNNERS[cfg.variant](img, cfg)


def _decode_model(artifact: CompressedArtifact) -> tuple[ProbabilityModel, str]:
    m = artifact.model
    model = ProbabilityModel(symbols=m.symbols, counts=m.counts, total=m.total)
    backend = BACKEND_EXACT if m.kind == "exact" else BACKEND_RENORM64
    return model, backend


def decompress(artifact: CompressedArtifact) -> GrayImage:
    """Invert whichever pipeline produced the artifact, from its header alone."""
    model, backend = _decode_model(artifact)
    n = artifact.n_symbols
    w, h = artifact.width, artifact.height

    if artifact.variant == "pca":
        k = len(artifact.recon.pca_mins)
        if n != h * k:
            raise CorruptCodeword(f"{n} symbols cannot fill {h} rows of {k} scores")
    elif n != w * h:
        raise CorruptCodeword(f"{n} symbols cannot fill a {w}x{h} image")

    decoded = decode(artifact.payload, model, n, backend)

    if artifact.variant == "standard":
        return unflatten(decoded.symbols, w, h)

    if artifact.variant == "cardinality":
        levels_img = unflatten(decoded.symbols, w, h)
        return dequantize(levels_img, QuantizerSpec(levels=artifact.levels))

    if artifact.variant == "optimized":
        reps = artifact.recon.representatives
        return unflatten((reps[i] for i in decoded.symbols), w, h)

    # pca
    r = artifact.recon
    k = len(r.pca_mins)
    block = ScoreBlock(
        scores=np.zeros((h, k)),
        bits=r.score_bits,
        mins=np.asarray(r.pca_mins),
        maxs=np.asarray(r.pca_maxs),
        quantized=np.asarray(decoded.symbols, dtype=np.uint32).reshape(h, k),
    )
    basis = PcaBasis(
        mean=np.asarray(r.pca_mean),
        components=np.asarray(r.pca_components).reshape(k, w),
        singular_values=np.zeros(k),
        retain_fraction=artifact.retain,
    )
    return reconstruct(basis, dequantize_scores(block))
