"""Bit-exact .aiot container: header + model + reconstruction dictionary +
padded codeword payload.

Little-endian fixed layout::

    magic "AIOT" | version u8 | variant u8 | width u32 | height u32
    | n_symbols u64 | params block | model block | reconstruction block
    | payload_bit_len u64 | payload bytes

The header fully determines the decoder path; equal artifacts serialize to
equal bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

from .coder import FREQ_TOTAL, Codeword
from .errors import (
    BadMagic,
    InvalidVariantTag,
    TruncatedSection,
    UnsupportedVersion,
)

__all__ = [
    "MAGIC",
    "VERSION",
    "VARIANTS",
    "ModelSection",
    "ReconSection",
    "CompressedArtifact",
    "serialize",
    "deserialize",
]

MAGIC = b"AIOT"
VERSION = 1
VARIANTS = ("standard", "pca", "cardinality", "optimized")

MODEL_EXACT = 0
MODEL_RENORM64 = 1

RECON_NONE = 0
RECON_REPRESENTATIVES = 1
RECON_QUANTIZER = 2
RECON_PCA = 3


@dataclass(frozen=True)
class ModelSection:
    """Frequency table the decoder rebuilds its model from.

    ``kind`` 'exact' stores rational counts over ``total``; 'renorm64'
    stores the coder's integer frequencies, which always sum to 2^32.
    """

    kind: str
    symbols: tuple[int, ...]
    counts: tuple[int, ...]
    total: int


@dataclass(frozen=True)
class ReconSection:
    """Reconstruction dictionary for the lossy variants."""

    kind: int = RECON_NONE
    representatives: Optional[tuple[int, ...]] = None
    levels: Optional[int] = None
    pca_mean: Optional[tuple[float, ...]] = None
    pca_components: Optional[tuple[float, ...]] = None  # k*width, row-major
    pca_mins: Optional[tuple[float, ...]] = None
    pca_maxs: Optional[tuple[float, ...]] = None
    score_bits: Optional[int] = None


@dataclass(frozen=True)
class CompressedArtifact:
    version: int
    variant: str
    width: int
    height: int
    n_symbols: int
    decimals: Optional[int]
    levels: Optional[int]
    retain: Optional[float]
    group_size: Optional[int]
    model: ModelSection
    recon: ReconSection
    payload: Codeword


def _pack_f64s(values) -> bytes:
    return struct.pack(f"<{len(values)}d", *values)


def serialize(artifact: CompressedArtifact) -> bytes:
    a = artifact
    out = bytearray()
    out += MAGIC
    out += struct.pack("<BB", a.version, VARIANTS.index(a.variant))
    out += struct.pack("<IIQ", a.width, a.height, a.n_symbols)

    if a.variant == "pca":
        out += struct.pack("<d", a.retain)
    elif a.variant == "cardinality":
        out += struct.pack("<H", a.levels)
    elif a.variant == "optimized":
        out += struct.pack("<BB", a.decimals, a.group_size)

    m = a.model
    if m.kind == "exact":
        out += struct.pack("<BIQ", MODEL_EXACT, len(m.symbols), m.total)
        for s, c in zip(m.symbols, m.counts):
            out += struct.pack("<IQ", s, c)
    else:
        out += struct.pack("<BI", MODEL_RENORM64, len(m.symbols))
        for s, c in zip(m.symbols, m.counts):
            out += struct.pack("<II", s, c - 1)  # every frequency is >= 1

    r = a.recon
    out += struct.pack("<B", r.kind)
    if r.kind == RECON_REPRESENTATIVES:
        out += struct.pack("<H", len(r.representatives))
        out += bytes(r.representatives)
    elif r.kind == RECON_QUANTIZER:
        out += struct.pack("<H", r.levels)
    elif r.kind == RECON_PCA:
        k = len(r.pca_mins)
        out += struct.pack("<HB", k, r.score_bits)
        out += _pack_f64s(r.pca_mean)
        out += _pack_f64s(r.pca_components)
        out += _pack_f64s(r.pca_mins)
        out += _pack_f64s(r.pca_maxs)

    out += struct.pack("<Q", a.payload.bit_length)
    out += a.payload.data
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedSection(
                f"{what}: needed {n} bytes at offset {self.pos}, "
                f"file holds {len(self.data)}"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def deserialize(data: bytes) -> CompressedArtifact:
    rd = _Reader(data)
    if rd.take(4, "magic") != MAGIC:
        raise BadMagic("file does not start with 'AIOT'")
    version, variant_tag = rd.unpack("<BB", "version/variant")
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}, this build reads {VERSION}")
    if variant_tag >= len(VARIANTS):
        raise InvalidVariantTag(f"variant tag {variant_tag}")
    variant = VARIANTS[variant_tag]
    width, height, n_symbols = rd.unpack("<IIQ", "dimensions")

    decimals = levels = group_size = None
    retain = None
    if variant == "pca":
        (retain,) = rd.unpack("<d", "pca params")
    elif variant == "cardinality":
        (levels,) = rd.unpack("<H", "quantizer params")
    elif variant == "optimized":
        decimals, group_size = rd.unpack("<BB", "optimization params")

    (model_kind,) = rd.unpack("<B", "model kind")
    if model_kind == MODEL_EXACT:
        n_entries, total = rd.unpack("<IQ", "model size")
        pairs = [rd.unpack("<IQ", "model entry") for _ in range(n_entries)]
        model = ModelSection(
            kind="exact",
            symbols=tuple(p[0] for p in pairs),
            counts=tuple(p[1] for p in pairs),
            total=total,
        )
    elif model_kind == MODEL_RENORM64:
        (n_entries,) = rd.unpack("<I", "model size")
        pairs = [rd.unpack("<II", "model entry") for _ in range(n_entries)]
        model = ModelSection(
            kind="renorm64",
            symbols=tuple(p[0] for p in pairs),
            counts=tuple(p[1] + 1 for p in pairs),
            total=FREQ_TOTAL,
        )
    else:
        raise TruncatedSection(f"unknown model kind {model_kind}")

    (recon_kind,) = rd.unpack("<B", "reconstruction kind")
    recon = ReconSection()
    if recon_kind == RECON_NONE:
        pass
    elif recon_kind == RECON_REPRESENTATIVES:
        (n_groups,) = rd.unpack("<H", "representatives size")
        reps = rd.take(n_groups, "representatives")
        recon = ReconSection(kind=recon_kind, representatives=tuple(reps))
    elif recon_kind == RECON_QUANTIZER:
        (qlevels,) = rd.unpack("<H", "quantizer levels")
        recon = ReconSection(kind=recon_kind, levels=qlevels)
    elif recon_kind == RECON_PCA:
        k, sbits = rd.unpack("<HB", "pca header")
        mean = rd.unpack(f"<{width}d", "pca mean")
        comps = rd.unpack(f"<{k * width}d", "pca components")
        mins = rd.unpack(f"<{k}d", "pca mins")
        maxs = rd.unpack(f"<{k}d", "pca maxs")
        recon = ReconSection(
            kind=recon_kind,
            pca_mean=mean,
            pca_components=comps,
            pca_mins=mins,
            pca_maxs=maxs,
            score_bits=sbits,
        )
    else:
        raise TruncatedSection(f"unknown reconstruction kind {recon_kind}")

    (bit_length,) = rd.unpack("<Q", "payload length")
    payload_bytes = rd.take((bit_length + 7) // 8, "payload")
    if rd.pos != len(data):
        raise TruncatedSection(
            f"{len(data) - rd.pos} trailing bytes after payload"
        )
    payload = Codeword(data=payload_bytes, bit_length=bit_length)

    return CompressedArtifact(
        version=version,
        variant=variant,
        width=width,
        height=height,
        n_symbols=n_symbols,
        decimals=decimals,
        levels=levels,
        retain=retain,
        group_size=group_size,
        model=model,
        recon=recon,
        payload=payload,
    )
