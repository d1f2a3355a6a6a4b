"""Grayscale raster ingestion: PGM decode/encode, luma conversion, flattening.

The canonical on-disk input is binary PGM (P5, maxval 255). JPEG/PNG decoding
is optional plumbing behind the same GrayImage type and needs Pillow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedHeader, MaxvalUnsupported, TruncatedPixels

__all__ = [
    "GrayImage",
    "SymbolSequence",
    "load_pgm",
    "serialize_pgm",
    "to_grayscale",
    "flatten",
    "unflatten",
    "load_image_file",
]


@dataclass(frozen=True)
class GrayImage:
    """8-bit single-channel raster; pixels row-major, one byte per pixel."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dimensions must be >= 1, got {self.width}x{self.height}")
        if len(self.pixels) != self.width * self.height:
            raise ValueError(
                f"pixel buffer holds {len(self.pixels)} bytes, "
                f"expected {self.width * self.height}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GrayImage":
        """Build from a 2-D uint8-compatible array (values must fit [0, 255])."""
        a = np.asarray(arr)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {a.shape}")
        if a.size and (a.min() < 0 or a.max() > 255):
            raise ValueError("pixel values outside [0, 255]")
        h, w = a.shape
        return cls(width=w, height=h, pixels=a.astype(np.uint8).tobytes())

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width)


@dataclass(frozen=True)
class SymbolSequence:
    """Ordered integer symbols with an exclusive upper bound on their values."""

    symbols: tuple[int, ...]
    alphabet_bound: int

    def __post_init__(self) -> None:
        if self.symbols and max(self.symbols) >= self.alphabet_bound:
            raise ValueError("symbol exceeds alphabet_bound")

    def __len__(self) -> int:
        return len(self.symbols)


def load_pgm(data: bytes) -> GrayImage:
    """Parse a binary PGM (P5) stream with maxval 255, bit-exact.

    Comments (``#`` to end of line) are accepted anywhere whitespace may
    appear in the header. Exactly one whitespace byte separates the maxval
    from the raster.
    """
    if not data.startswith(b"P5"):
        raise MalformedHeader("missing 'P5' magic")
    pos = 2
    fields = []
    while len(fields) < 3:
        # skip whitespace and comment lines
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            if eol == -1:
                raise MalformedHeader("unterminated comment")
            pos = eol + 1
            continue
        start = pos
        while pos < len(data) and data[pos : pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise MalformedHeader("expected a decimal header field")
        fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeader("missing whitespace after maxval")
    pos += 1

    width, height, maxval = fields
    if maxval != 255:
        raise MaxvalUnsupported(f"maxval {maxval} not supported, expected 255")
    if width < 1 or height < 1:
        raise MalformedHeader(f"non-positive dimensions {width}x{height}")
    raster = data[pos : pos + width * height]
    if len(raster) < width * height:
        raise TruncatedPixels(
            f"raster holds {len(raster)} bytes, expected {width * height}"
        )
    return GrayImage(width=width, height=height, pixels=raster)


def serialize_pgm(img: GrayImage) -> bytes:
    """Canonical binary PGM writer; load_pgm(serialize_pgm(img)) == img."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels


def to_grayscale(r: int, g: int, b: int) -> int:
    """ITU-R BT.601 luma with truncation: trunc(0.299 r + 0.587 g + 0.114 b).

    Evaluated in integer arithmetic so that (v, v, v) maps to exactly v.
    """
    for c in (r, g, b):
        if not 0 <= c <= 255:
            raise ValueError(f"channel value {c} outside [0, 255]")
    return min(255, (299 * r + 587 * g + 114 * b) // 1000)


def flatten(img: GrayImage) -> SymbolSequence:
    """Row-major pixel sequence over the 8-bit alphabet."""
    return SymbolSequence(symbols=tuple(img.pixels), alphabet_bound=256)


def unflatten(symbols, width: int, height: int) -> GrayImage:
    """Inverse of flatten for any iterable of [0, 255] ints."""
    return GrayImage(width=width, height=height, pixels=bytes(symbols))


def load_image_file(path: str) -> GrayImage:
    """Read an image file as grayscale.

    ``.pgm`` files go through the bit-exact P5 parser. Anything else is
    decoded with Pillow (if installed) and converted channel-wise with the
    same BT.601 truncation as :func:`to_grayscale`.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(b"P5"):
        return load_pgm(data)
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on extras
        raise MalformedHeader(
            f"{path}: not a binary PGM and Pillow is not installed"
        ) from exc
    import io

    with Image.open(io.BytesIO(data)) as im:
        rgb = np.asarray(im.convert("RGB"), dtype=np.uint32)
    luma = (299 * rgb[:, :, 0] + 587 * rgb[:, :, 1] + 114 * rgb[:, :, 2]) // 1000
    return GrayImage.from_array(np.minimum(luma, 255).astype(np.uint8))
