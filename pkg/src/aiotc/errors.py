"""Exception hierarchy shared by all aiotc modules."""


class AiotcError(Exception):
    """Base class for every error raised by this package."""


# --- image ingestion ---

class MalformedHeader(AiotcError):
    """PGM header is not a parseable binary 'P5' header."""


class MaxvalUnsupported(AiotcError):
    """PGM maxval is not 255; only 8-bit rasters are supported."""


class TruncatedPixels(AiotcError):
    """Raster section ends before width*height bytes."""


# --- probability models ---

class EmptyInput(AiotcError):
    """A model was requested for an empty symbol sequence."""


class UnknownSymbol(AiotcError):
    """Symbol is not present in the model's alphabet."""


class DegenerateModel(AiotcError):
    """Every probability rounded to zero; the model is unusable."""


class BadLevelCount(AiotcError):
    """Quantizer level count outside [2, 256]."""


class LevelOutOfRange(AiotcError):
    """A quantized pixel exceeds the quantizer's level range."""


# --- coder ---

class PrecisionExhausted(AiotcError):
    """Model probabilities are too fine for the coder's register width."""


class CorruptCodeword(AiotcError):
    """Payload bits do not identify the claimed symbol sequence."""


# --- PCA ---

class NonFiniteScore(AiotcError):
    """Projection produced NaN or infinity."""


class DimensionMismatch(AiotcError):
    """Matrix or image shapes do not agree."""


# --- metrics ---

class ZeroCompressedSize(AiotcError):
    """Compression ratio is undefined for a zero-byte artifact."""


class UnsupportedPlatform(AiotcError):
    """The platform exposes no process CPU/memory counters."""


# --- container ---

class BadMagic(AiotcError):
    """File does not start with the AIOT magic bytes."""


class UnsupportedVersion(AiotcError):
    """Container version is not one this build can read."""


class TruncatedSection(AiotcError):
    """A container section ends before its declared length."""


class InvalidVariantTag(AiotcError):
    """Container names a pipeline variant this build does not know."""
