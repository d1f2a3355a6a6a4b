"""Arithmetic encoder/decoder with two interchangeable backends.

exact
    The live interval is kept as integers ``low = a / T**k`` and
    ``width = w / T**k`` where T is the model's count total and k the number
    of symbols coded, so the final width equals the product of the coded
    symbols' probabilities exactly. The codeword is the shortest bit string
    whose dyadic interval fits inside the final interval. Cost grows with
    sequence length; intended for sequences up to ~10^4 symbols and as the
    oracle for the production backend.

renorm64
    A 64-bit carry-less range coder with byte-wise renormalization. Model
    probabilities are re-expressed as integer frequencies over a 2^32 total
    (every entry >= 1), which pins down the quantization a floating-point
    coder would perform silently and guarantees the decoder sees the exact
    same table.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import CorruptCodeword, PrecisionExhausted, UnknownSymbol
from .images import SymbolSequence
from .models import CodingView, GroupedModel, ProbabilityModel

__all__ = [
    "Codeword",
    "BACKEND_EXACT",
    "BACKEND_RENORM64",
    "BACKENDS",
    "ExactCoderState",
    "Renorm64CoderState",
    "initial_state",
    "encode_step",
    "finish_state",
    "select_codeword",
    "encode",
    "decode",
    "allocate_frequencies",
]

Model = Union[ProbabilityModel, GroupedModel]

BACKEND_EXACT = "exact"
BACKEND_RENORM64 = "renorm64"
BACKENDS = (BACKEND_EXACT, BACKEND_RENORM64)

# renorm64 register geometry
FREQ_TOTAL = 1 << 32        # fixed frequency-table total
_MASK64 = (1 << 64) - 1
_TOP = 1 << 56              # top-byte-settled threshold
_BOT = 1 << 32              # renormalization floor; >= FREQ_TOTAL


@dataclass(frozen=True)
class Codeword:
    """MSB-first packed bit string; the dyadic fraction 0.bits identifies the
    encoded sequence."""

    data: bytes
    bit_length: int

    def __post_init__(self) -> None:
        if self.bit_length < 0 or len(self.data) != (self.bit_length + 7) // 8:
            raise CorruptCodeword(
                f"{len(self.data)} payload bytes cannot hold "
                f"{self.bit_length} bits exactly"
            )
        if self.bit_length % 8 and self.data[-1] & ((1 << (8 - self.bit_length % 8)) - 1):
            raise CorruptCodeword("padding bits must be zero")

    @classmethod
    def from_bits(cls, bits) -> "Codeword":
        bits = list(bits)
        value = 0
        for b in bits:
            value = (value << 1) | (b & 1)
        n = len(bits)
        value <<= (-n) % 8
        return cls(data=value.to_bytes((n + 7) // 8, "big"), bit_length=n)

    def bits(self) -> list[int]:
        out = []
        for i in range(self.bit_length):
            out.append((self.data[i // 8] >> (7 - i % 8)) & 1)
        return out

    def value_numerator(self) -> int:
        """The dyadic value as an integer over 2**bit_length."""
        if not self.bit_length:
            return 0
        raw = int.from_bytes(self.data, "big")
        return raw >> (8 * len(self.data) - self.bit_length)

    def with_bit_flipped(self, index: int) -> "Codeword":
        if not 0 <= index < self.bit_length:
            raise IndexError(index)
        buf = bytearray(self.data)
        buf[index // 8] ^= 1 << (7 - index % 8)
        return Codeword(data=bytes(buf), bit_length=self.bit_length)


# ---------------------------------------------------------------------------
# frequency table for the renorm64 backend
# ---------------------------------------------------------------------------

def allocate_frequencies(counts, total: int) -> list[int]:
    """Deterministically scale exact counts to integer frequencies summing to
    2^32 with every entry >= 1 (largest-remainder apportionment, remainder
    ties broken by entry index; any surplus is taken from the largest
    entries, which stay >= 1 because the alphabet is far smaller than 2^32).
    """
    n = len(counts)
    if n > FREQ_TOTAL:
        raise PrecisionExhausted(f"{n} model entries exceed the 2^32 total")
    freqs = []
    rems = []
    for c in counts:
        raw = c * FREQ_TOTAL
        f, r = divmod(raw, total)
        if f == 0:
            f, r = 1, -1  # bumped entries sit out the remainder contest
        freqs.append(f)
        rems.append(r)
    diff = FREQ_TOTAL - sum(freqs)
    if diff > 0:
        order = sorted(range(n), key=lambda i: (-rems[i], i))
        for i in order[:diff]:
            freqs[i] += 1
    elif diff < 0:
        surplus = -diff
        while surplus:
            j = max(range(n), key=lambda i: (freqs[i], -i))
            take = min(surplus, freqs[j] - 1)
            freqs[j] -= take
            surplus -= take
    return freqs


def _prefix_sums(values) -> list[int]:
    out = [0]
    for v in values:
        out.append(out[-1] + v)
    return out


# ---------------------------------------------------------------------------
# coder states (granular per-symbol API)
# ---------------------------------------------------------------------------

class ExactCoderState:
    """Interval [a/T^k, (a+w)/T^k) held as integers; never loses precision."""

    backend = BACKEND_EXACT

    def __init__(self, view: CodingView):
        self._view = view
        self._cum = _prefix_sums(view.counts)
        self.low_num = 0
        self.width_num = 1
        self.steps = 0

    @property
    def denominator(self) -> int:
        return self._view.total**self.steps

    @property
    def low(self) -> Fraction:
        return Fraction(self.low_num, self.denominator)

    @property
    def high(self) -> Fraction:
        return Fraction(self.low_num + self.width_num, self.denominator)

    def width(self) -> Fraction:
        return Fraction(self.width_num, self.denominator)

    def step_index(self, i: int) -> None:
        self.low_num = self.low_num * self._view.total + self.width_num * self._cum[i]
        self.width_num = self.width_num * self._view.counts[i]
        self.steps += 1


class Renorm64CoderState:
    """64-bit registers plus the bytes already settled and emitted."""

    backend = BACKEND_RENORM64

    def __init__(self, view: CodingView):
        self._view = view
        self.freqs = allocate_frequencies(view.counts, view.total)
        self.cumfreqs = _prefix_sums(self.freqs)
        self.low_register = 0
        self.range_register = _MASK64
        self.emitted = bytearray()

    @property
    def low(self) -> Fraction:
        """Current register window's low end, as a fraction of the window."""
        return Fraction(self.low_register, 1 << 64)

    @property
    def high(self) -> Fraction:
        return Fraction(self.low_register + self.range_register, 1 << 64)

    def width(self) -> Fraction:
        return Fraction(self.range_register, 1 << 64)

    def step_index(self, i: int) -> None:
        low, rng = self.low_register, self.range_register
        r = rng >> 32
        low += self.cumfreqs[i] * r
        rng = r * self.freqs[i]
        if rng == 0:  # unreachable: every frequency is >= 1 and r >= 1
            raise PrecisionExhausted("interval underflow")
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = -low & (_BOT - 1)
            else:
                break
            self.emitted.append((low >> 56) & 0xFF)
            low = (low << 8) & _MASK64
            rng <<= 8
        self.low_register, self.range_register = low, rng


CoderState = Union[ExactCoderState, Renorm64CoderState]


def initial_state(model: Model, backend: str = BACKEND_EXACT) -> CoderState:
    view = model.coding_view()
    if backend == BACKEND_EXACT:
        return ExactCoderState(view)
    if backend == BACKEND_RENORM64:
        return Renorm64CoderState(view)
    raise ValueError(f"unknown backend {backend!r}")


def encode_step(state: CoderState, symbol: int, model: Model) -> CoderState:
    """Narrow the interval for one symbol: low' = low + (high-low)*C(s),
    high' = low + (high-low)*(C(s)+P(s)). Mutates and returns ``state``."""
    view = state._view
    try:
        i = view.index_of[symbol]
    except KeyError:
        raise UnknownSymbol(f"symbol {symbol} not in model") from None
    state.step_index(i)
    return state


def finish_state(state: CoderState) -> Codeword:
    """Terminate coding and return the full codeword for the state."""
    if isinstance(state, ExactCoderState):
        return _dyadic_codeword(
            state.low_num, state.low_num + state.width_num, state.denominator
        )
    return _renorm64_tail(state.low_register, state.range_register, state.emitted)


# ---------------------------------------------------------------------------
# codeword selection
# ---------------------------------------------------------------------------

def _dyadic_codeword(a: int, b: int, den: int) -> Codeword:
    """Shortest bit string whose dyadic interval fits inside [a/den, b/den)."""
    w = b - a
    # smallest length with 2^length * w >= den (necessary for any fit)
    length = max(0, den.bit_length() - w.bit_length() - 1)
    while (w << length) < den:
        length += 1
    for ln in (length, length + 1):
        m = -((-a << ln) // den)  # ceil(a * 2^ln / den)
        if (m + 1) * den <= (b << ln):
            return _pack_bits(m, ln)
    raise AssertionError("length+1 always admits a dyadic cover")


def _pack_bits(m: int, length: int) -> Codeword:
    if length == 0:
        return Codeword(data=b"", bit_length=0)
    nbytes = (length + 7) // 8
    return Codeword(data=(m << (8 * nbytes - length)).to_bytes(nbytes, "big"),
                    bit_length=length)


def select_codeword(low: Fraction, high: Fraction) -> Codeword:
    """Shortest bits b with [0.b, 0.b + 2^-len) inside [low, high); any
    bit-stream extension of the result decodes identically."""
    low, high = Fraction(low), Fraction(high)
    if not (0 <= low < high <= 1):
        raise ValueError(f"need 0 <= low < high <= 1, got [{low}, {high})")
    den = low.denominator * high.denominator // math.gcd(
        low.denominator, high.denominator
    )
    return _dyadic_codeword(
        low.numerator * (den // low.denominator),
        high.numerator * (den // high.denominator),
        den,
    )


def _renorm64_tail(low: int, rng: int, emitted: bytearray) -> Codeword:
    """Flush: append the fewest bytes pinning a value inside [low, low+rng);
    the decoder zero-pads reads past the payload end."""
    high = low + rng
    t = 64
    while t >= 0:
        x = ((low + (1 << t) - 1) >> t) << t
        if low <= x < high:
            break
        t -= 1
    out = bytes(emitted)
    for j in range((64 - t + 7) // 8):
        out += bytes(((x >> (56 - 8 * j)) & 0xFF,))
    return Codeword(data=out, bit_length=8 * len(out))


# ---------------------------------------------------------------------------
# bulk encode / decode
# ---------------------------------------------------------------------------

def _indices_for(symbols, view: CodingView) -> list[int]:
    if not symbols:
        return []
    bound = max(view.index_of) + 1
    lut = np.full(bound, -1, dtype=np.int64)
    for s, i in view.index_of.items():
        lut[s] = i
    arr = np.asarray(symbols, dtype=np.int64)
    if arr.min() < 0 or arr.max() >= bound:
        bad = arr[(arr < 0) | (arr >= bound)][0]
        raise UnknownSymbol(f"symbol {int(bad)} not in model")
    mapped = lut[arr]
    missing = np.flatnonzero(mapped < 0)
    if missing.size:
        raise UnknownSymbol(f"symbol {int(arr[missing[0]])} not in model")
    return mapped.tolist()


def encode(
    seq: SymbolSequence, model: Model, backend: str = BACKEND_EXACT
) -> tuple[Codeword, int]:
    """Fold the interval update over the whole sequence.

    Returns the codeword and the iteration count (one per coded symbol).
    With a GroupedModel, each symbol is coded as its group's index.
    """
    view = model.coding_view()
    indices = _indices_for(seq.symbols, view)
    if backend == BACKEND_EXACT:
        total = view.total
        cum = _prefix_sums(view.counts)
        counts = view.counts
        a, w = 0, 1
        for i in indices:
            a = a * total + w * cum[i]
            w = w * counts[i]
        return _dyadic_codeword(a, a + w, total ** len(indices)), len(indices)
    if backend != BACKEND_RENORM64:
        raise ValueError(f"unknown backend {backend!r}")

    freqs = allocate_frequencies(view.counts, view.total)
    cumf = _prefix_sums(freqs)
    out = bytearray()
    append = out.append
    low, rng = 0, _MASK64
    top, bot, mask = _TOP, _BOT, _MASK64
    for i in indices:
        r = rng >> 32
        low += cumf[i] * r
        rng = r * freqs[i]
        while True:
            if (low ^ (low + rng)) < top:
                pass
            elif rng < bot:
                rng = -low & (bot - 1)
            else:
                break
            append((low >> 56) & 0xFF)
            low = (low << 8) & mask
            rng <<= 8
    return _renorm64_tail(low, rng, out), len(indices)


def decode(
    code: Codeword, model: Model, n_symbols: int, backend: str = BACKEND_EXACT
) -> SymbolSequence:
    """Recover ``n_symbols`` symbols coded under ``model``.

    For a GroupedModel the output carries each group's representative.
    Raises CorruptCodeword when the payload cannot have been produced for
    this model and length (exact: the codeword's dyadic interval must fit
    the reconstructed final interval; renorm64: the code value must stay
    inside the frequency total).
    """
    view = model.coding_view()
    if backend == BACKEND_EXACT:
        indices = _decode_exact(code, view, n_symbols)
    elif backend == BACKEND_RENORM64:
        indices = _decode_renorm64(code, view, n_symbols)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    emits = view.emits
    symbols = tuple(emits[i] for i in indices)
    return SymbolSequence(symbols=symbols, alphabet_bound=max(emits) + 1)


def _decode_exact(code: Codeword, view: CodingView, n_symbols: int) -> list[int]:
    cum = _prefix_sums(view.counts)
    counts, total = view.counts, view.total
    m = code.value_numerator()
    # residual position of the code value inside the current interval
    p, q = m, 1 << code.bit_length
    # absolute interval for the final containment check
    a, w = 0, 1
    out = []
    bisect = bisect_right
    for _ in range(n_symbols):
        u = (p * total) // q
        i = bisect(cum, u) - 1
        if i >= len(counts):  # u >= total: value outside [0, 1)
            raise CorruptCodeword("code value exits the interval")
        p = p * total - cum[i] * q
        q = q * counts[i]
        a = a * total + w * cum[i]
        w = w * counts[i]
        out.append(i)
    den = total**n_symbols
    if not (m * den >= (a << code.bit_length)
            and (m + 1) * den <= ((a + w) << code.bit_length)):
        raise CorruptCodeword(
            "codeword's dyadic interval does not fit the decoded interval"
        )
    return out


def _decode_renorm64(code: Codeword, view: CodingView, n_symbols: int) -> list[int]:
    freqs = allocate_frequencies(view.counts, view.total)
    cumf = _prefix_sums(freqs)
    data = code.data
    nbytes = len(data)
    buf = int.from_bytes(data[:8], "big") << (8 * max(0, 8 - nbytes))
    pos = 8
    low, rng = 0, _MASK64
    top, bot, mask, totf = _TOP, _BOT, _MASK64, FREQ_TOTAL
    out = []
    bisect = bisect_right
    for _ in range(n_symbols):
        r = rng >> 32
        v = (buf - low) // r
        if v >= totf:
            raise CorruptCodeword("code value exits the frequency total")
        i = bisect(cumf, v) - 1
        low += cumf[i] * r
        rng = r * freqs[i]
        while True:
            if (low ^ (low + rng)) < top:
                pass
            elif rng < bot:
                rng = -low & (bot - 1)
            else:
                break
            b = data[pos] if pos < nbytes else 0
            pos += 1
            buf = ((buf << 8) | b) & mask
            low = (low << 8) & mask
            rng <<= 8
        out.append(i)
    return out
