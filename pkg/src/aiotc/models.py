"""Symbol probability models and their transforms.

A model is a frequency table: exact rational probabilities are kept as
integer counts over a common total, so every transform (rounding, sorting,
grouping) preserves unit mass exactly. The cumulative table follows the
entry order, which is by ascending symbol after construction and by
descending probability after :func:`sort_descending`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    BadLevelCount,
    DegenerateModel,
    EmptyInput,
    LevelOutOfRange,
    UnknownSymbol,
)
from .images import GrayImage, SymbolSequence

__all__ = [
    "ProbabilityModel",
    "GroupedModel",
    "Group",
    "QuantizerSpec",
    "CodingView",
    "build_model",
    "cumulative_of",
    "round_probabilities",
    "round_probabilities_detailed",
    "sort_descending",
    "group_similar",
    "quantize",
    "dequantize",
]

ORDER_BY_SYMBOL = "by-symbol"
ORDER_BY_PROB_DESC = "by-probability-desc"


@dataclass(frozen=True)
class CodingView:
    """What the arithmetic coder needs from any model: an indexed frequency
    table plus the symbol each entry stands for at decode time."""

    counts: tuple[int, ...]
    total: int
    index_of: dict[int, int]
    emits: tuple[int, ...]

    def cumulative_counts(self) -> list[int]:
        out = [0]
        for c in self.counts:
            out.append(out[-1] + c)
        return out


@dataclass(frozen=True)
class ProbabilityModel:
    """Alphabet with exact probabilities counts[i]/total and prefix sums."""

    symbols: tuple[int, ...]
    counts: tuple[int, ...]
    total: int
    order_tag: str = ORDER_BY_SYMBOL

    def __post_init__(self) -> None:
        if not self.symbols:
            raise EmptyInput("model needs at least one symbol")
        if len(self.symbols) != len(self.counts):
            raise ValueError("symbols and counts length mismatch")
        if any(c <= 0 for c in self.counts):
            raise ValueError("zero-probability symbols are never retained")
        if sum(self.counts) != self.total:
            raise ValueError("counts do not sum to total")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols")

    def __len__(self) -> int:
        return len(self.symbols)

    def probability(self, symbol: int) -> Fraction:
        return cumulative_of(self, symbol)[1]

    def probabilities(self) -> list[Fraction]:
        return [Fraction(c, self.total) for c in self.counts]

    def cumulative(self) -> list[Fraction]:
        out, run = [], 0
        for c in self.counts:
            out.append(Fraction(run, self.total))
            run += c
        return out

    def coding_view(self) -> CodingView:
        return CodingView(
            counts=self.counts,
            total=self.total,
            index_of={s: i for i, s in enumerate(self.symbols)},
            emits=self.symbols,
        )


@dataclass(frozen=True)
class Group:
    members: tuple[int, ...]
    count: int
    representative: int


@dataclass(frozen=True)
class GroupedModel:
    """Partition of a model's alphabet into probability-similar groups.

    The coding alphabet is the group index; decoding emits each group's
    representative intensity.
    """

    groups: tuple[Group, ...]
    total: int
    base: str = ""
    _member_index: dict[int, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.groups:
            raise EmptyInput("grouped model needs at least one group")
        if sum(g.count for g in self.groups) != self.total:
            raise ValueError("group counts do not sum to total")
        seen: dict[int, int] = {}
        for i, g in enumerate(self.groups):
            if not g.members:
                raise ValueError("empty group")
            if not 0 <= g.representative <= 255:
                raise ValueError("representative outside [0, 255]")
            for m in g.members:
                if m in seen:
                    raise ValueError(f"symbol {m} in two groups")
                seen[m] = i
        self._member_index.update(seen)

    def __len__(self) -> int:
        return len(self.groups)

    def group_probability(self, index: int) -> Fraction:
        return Fraction(self.groups[index].count, self.total)

    def group_index(self, symbol: int) -> int:
        try:
            return self._member_index[symbol]
        except KeyError:
            raise UnknownSymbol(f"symbol {symbol} is in no group") from None

    def representatives(self) -> tuple[int, ...]:
        return tuple(g.representative for g in self.groups)

    def index_model(self) -> ProbabilityModel:
        """The group-index alphabet as a plain model (entry order preserved)."""
        return ProbabilityModel(
            symbols=tuple(range(len(self.groups))),
            counts=tuple(g.count for g in self.groups),
            total=self.total,
            order_tag=ORDER_BY_SYMBOL,
        )

    def coding_view(self) -> CodingView:
        return CodingView(
            counts=tuple(g.count for g in self.groups),
            total=self.total,
            index_of=dict(self._member_index),
            emits=self.representatives(),
        )


def build_model(seq: SymbolSequence) -> ProbabilityModel:
    """Frequency-of-occurrence model: P(s) = count(s) / len(seq)."""
    if len(seq) == 0:
        raise EmptyInput("cannot model an empty sequence")
    arr = np.asarray(seq.symbols, dtype=np.int64)
    counts = np.bincount(arr)
    present = np.flatnonzero(counts)
    return ProbabilityModel(
        symbols=tuple(int(s) for s in present),
        counts=tuple(int(counts[s]) for s in present),
        total=len(seq),
        order_tag=ORDER_BY_SYMBOL,
    )


def cumulative_of(model: ProbabilityModel, symbol: int) -> tuple[Fraction, Fraction]:
    """(C(s), P(s)): prefix sum of earlier entries and the symbol's own mass."""
    run = 0
    for s, c in zip(model.symbols, model.counts):
        if s == symbol:
            return Fraction(run, model.total), Fraction(c, model.total)
        run += c
    raise UnknownSymbol(f"symbol {symbol} not in model")


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def round_probabilities_detailed(
    model: ProbabilityModel, decimals: int
) -> tuple[ProbabilityModel, dict[int, int]]:
    """Round probabilities half-up to ``decimals`` places and renormalize.

    Entries whose rounded probability is zero are absorbed by the nearest
    surviving entry (the previous one, or the next one when no previous
    survivor exists). Returns the new model and the absorbed-symbol ->
    absorbing-symbol map, which callers use to remap sequences before coding.
    """
    if not 1 <= decimals <= 12:
        raise ValueError(f"decimals must be in [1, 12], got {decimals}")
    scale = 10**decimals
    # half-up rounding of counts[i]/total * scale, in integers
    rounded = [
        (2 * c * scale + model.total) // (2 * model.total) for c in model.counts
    ]
    survivors = [i for i, r in enumerate(rounded) if r > 0]
    if not survivors:
        raise DegenerateModel(
            f"every probability rounds to zero at {decimals} decimals"
        )
    aliases: dict[int, int] = {}
    prev = None
    for i, r in enumerate(rounded):
        if r > 0:
            prev = i
        else:
            target = prev if prev is not None else survivors[0]
            aliases[model.symbols[i]] = model.symbols[target]
    new_total = sum(rounded[i] for i in survivors)
    return (
        ProbabilityModel(
            symbols=tuple(model.symbols[i] for i in survivors),
            counts=tuple(rounded[i] for i in survivors),
            total=new_total,
            order_tag=model.order_tag,
        ),
        aliases,
    )


def round_probabilities(model: ProbabilityModel, decimals: int) -> ProbabilityModel:
    return round_probabilities_detailed(model, decimals)[0]


def sort_descending(model: ProbabilityModel) -> ProbabilityModel:
    """Reorder entries by probability descending, ties by symbol ascending."""
    order = sorted(
        range(len(model.symbols)),
        key=lambda i: (-model.counts[i], model.symbols[i]),
    )
    return ProbabilityModel(
        symbols=tuple(model.symbols[i] for i in order),
        counts=tuple(model.counts[i] for i in order),
        total=model.total,
        order_tag=ORDER_BY_PROB_DESC,
    )


def group_similar(
    model: ProbabilityModel,
    threshold: Fraction | int,
    max_group_size: int = 6,
) -> GroupedModel:
    """Single left-to-right scan over a descending-sorted model.

    An entry joins the open group iff its probability is within ``threshold``
    of the group head's and the group is not full; otherwise it starts a new
    group. The representative is the probability-weighted mean of the member
    symbol values, rounded half-up.
    """
    if model.order_tag != ORDER_BY_PROB_DESC:
        raise ValueError("group_similar requires a descending-sorted model")
    if max_group_size < 1:
        raise ValueError("max_group_size must be >= 1")
    thr = Fraction(threshold)

    groups: list[Group] = []
    members: list[int] = []
    counts: list[int] = []
    head_count = 0

    def close() -> None:
        total_c = sum(counts)
        rep = _round_half_up(
            Fraction(sum(c * s for c, s in zip(counts, members)), total_c)
        )
        groups.append(Group(members=tuple(members), count=total_c, representative=rep))

    for s, c in zip(model.symbols, model.counts):
        if members and len(members) < max_group_size and (
            abs(Fraction(head_count - c, model.total)) <= thr
        ):
            members.append(s)
            counts.append(c)
        else:
            if members:
                close()
            members, counts, head_count = [s], [c], c
    close()
    return GroupedModel(
        groups=tuple(groups),
        total=model.total,
        base=f"{model.order_tag} model, {len(model)} symbols",
    )


@dataclass(frozen=True)
class QuantizerSpec:
    """Uniform intensity quantizer with midpoint reconstruction."""

    levels: int

    def __post_init__(self) -> None:
        if not 2 <= self.levels <= 256:
            raise BadLevelCount(f"levels must be in [2, 256], got {self.levels}")

    @property
    def step(self) -> int:
        # 256/levels when it divides evenly, else the ceiling
        return -(-256 // self.levels)

    @property
    def midpoint_offset(self) -> int:
        return self.step // 2


def quantize(img: GrayImage, spec: QuantizerSpec) -> GrayImage:
    """Map every pixel p to its level index floor(p / step)."""
    levels = (img.as_array() // spec.step).astype(np.uint8)
    return GrayImage(width=img.width, height=img.height, pixels=levels.tobytes())


def dequantize(img: GrayImage, spec: QuantizerSpec) -> GrayImage:
    """Midpoint reconstruction: level q -> q*step + floor(step/2), clamped."""
    arr = img.as_array().astype(np.int64)
    if arr.max() >= spec.levels:
        raise LevelOutOfRange(
            f"level {int(arr.max())} outside [0, {spec.levels - 1}]"
        )
    recon = np.minimum(arr * spec.step + spec.midpoint_offset, 255).astype(np.uint8)
    return GrayImage(width=img.width, height=img.height, pixels=recon.tobytes())
