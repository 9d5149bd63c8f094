"""LZ78 incremental parsing, bit-exact codec, capped codec and LZ complexity.

The body format writes, for the j-th phrase, its parent pointer in
ceil(log2 j) bits followed by the new symbol in ceil(log2 alpha) bits. A final
incomplete phrase is written as a pointer only; the decoder stops after n
symbols, which travel in the header.
"""

import logging
import math
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence as SequenceT, Tuple

from maxleak.bits import BitReader, Bits, BitsExhaustedError, BitWriter, pack, split_header, unpack

logger = logging.getLogger("maxleak.lz78")

MAGIC = 0x4C
_HEADER = struct.Struct(">BBHQ")  # magic, flags, alpha, n
_FLAG_CAPPED = 0x01
MAX_ALPHA = 0xFFFF
MAX_TEXT_TAG = 0x0F


class DecodeError(ValueError):
    """Base class for codeword decoding failures."""


class MalformedHeaderError(DecodeError):
    """The header is missing, has the wrong magic, or carries impossible values."""


class PointerRangeError(DecodeError):
    """A phrase pointer refers to a phrase that does not exist yet or overruns n."""


class SymbolRangeError(DecodeError):
    """A decoded symbol or raw block lies outside the alphabet."""


class TruncatedBodyError(DecodeError):
    """The body ended before n symbols were reconstructed."""


@dataclass(frozen=True)
class Sequence:
    """An individual sequence over the alphabet {0, ..., alpha-1}."""

    symbols: Tuple[int, ...]
    alpha: int = 2

    def __post_init__(self) -> None:
        if self.alpha < 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        for s in self.symbols:
            if not 0 <= s < self.alpha:
                raise ValueError(f"symbol {s} outside alphabet of size {self.alpha}")

    @classmethod
    def of(cls, symbols: SequenceT[int], alpha: int = 2) -> "Sequence":
        return cls(tuple(symbols), alpha)

    @classmethod
    def from_text(cls, text: str, alphabet: str = "ab") -> "Sequence":
        """Map letters to indices by their position in ``alphabet`` ("abba" -> 0,1,1,0)."""
        index = {ch: i for i, ch in enumerate(alphabet)}
        try:
            return cls(tuple(index[ch] for ch in text), len(alphabet))
        except KeyError as exc:
            raise ValueError(f"character {exc.args[0]!r} not in alphabet {alphabet!r}") from None

    def to_text(self, alphabet: str = "ab") -> str:
        return "".join(alphabet[s] for s in self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Phrase:
    """One parsed phrase: x[start:start+length] = phrase[parent] + symbol.

    For an incomplete final phrase ``symbol`` is None and ``parent`` is the id
    of the earlier complete phrase it repeats.
    """

    start: int
    length: int
    parent: int
    symbol: Optional[int]

    @property
    def complete(self) -> bool:
        return self.symbol is not None


@dataclass
class PhraseParse:
    """Result of incremental parsing; phrase ids are 1-based, 0 is the empty root."""

    phrases: List[Phrase] = field(default_factory=list)
    last_incomplete: bool = False

    @property
    def c(self) -> int:
        return len(self.phrases)


def _require_nonempty(x: Sequence) -> None:
    if len(x) == 0:
        raise ValueError("sequence must be nonempty")


def parse(x: Sequence) -> PhraseParse:
    """Split ``x`` into the shortest phrases not seen before as complete phrases."""
    _require_nonempty(x)
    children: List[Dict[int, int]] = [{}]  # trie; node id == phrase id
    result = PhraseParse()
    node = 0
    start = 0
    for i, sym in enumerate(x.symbols):
        child = children[node].get(sym)
        if child is not None:
            node = child
            continue
        result.phrases.append(Phrase(start, i - start + 1, node, sym))
        children[node][sym] = len(children)
        children.append({})
        node = 0
        start = i + 1
    if node != 0:
        result.phrases.append(Phrase(start, len(x) - start, node, None))
        result.last_incomplete = True
    return result


def phrase_strings(p: PhraseParse, x: Sequence) -> List[Tuple[int, ...]]:
    """Contents of each phrase, in parse order."""
    return [x.symbols[ph.start:ph.start + ph.length] for ph in p.phrases]


def unnormalized_complexity(c: int) -> float:
    """c log2 c, the unnormalized LZ complexity."""
    return c * math.log2(c) if c > 1 else 0.0


def lz_complexity(x: Sequence) -> float:
    """Normalized LZ complexity c(x) log2 c(x) / n."""
    return unnormalized_complexity(parse(x).c) / len(x)


def code_length_bound(c: int, alpha: int) -> float:
    """Upper bound (c+1) log2(2 alpha (c+1)) on the LZ78 body length."""
    if c < 1 or alpha < 2:
        raise ValueError(f"need c >= 1 and alpha >= 2, got c={c}, alpha={alpha}")
    return (c + 1) * math.log2(2 * alpha * (c + 1))


def code_length_bound_expanded(c: int, alpha: int) -> Tuple[float, float, float]:
    """The three terms c log(c+1), c log(2 alpha), log(2 alpha (c+1)) of the bound."""
    return (
        c * math.log2(c + 1),
        c * math.log2(2 * alpha),
        math.log2(2 * alpha * (c + 1)),
    )


def pointer_width(j: int) -> int:
    """Bits for the pointer of the j-th phrase: ceil(log2 j)."""
    return (j - 1).bit_length()


def symbol_width(alpha: int) -> int:
    """ceil(log2 alpha)."""
    return (alpha - 1).bit_length()


def raw_width(n: int, alpha: int) -> int:
    """ceil(n log2 alpha), computed exactly as the bit length of alpha**n - 1."""
    return (alpha ** n - 1).bit_length()


@dataclass(frozen=True)
class Codeword:
    """A compressed representation: header fields plus body bits.

    ``capped`` marks a body produced by capped_encode (leading flag bit).
    ``text_tag`` is an opaque 4-bit tag the corpus layer uses to restore the
    original bytes; the codec itself never reads it.
    """

    alpha: int
    n: int
    body: Bits
    capped: bool = False
    text_tag: int = 0

    @property
    def body_length(self) -> int:
        return len(self.body)

    def to_bytes(self) -> bytes:
        """Compressed-file layout: magic, flags, alpha (2 bytes BE), n (8 bytes BE), body.

        The body is packed MSB-first. Flags bit 0 is the capped codec; bits 1-4 hold ``text_tag``.

        Raises:
            ValueError: If alpha or the tag do not fit their header fields.
        """
        if not 2 <= self.alpha <= MAX_ALPHA:
            raise ValueError(f"alpha must be in 2..{MAX_ALPHA} to be written, got {self.alpha}")
        if not 0 <= self.text_tag <= MAX_TEXT_TAG:
            raise ValueError(f"text tag must be in 0..{MAX_TEXT_TAG}, got {self.text_tag}")
        flags = (_FLAG_CAPPED if self.capped else 0) | (self.text_tag << 1)
        return _HEADER.pack(MAGIC, flags, self.alpha, self.n) + pack(self.body)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Codeword":
        """Read a compressed file; the codec comes from the header flags."""
        try:
            head, rest = split_header(data, _HEADER.size)
        except BitsExhaustedError as exc:
            raise MalformedHeaderError(str(exc)) from None
        magic, flags, alpha, n = _HEADER.unpack(head)
        if magic != MAGIC:
            raise MalformedHeaderError(f"bad magic byte 0x{magic:02X}, expected 0x{MAGIC:02X}")
        if flags >> 5:
            raise MalformedHeaderError(f"unknown header flags 0x{flags:02X}")
        if alpha < 2 or n < 1:
            raise MalformedHeaderError(f"impossible header alpha={alpha}, n={n}")
        return cls(alpha, n, unpack(rest), bool(flags & _FLAG_CAPPED), flags >> 1)


def _encode_body(x: Sequence, p: PhraseParse, writer: BitWriter) -> None:
    sw = symbol_width(x.alpha)
    for j, ph in enumerate(p.phrases, start=1):
        writer.write(ph.parent, pointer_width(j))
        if ph.symbol is not None:
            writer.write(ph.symbol, sw)


def encode(x: Sequence) -> Codeword:
    """LZ78-encode ``x`` into a pointer-then-symbol body."""
    _require_nonempty(x)
    p = parse(x)
    writer = BitWriter()
    _encode_body(x, p, writer)
    logger.debug("encoded n=%d c=%d into %d body bits", len(x), p.c, len(writer))
    return Codeword(x.alpha, len(x), writer.getvalue())


def _decode_body(reader: BitReader, alpha: int, n: int) -> Tuple[int, ...]:
    sw = symbol_width(alpha)
    strings: List[Tuple[int, ...]] = [()]
    out: List[int] = []
    j = 1
    try:
        while len(out) < n:
            ptr = reader.read(pointer_width(j))
            if ptr >= j:
                raise PointerRangeError(f"phrase {j} points at {ptr}, only {j - 1} phrases exist")
            prefix = strings[ptr]
            remaining = n - len(out)
            if len(prefix) > remaining:
                raise PointerRangeError(
                    f"phrase {j} repeats {len(prefix)} symbols, only {remaining} remain"
                )
            if len(prefix) == remaining and ptr != 0:
                out.extend(prefix)
                break
            sym = reader.read(sw)
            if sym >= alpha:
                raise SymbolRangeError(f"phrase {j} carries symbol {sym} >= alpha {alpha}")
            phrase = prefix + (sym,)
            strings.append(phrase)
            out.extend(phrase)
            j += 1
    except BitsExhaustedError as exc:
        raise TruncatedBodyError(f"body ended after {len(out)} of {n} symbols: {exc}") from None
    return tuple(out)


def decode(cw: Codeword) -> Sequence:
    """Invert encode; trailing bits after the n-th symbol are ignored."""
    if cw.alpha < 2 or cw.n < 1:
        raise MalformedHeaderError(f"impossible header alpha={cw.alpha}, n={cw.n}")
    return Sequence(_decode_body(BitReader(cw.body), cw.alpha, cw.n), cw.alpha)


def raw_value(x: Sequence) -> int:
    value = 0
    for s in x.symbols:
        value = value * x.alpha + s
    return value


def raw_symbols(value: int, alpha: int, n: int) -> Tuple[int, ...]:
    digits = [0] * n
    for i in range(n - 1, -1, -1):
        value, digits[i] = divmod(value, alpha)
    return tuple(digits)


def capped_encode(x: Sequence) -> Codeword:
    """Flag 0 + LZ body when it is strictly shorter than the raw block, else flag 1 + raw."""
    lz = encode(x)
    width = raw_width(len(x), x.alpha)
    writer = BitWriter()
    if lz.body_length < width:
        writer.write(0, 1)
        writer.write_bits(lz.body)
    else:
        writer.write(1, 1)
        writer.write(raw_value(x), width)
    return Codeword(x.alpha, len(x), writer.getvalue(), capped=True)


def capped_decode(cw: Codeword) -> Sequence:
    """Invert capped_encode."""
    if cw.alpha < 2 or cw.n < 1:
        raise MalformedHeaderError(f"impossible header alpha={cw.alpha}, n={cw.n}")
    reader = BitReader(cw.body)
    try:
        flag = reader.read(1)
        if flag == 0:
            return Sequence(_decode_body(reader, cw.alpha, cw.n), cw.alpha)
        value = reader.read(raw_width(cw.n, cw.alpha))
    except BitsExhaustedError as exc:
        raise TruncatedBodyError(f"capped body too short: {exc}") from None
    if value >= cw.alpha ** cw.n:
        raise SymbolRangeError(f"raw block {value} exceeds alpha**n")
    return Sequence(raw_symbols(value, cw.alpha, cw.n), cw.alpha)


def capped_length(x: Sequence) -> int:
    """L'(x) = min(L(x), ceil(n log2 alpha)) + 1."""
    return min(encode(x).body_length, raw_width(len(x), x.alpha)) + 1
