"""Corpus ingestion -- turn files and inline strings into Sequences.

One mapping is chosen per input so that ``render`` gives back the exact
bytes that were read. With alpha <= 26, an input made only of lowercase
letters maps them by position ('a' -> 0) and one made only of digits maps
them by value ('7' -> 7); such text may end in one newline, which is
dropped from the sequence but remembered by the mapping. Every other input
maps each byte to its raw value. Indices >= alpha are rejected unless
``mod`` remaps them, in which case the round trip is no longer byte-exact.
"""

import logging
import random
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Tuple

from maxleak.lz78 import Sequence

logger = logging.getLogger("maxleak.corpus")

_LETTERS = b"abcdefghijklmnopqrstuvwxyz"
_DIGITS = b"0123456789"
TEXT_ALPHA_LIMIT = len(_LETTERS)

MAPPING_KINDS = ("bytes", "letters", "digits")
_NEWLINES = (b"", b"\n", b"\r\n")


class AlphabetError(ValueError):
    """A symbol lies outside the alphabet and remapping was not requested."""


@dataclass(frozen=True)
class TextMapping:
    """How input bytes became symbols, enough to write them back.

    Attributes:
        kind: "bytes", "letters" or "digits".
        newline: Trailing line ending dropped from a letters or digits input.
    """

    kind: str = "bytes"
    newline: bytes = b""

    def __post_init__(self) -> None:
        if self.kind not in MAPPING_KINDS:
            raise ValueError(f"Unknown mapping {self.kind!r}. Valid: {MAPPING_KINDS}")
        if self.newline not in _NEWLINES:
            raise ValueError(f"unsupported line ending {self.newline!r}")
        if self.kind == "bytes" and self.newline:
            raise ValueError("a bytes mapping keeps its line ending in the sequence")

    def to_tag(self) -> int:
        """4-bit header tag: kind in bits 0-1, line ending in bits 2-3."""
        return MAPPING_KINDS.index(self.kind) | (_NEWLINES.index(self.newline) << 2)

    @classmethod
    def from_tag(cls, tag: int) -> "TextMapping":
        kind, newline = tag & 0x03, tag >> 2
        if kind >= len(MAPPING_KINDS) or newline >= len(_NEWLINES):
            raise ValueError(f"unknown text mapping tag {tag}")
        return cls(MAPPING_KINDS[kind], _NEWLINES[newline])

    def symbol(self, byte: int) -> int:
        """Alphabet index of one input byte under this mapping."""
        if self.kind == "letters":
            return byte - _LETTERS[0]
        if self.kind == "digits":
            return byte - _DIGITS[0]
        return byte

    def byte(self, symbol: int) -> int:
        table = {"letters": _LETTERS, "digits": _DIGITS}.get(self.kind)
        if table is None:
            if symbol > 0xFF:
                raise ValueError(f"symbol {symbol} does not fit in a byte")
            return symbol
        if symbol >= len(table):
            raise ValueError(f"symbol {symbol} has no {self.kind} character")
        return table[symbol]


def choose_mapping(data: bytes, alpha: int) -> Tuple[TextMapping, bytes]:
    """Pick the mapping for ``data`` and return it with the bytes it maps.

    Letters and digits apply only when alpha <= 26 and every byte (after one
    optional trailing newline) is of that kind.
    """
    if alpha <= TEXT_ALPHA_LIMIT:
        for newline in (b"\r\n", b"\n", b""):
            if not data.endswith(newline):
                continue
            body = data[: len(data) - len(newline)]
            if not body:
                break
            if all(b in _LETTERS for b in body):
                return TextMapping("letters", newline), body
            if all(b in _DIGITS for b in body):
                return TextMapping("digits", newline), body
    return TextMapping("bytes"), data


def map_bytes(data: bytes, alpha: int, mod: bool = False) -> Tuple[Sequence, TextMapping]:
    """Map raw bytes to a Sequence over {0..alpha-1} and report the mapping used.

    Raises:
        ValueError: If ``data`` is empty or only a line ending.
        AlphabetError: If an index is >= alpha and ``mod`` is False.
    """
    if alpha < 2:
        raise ValueError(f"alpha must be >= 2, got {alpha}")
    if data in _NEWLINES:
        raise ValueError("input must be nonempty")
    mapping, body = choose_mapping(data, alpha)
    symbols: List[int] = []
    for pos, byte in enumerate(body):
        value = mapping.symbol(byte)
        if value >= alpha:
            if not mod:
                raise AlphabetError(
                    f"byte 0x{byte:02X} at offset {pos} maps to {value} >= alpha {alpha} "
                    f"under the {mapping.kind} mapping (use --mod to remap)"
                )
            value %= alpha
        symbols.append(value)
    return Sequence(tuple(symbols), alpha), mapping


def from_bytes(data: bytes, alpha: int, mod: bool = False) -> Sequence:
    """Sequence half of ``map_bytes``."""
    return map_bytes(data, alpha, mod)[0]


def from_text(text: str, alpha: int, mod: bool = False) -> Sequence:
    """Inline-string form of ``from_bytes``."""
    return from_bytes(text.encode("utf-8"), alpha, mod)


def read_mapped(path: str, alpha: int, mod: bool = False) -> Tuple[Sequence, TextMapping, bytes]:
    """Read a file, returning its Sequence, the mapping chosen and the raw bytes.

    Raises:
        OSError: If the file cannot be read.
        ValueError: If the file is empty.
        AlphabetError: On an out-of-alphabet byte without ``mod``.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    x, mapping = map_bytes(data, alpha, mod)
    logger.info(
        "ingested %s: n=%d mapping=%s histogram=%s", path, len(x), mapping.kind, histogram(x)
    )
    return x, mapping, data


def ingest(path: str, alpha: int, mod: bool = False) -> Sequence:
    """Read a file into a Sequence and log its length and histogram."""
    return read_mapped(path, alpha, mod)[0]


def histogram(x: Sequence) -> Dict[int, int]:
    """Symbol counts over the full alphabet, zeros included."""
    counts = Counter(x.symbols)
    return {a: counts.get(a, 0) for a in range(x.alpha)}


def describe(x: Sequence) -> dict:
    """Summary emitted alongside codec reports."""
    return {"n": len(x), "alpha": x.alpha, "histogram": {str(a): c for a, c in histogram(x).items()}}


def periodic(pattern: str, n: int, alpha: int = 2) -> Sequence:
    """The first n symbols of ``pattern`` repeated."""
    base = from_text(pattern, alpha)
    reps = -(-n // len(base))
    return Sequence((base.symbols * reps)[:n], alpha)


def random_sequence(rng: random.Random, n: int, alpha: int = 2) -> Sequence:
    """Uniform i.i.d. symbols from the run's seeded generator."""
    return Sequence(tuple(rng.randrange(alpha) for _ in range(n)), alpha)


def render(x: Sequence, mapping: TextMapping) -> bytes:
    """Inverse of ``map_bytes``: the bytes ``x`` was read from under ``mapping``.

    Raises:
        ValueError: If a symbol has no byte under ``mapping``.
    """
    return bytes(mapping.byte(s) for s in x.symbols) + mapping.newline
