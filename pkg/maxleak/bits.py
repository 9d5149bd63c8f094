"""Bit strings and MSB-first bit writer/reader used by the codecs and the cipher."""

from dataclasses import dataclass
from typing import Iterable, List, Tuple


class BitsExhaustedError(ValueError):
    """A read ran past the end of the available bits."""


@dataclass(frozen=True)
class Bits:
    """An immutable binary string; the empty string is the null word."""

    text: str = ""

    def __post_init__(self) -> None:
        if self.text.strip("01"):
            raise ValueError(f"Bits may only contain '0' and '1': {self.text!r}")

    @classmethod
    def from_int(cls, value: int, width: int) -> "Bits":
        """Big-endian ``width``-bit representation of ``value``."""
        if width == 0:
            if value:
                raise ValueError(f"{value} does not fit in 0 bits")
            return cls("")
        if value < 0 or value >= 1 << width:
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls(format(value, f"0{width}b"))

    @classmethod
    def zeros(cls, width: int) -> "Bits":
        return cls("0" * width)

    def to_int(self) -> int:
        return int(self.text, 2) if self.text else 0

    def __len__(self) -> int:
        return len(self.text)

    def __add__(self, other: "Bits") -> "Bits":
        return Bits(self.text + other.text)

    def __getitem__(self, item: slice) -> "Bits":
        if not isinstance(item, slice):
            raise TypeError("Bits only supports slicing")
        return Bits(self.text[item])

    def xor(self, other: "Bits") -> "Bits":
        """Bitwise XOR of two strings of equal length."""
        if len(other) != len(self):
            raise ValueError(f"XOR of unequal lengths {len(self)} and {len(other)}")
        return Bits("".join("1" if a != b else "0" for a, b in zip(self.text, other.text)))

    def __str__(self) -> str:
        return self.text


def all_bitstrings(width: int) -> Iterable[Bits]:
    """Every binary string of the given width in lexicographic order."""
    for value in range(1 << width):
        yield Bits.from_int(value, width)


def concat(parts: Iterable[Bits]) -> Bits:
    return Bits("".join(p.text for p in parts))


class BitWriter:
    """Accumulates fixed-width big-endian fields into a bit string."""

    def __init__(self) -> None:
        self._chunks: List[str] = []
        self._length = 0

    def write(self, value: int, width: int) -> None:
        """Append ``value`` as a ``width``-bit field (width 0 writes nothing)."""
        if width == 0:
            return
        self._chunks.append(Bits.from_int(value, width).text)
        self._length += width

    def write_bits(self, bits: Bits) -> None:
        self._chunks.append(bits.text)
        self._length += len(bits)

    def __len__(self) -> int:
        return self._length

    def getvalue(self) -> Bits:
        return Bits("".join(self._chunks))


class BitReader:
    """Reads fixed-width big-endian fields from a bit string."""

    def __init__(self, bits: Bits):
        self._text = bits.text
        self._offset = 0

    def read(self, width: int) -> int:
        """Consume ``width`` bits and return them as an unsigned integer."""
        if width == 0:
            return 0
        end = self._offset + width
        if end > len(self._text):
            raise BitsExhaustedError(
                f"need {width} bits at offset {self._offset}, only {self.remaining()} left"
            )
        value = int(self._text[self._offset:end], 2)
        self._offset = end
        return value

    def read_bits(self, width: int) -> Bits:
        start = self._offset
        self.read(width)
        return Bits(self._text[start:self._offset])

    def remaining(self) -> int:
        return len(self._text) - self._offset

    @property
    def offset(self) -> int:
        return self._offset


def pack(bits: Bits) -> bytes:
    """Pack bits MSB-first into bytes, zero-padding the final byte."""
    pad = (-len(bits)) % 8
    text = bits.text + "0" * pad
    return bytes(int(text[i:i + 8], 2) for i in range(0, len(text), 8))


def unpack(data: bytes, length: int = -1) -> Bits:
    """Unpack bytes MSB-first; keep only the first ``length`` bits when given."""
    text = "".join(format(b, "08b") for b in data)
    if length >= 0:
        if length > len(text):
            raise BitsExhaustedError(f"need {length} bits, only {len(text)} available")
        text = text[:length]
    return Bits(text)


def split_header(data: bytes, size: int) -> Tuple[bytes, bytes]:
    """Split a fixed-size byte header from the rest of a file body."""
    if len(data) < size:
        raise BitsExhaustedError(f"header needs {size} bytes, got {len(data)}")
    return data[:size], data[size:]
