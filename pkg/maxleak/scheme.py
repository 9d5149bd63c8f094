"""Universal encrypter: capped LZ78 compression, then a one-time pad on the leading codeword bits.

With normalized leakage allowance lambda, the first m = max(0, L' - floor(n lambda))
bits of the capped codeword are XORed with fresh key bits and the rest is sent
in the clear. The ciphertext length is public.
"""

import logging
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Set, Tuple

from maxleak.bits import Bits, BitReader, BitsExhaustedError, BitWriter, pack, split_header, unpack
from maxleak.config import DESK, MAX_LAMBDA_TERM, AuditBudget
from maxleak.fse import all_sequences
from maxleak.keysource import KeySource
from maxleak.leakage import Channel, scheme_channel
from maxleak.lz78 import (
    Codeword,
    MAX_ALPHA,
    MAX_TEXT_TAG,
    MalformedHeaderError,
    Sequence,
    SymbolRangeError,
    capped_decode,
    capped_encode,
    raw_symbols,
    raw_value,
    raw_width,
)

logger = logging.getLogger("maxleak.scheme")

MAGIC = 0x4D
# magic, alpha, n, lambda p, lambda q, m, flags, body bit count
_HEADER = struct.Struct(">BHQIIQBQ")
_FLAG_PADDED = 0x01

COMPRESSORS = ("capped_lz78", "raw")


class HeaderMismatchError(ValueError):
    """The ciphertext header disagrees with the receiver's configuration."""


@dataclass(frozen=True)
class SchemeConfig:
    """Parameters of the LZ + one-time pad encrypter."""

    lam: Fraction = Fraction(0)
    alpha: int = 2
    compressor: str = "capped_lz78"
    padded: bool = False  # pad every codeword to the cap length before the pad

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not 2 <= self.alpha <= MAX_ALPHA:
            raise ValueError(f"alpha must be in 2..{MAX_ALPHA}, got {self.alpha}")
        if max(self.lam.numerator, self.lam.denominator) > MAX_LAMBDA_TERM:
            raise ValueError(f"lambda {self.lam} does not fit the 32-bit header fields")
        if self.compressor not in COMPRESSORS:
            raise ValueError(f"Unknown compressor {self.compressor!r}. Valid: {COMPRESSORS}")

    def clear_allowance(self, n: int) -> int:
        """floor(n lambda): codeword bits allowed in the clear."""
        return math.floor(n * self.lam)


@dataclass(frozen=True)
class Ciphertext:
    """Header fields sent in the clear plus the (partially padded) body.

    ``text_tag`` travels in flags bits 1-4 so the receiver can restore the
    original bytes; decryption itself ignores it.
    """

    alpha: int
    n: int
    lam: Fraction
    m: int
    body: Bits
    padded: bool = False
    text_tag: int = 0

    def to_bytes(self) -> bytes:
        if not 0 <= self.text_tag <= MAX_TEXT_TAG:
            raise ValueError(f"text tag must be in 0..{MAX_TEXT_TAG}, got {self.text_tag}")
        flags = (_FLAG_PADDED if self.padded else 0) | (self.text_tag << 1)
        head = _HEADER.pack(
            MAGIC, self.alpha, self.n, self.lam.numerator, self.lam.denominator,
            self.m, flags, len(self.body),
        )
        return head + pack(self.body)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Ciphertext":
        try:
            head, rest = split_header(data, _HEADER.size)
            magic, alpha, n, p, q, m, flags, length = _HEADER.unpack(head)
            if magic != MAGIC:
                raise MalformedHeaderError(f"bad magic byte 0x{magic:02X}, expected 0x{MAGIC:02X}")
            if alpha < 2 or n < 1 or q == 0 or m > length or flags >> 5:
                raise MalformedHeaderError(f"impossible ciphertext header {(alpha, n, p, q, m, flags)}")
            body = unpack(rest, length)
        except BitsExhaustedError as exc:
            raise MalformedHeaderError(str(exc)) from None
        return cls(alpha, n, Fraction(p, q), m, body, bool(flags & _FLAG_PADDED), flags >> 1)


def padded_length(n: int, cfg: SchemeConfig) -> int:
    """Length every codeword is padded to: the cap ceil(n log2 alpha) (+1 for the flag)."""
    width = raw_width(n, cfg.alpha)
    return width + 1 if cfg.compressor == "capped_lz78" else width


def codeword_bits(x: Sequence, cfg: SchemeConfig) -> Bits:
    """Compressed representation before encryption (padded when configured)."""
    if cfg.compressor == "capped_lz78":
        bits = capped_encode(x).body
    else:
        writer = BitWriter()
        writer.write(raw_value(x), raw_width(len(x), x.alpha))
        bits = writer.getvalue()
    if cfg.padded:
        bits = bits + Bits.zeros(padded_length(len(x), cfg) - len(bits))
    return bits


def key_demand(x: Sequence, cfg: SchemeConfig) -> int:
    """m(x) = max(0, L'(x) - floor(n lambda))."""
    return max(0, len(codeword_bits(x, cfg)) - cfg.clear_allowance(len(x)))


def key_rate(x: Sequence, cfg: SchemeConfig) -> Fraction:
    """Key bits per source symbol, m(x) / n."""
    if len(x) == 0:
        raise ValueError("sequence must be nonempty")
    return Fraction(key_demand(x, cfg), len(x))


def encrypt(x: Sequence, cfg: SchemeConfig, key: KeySource) -> Ciphertext:
    """Compress x, then one-time pad the first m codeword bits.

    Raises:
        KeyExhaustedError: If a file-mode key source runs out.
    """
    if len(x) == 0:
        raise ValueError("sequence must be nonempty")
    if x.alpha != cfg.alpha:
        raise ValueError(f"sequence alphabet {x.alpha} does not match config alphabet {cfg.alpha}")
    bits = codeword_bits(x, cfg)
    m = max(0, len(bits) - cfg.clear_allowance(len(x)))
    body = bits[:m].xor(key.consume(m)) + bits[m:]
    logger.debug("encrypted n=%d: L'=%d, m=%d", len(x), len(bits), m)
    return Ciphertext(cfg.alpha, len(x), cfg.lam, m, body, cfg.padded)


def decrypt(ct: Ciphertext, cfg: SchemeConfig, key: KeySource) -> Sequence:
    """Legitimate receiver: strip the pad with the same key bits, then decompress.

    Raises:
        HeaderMismatchError: If the header disagrees with ``cfg``.
        KeyExhaustedError: If a file-mode key source runs out.
    """
    if (ct.alpha, ct.lam, ct.padded) != (cfg.alpha, cfg.lam, cfg.padded):
        raise HeaderMismatchError(
            f"ciphertext (alpha={ct.alpha}, lambda={ct.lam}, padded={ct.padded}) does not match "
            f"config (alpha={cfg.alpha}, lambda={cfg.lam}, padded={cfg.padded})"
        )
    expected_m = max(0, len(ct.body) - cfg.clear_allowance(ct.n))
    if ct.m != expected_m:
        raise HeaderMismatchError(f"header m={ct.m} but body implies m={expected_m}")
    bits = ct.body[:ct.m].xor(key.consume(ct.m)) + ct.body[ct.m:]
    if cfg.compressor == "capped_lz78":
        return capped_decode(Codeword(ct.alpha, ct.n, bits, capped=True))
    try:
        value = BitReader(bits).read(raw_width(ct.n, ct.alpha))
    except BitsExhaustedError as exc:
        raise HeaderMismatchError(f"raw body too short: {exc}") from None
    if value >= ct.alpha ** ct.n:
        raise SymbolRangeError(f"raw block {value} exceeds alpha**n")
    return Sequence(raw_symbols(value, ct.alpha, ct.n), ct.alpha)


def leakage_upper_bound(n: int, lam: Fraction, l_max: int) -> float:
    """n lambda + log2 L_max."""
    if l_max < 1:
        raise ValueError(f"L_max must be >= 1, got {l_max}")
    return float(n * Fraction(lam)) + math.log2(l_max)


def capped_leakage_bound(n: int, lam: Fraction, alpha: int = 2) -> float:
    """The bound with the capped L_max = ceil(n log2 alpha) + 1 substituted."""
    return leakage_upper_bound(n, lam, raw_width(n, alpha) + 1)


def length_profile(
    n: int, cfg: SchemeConfig, budget: AuditBudget = DESK
) -> Tuple[Set[int], int]:
    """Set of codeword lengths over all inputs of length n, and their maximum L_max."""
    budget.check(cfg.alpha ** n, f"length profile at n={n}")
    lengths = {len(codeword_bits(x, cfg)) for x in all_sequences(cfg.alpha, n)}
    return lengths, max(lengths)


def channel(n: int, cfg: SchemeConfig, budget: AuditBudget = DESK) -> Channel:
    """Exact channel from x^n to the ciphertext body over all inputs and keys."""
    budget.check(cfg.alpha ** n, f"scheme channel at n={n}")

    def run_one(x: Sequence, key_bits: Bits) -> Tuple[Bits, int]:
        ct = encrypt(x, cfg, KeySource.from_bits(key_bits))
        return ct.body, ct.m

    ch = scheme_channel(
        run_one,
        lambda x: key_demand(x, cfg),
        all_sequences(cfg.alpha, n),
        full_space=cfg.alpha ** n,
        budget=budget,
    )
    logger.info(
        "scheme channel n=%d lambda=%s padded=%s: %d rows", n, cfg.lam, cfg.padded, len(ch.rows)
    )
    return ch


def clear_suffix(x: Sequence, cfg: SchemeConfig) -> Bits:
    """The bits sent unencrypted; a function of x alone."""
    bits = codeword_bits(x, cfg)
    return bits[key_demand(x, cfg):]


def random_key_source(seed: Optional[int]) -> KeySource:
    """Seeded PRNG key source, seed 0 when none is given."""
    return KeySource.from_seed(0 if seed is None else seed)
