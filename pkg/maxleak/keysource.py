"""Key source -- FIFO supply of key bits for the one-time pad.

Two modes:
    file        -- a fixed byte (or bit) string read MSB-first; running out is an error.
    seeded_prng -- an unlimited stream from ``random.Random(seed)``, for experiments only.
"""

import random
from collections import deque
from typing import Deque, Optional

from maxleak.bits import Bits
from maxleak.fse import KeyExhaustedError

__all__ = ["KeySource", "KeyExhaustedError"]

_CHUNK = 64


class KeySource:
    """Key bits consumed strictly in order; the consumed offset is protocol state.

    One source serves one encryption stream at a time.
    """

    def __init__(self, mode: str, material: bytes = b"", seed: Optional[int] = None):
        if mode not in ("file", "seeded_prng"):
            raise ValueError(f"Unknown key source mode: {mode!r}")
        if mode == "seeded_prng" and seed is None:
            raise ValueError("seeded_prng mode needs a seed")
        self.mode = mode
        self.seed = seed
        self._buffer: Deque[str] = deque("".join(format(b, "08b") for b in material))
        self._rng = random.Random(seed) if mode == "seeded_prng" else None
        self._consumed = 0

    @classmethod
    def from_file(cls, path: str) -> "KeySource":
        with open(path, "rb") as fh:
            return cls("file", fh.read())

    @classmethod
    def from_seed(cls, seed: int) -> "KeySource":
        return cls("seeded_prng", seed=seed)

    @classmethod
    def from_bits(cls, bits: Bits) -> "KeySource":
        """File-mode source over an explicit bit string."""
        source = cls("file")
        source._buffer.extend(bits.text)
        return source

    @classmethod
    def zeros(cls, width: int) -> "KeySource":
        return cls.from_bits(Bits.zeros(width))

    def _refill(self, need: int) -> None:
        while self._rng is not None and len(self._buffer) < need:
            self._buffer.extend(format(self._rng.getrandbits(_CHUNK), f"0{_CHUNK}b"))

    def peek(self, n: int) -> Bits:
        """Look at the next n bits without consuming them."""
        self._refill(n)
        if n > len(self._buffer):
            raise KeyExhaustedError(f"key has {len(self._buffer)} bits left, need {n}")
        return Bits("".join(self._buffer[i] for i in range(n)))

    def consume(self, n: int) -> Bits:
        """Remove and return the next n key bits.

        Raises:
            KeyExhaustedError: In file mode when fewer than n bits remain.
        """
        bits = self.peek(n)
        for _ in range(n):
            self._buffer.popleft()
        self._consumed += n
        return bits

    @property
    def consumed(self) -> int:
        """Total bits consumed so far."""
        return self._consumed

    def remaining(self) -> Optional[int]:
        """Bits left in file mode; None when unlimited."""
        if self._rng is not None:
            return None
        return len(self._buffer)
