"""Exact maximal leakage of finite channels and of encrypter-induced channels.

Leakage is log2 of the sum over outputs y of max_x P(y|x). All channel entries
are dyadic rationals, so the sum and every comparison are exact.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Tuple

from maxleak.bits import Bits, all_bitstrings
from maxleak.config import DESK, AuditBudget
from maxleak.dyadic import ONE, ZERO, DyadicRational, dyadic_sum
from maxleak.fse import EncrypterSpec, all_sequences, key_demand, run
from maxleak.lz78 import Sequence

logger = logging.getLogger("maxleak.leakage")

Row = Dict[Hashable, DyadicRational]


class InputSpaceError(ValueError):
    """The channel's inputs are not the full input space."""


@dataclass
class Channel:
    """A finite channel given row by row: rows[x][y] = P(y|x).

    ``full_space`` is the size of the complete input space when the rows are
    meant to cover it (alpha**n for sequences), else None.
    """

    rows: Dict[Hashable, Row] = field(default_factory=dict)
    full_space: Optional[int] = None

    @property
    def inputs(self) -> List[Hashable]:
        return list(self.rows)

    @property
    def outputs(self) -> List[Hashable]:
        seen: Dict[Hashable, None] = {}
        for row in self.rows.values():
            for y in row:
                seen.setdefault(y, None)
        return list(seen)

    def cond(self, y: Hashable, x: Hashable) -> DyadicRational:
        return self.rows[x].get(y, ZERO)

    def row_sums(self) -> Dict[Hashable, DyadicRational]:
        return {x: dyadic_sum(row.values()) for x, row in self.rows.items()}

    def is_normalized(self) -> bool:
        return all(total == ONE for total in self.row_sums().values())


def identity_channel(m: int) -> Channel:
    """y = x on m inputs."""
    return Channel({x: {x: ONE} for x in range(m)}, full_space=m)


def constant_channel(m: int, outputs: int) -> Channel:
    """Every input maps uniformly onto the same 2**k outputs (outputs must be a power of two)."""
    if outputs & (outputs - 1):
        raise ValueError(f"outputs must be a power of two, got {outputs}")
    p = DyadicRational(1, outputs.bit_length() - 1)
    return Channel({x: {y: p for y in range(outputs)} for x in range(m)}, full_space=m)


@dataclass
class LeakageReport:
    """Maximal leakage of a channel with its exact ingredients."""

    leakage_bits: float
    sum_max: DyadicRational
    witnesses: Dict[Hashable, Hashable]  # y -> an x attaining max_x P(y|x)
    pc_informed: Optional[Fraction] = None
    pc_blind: Optional[Fraction] = None

    @property
    def perfect_secrecy(self) -> bool:
        return self.sum_max == ONE

    def to_dict(self) -> dict:
        return {
            "leakage_bits": self.leakage_bits,
            "sum_max": self.sum_max.to_json(),
            "perfect_secrecy": self.perfect_secrecy,
            "outputs": len(self.witnesses),
            "pc_informed": None if self.pc_informed is None else str(self.pc_informed),
            "pc_blind": None if self.pc_blind is None else str(self.pc_blind),
        }


def _column_maxima(ch: Channel) -> Tuple[Dict[Hashable, DyadicRational], Dict[Hashable, Hashable]]:
    best: Dict[Hashable, DyadicRational] = {}
    witness: Dict[Hashable, Hashable] = {}
    for x, row in ch.rows.items():
        for y, p in row.items():
            if y not in best or p > best[y]:
                best[y] = p
                witness[y] = x
    return best, witness


def maximal_leakage(ch: Channel) -> LeakageReport:
    """log2 sum_y max_x P(y|x), computed exactly up to the final log."""
    if not ch.rows:
        raise ValueError("channel has no inputs")
    best, witness = _column_maxima(ch)
    total = dyadic_sum(best.values())
    report = LeakageReport(total.log2(), total, witness)
    if ch.full_space is not None and len(ch.rows) == ch.full_space:
        report.pc_informed, report.pc_blind, _ = guessing_identity(ch)
    logger.debug("leakage %.6f bits over %d outputs", report.leakage_bits, len(best))
    return report


def perfect_secrecy(ch: Channel) -> bool:
    """True when every row is the same distribution, i.e. leakage is exactly 0."""
    rows = list(ch.rows.values())
    return all(row == rows[0] for row in rows[1:])


def guessing_identity(ch: Channel) -> Tuple[Fraction, Fraction, Fraction]:
    """Correct-guess probabilities of a uniform input with and without the output.

    Returns (pc_informed, pc_blind, ratio); ratio equals 2**leakage exactly.

    Raises:
        InputSpaceError: If the rows do not cover the full input space.
    """
    if ch.full_space is None or len(ch.rows) != ch.full_space:
        raise InputSpaceError(
            f"guessing identity needs the full input space, have {len(ch.rows)} of {ch.full_space}"
        )
    prior = Fraction(1, ch.full_space)
    best: Dict[Hashable, Fraction] = {}
    for row in ch.rows.values():
        for y, p in row.items():
            joint = prior * p.to_fraction()
            if joint > best.get(y, Fraction(0)):
                best[y] = joint
    pc_informed = sum(best.values(), Fraction(0))
    return pc_informed, prior, pc_informed / prior


def merge_outputs(ch: Channel, mapping: Callable[[Hashable], Hashable]) -> Channel:
    """Channel seen through the deterministic post-processing y -> mapping(y)."""
    rows: Dict[Hashable, Row] = {}
    for x, row in ch.rows.items():
        merged: Row = {}
        for y, p in row.items():
            key = mapping(y)
            merged[key] = merged.get(key, ZERO) + p
        rows[x] = merged
    return Channel(rows, ch.full_space)


def induced_channel(spec: EncrypterSpec, n: int, budget: AuditBudget = DESK) -> Channel:
    """Channel from x^n to the per-step output tuple under uniform key bits.

    Each row enumerates all 2**t_n(x) keys; P(y|x) = (#keys giving y) * 2**-t_n(x).
    """
    budget.check(spec.alpha ** n, f"input space at n={n}")
    inputs = list(all_sequences(spec.alpha, n))
    demands = [key_demand(spec, x) for x in inputs]
    budget.check(sum(1 << t for t in demands), f"key enumeration at n={n}")
    rows: Dict[Hashable, Row] = {}
    for x, t in zip(inputs, demands):
        counts: Dict[Hashable, int] = {}
        for key in all_bitstrings(t):
            y = tuple(run(spec, x, key).outputs)
            counts[y] = counts.get(y, 0) + 1
        rows[x] = {y: DyadicRational(c, t) for y, c in counts.items()}
    logger.info("induced channel of %r at n=%d: %d rows", spec.name, n, len(rows))
    return Channel(rows, full_space=spec.alpha ** n)


SchemeEncrypt = Callable[[Sequence, Bits], Tuple[Bits, int]]


def scheme_channel(
    scheme_encrypt: SchemeEncrypt,
    demand: Callable[[Sequence], int],
    inputs: Iterable[Sequence],
    full_space: Optional[int] = None,
    budget: AuditBudget = DESK,
) -> Channel:
    """Channel of a keyed scheme over ciphertext bit strings.

    ``scheme_encrypt(x, key)`` returns (ciphertext, key bits used) and
    ``demand(x)`` the key bits m(x) it needs; every one of the 2**m(x) keys is
    equally likely.
    """
    xs = list(inputs)
    demands = [demand(x) for x in xs]
    budget.check(sum(1 << m for m in demands), "scheme key enumeration")
    rows: Dict[Hashable, Row] = {}
    for x, m in zip(xs, demands):
        counts: Dict[Hashable, int] = {}
        for key in all_bitstrings(m):
            y, used = scheme_encrypt(x, key)
            if used != m:
                raise ValueError(f"scheme used {used} key bits, declared {m}")
            counts[y] = counts.get(y, 0) + 1
        rows[x] = {y: DyadicRational(c, m) for y, c in counts.items()}
    return Channel(rows, full_space)


def _label_to_json(label: Hashable) -> object:
    if isinstance(label, Sequence):
        return {"seq": list(label.symbols), "alpha": label.alpha}
    if isinstance(label, Bits):
        return {"bits": label.text}
    if isinstance(label, tuple):
        return {"tuple": [_label_to_json(v) for v in label]}
    return label


def _label_from_json(data: object) -> Hashable:
    if isinstance(data, dict):
        if "seq" in data:
            return Sequence(tuple(data["seq"]), int(data["alpha"]))
        if "bits" in data:
            return Bits(data["bits"])
        if "tuple" in data:
            return tuple(_label_from_json(v) for v in data["tuple"])
        raise ValueError(f"unknown channel label {data!r}")
    return data  # type: ignore[return-value]


def dump_channel(ch: Channel) -> dict:
    """JSON-ready form with mantissa/exponent pairs."""
    return {
        "full_space": ch.full_space,
        "rows": [
            {
                "x": _label_to_json(x),
                "cond": [{"y": _label_to_json(y), "p": p.to_json()} for y, p in row.items()],
            }
            for x, row in ch.rows.items()
        ],
    }


def load_channel(data: dict) -> Channel:
    """Inverse of dump_channel."""
    rows: Dict[Hashable, Row] = {}
    for entry in data["rows"]:
        x = _label_from_json(entry["x"])
        rows[x] = {
            _label_from_json(c["y"]): DyadicRational.from_json(c["p"]) for c in entry["cond"]
        }
    return Channel(rows, data.get("full_space"))
