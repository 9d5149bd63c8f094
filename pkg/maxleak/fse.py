"""Finite-state encrypter model: tables, step semantics, key rate, types and IL audit.

An encrypter is the sextuplet (X, Y, Z, f, g, Delta) stored as explicit tables.
At step i with state z_i it reads x_i, consumes Delta(z_i, x_i) fresh key bits
k_i, emits y_i = f(z_i, x_i, k_i) (possibly the empty string) and moves to
z_{i+1} = g(z_i, x_i). The state path never depends on the key.
"""

import itertools
import json
import logging
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Set, Tuple

from maxleak.bits import Bits
from maxleak.config import DESK, AuditBudget, BudgetExceededError
from maxleak.lz78 import Sequence

logger = logging.getLogger("maxleak.fse")

FKey = Tuple[int, int, str]  # (state, symbol, key pattern)


class SpecValidationError(ValueError):
    """An encrypter table is missing entries or holds out-of-range values."""


class KeyExhaustedError(ValueError):
    """The key supply is shorter than the key demand."""


@dataclass(frozen=True)
class EncrypterSpec:
    """A finite-state encrypter as explicit tables.

    Attributes:
        alpha: Input alphabet size.
        s: Number of states (0-based indices).
        out_alphabet: Allowed output strings; "" is the null word.
        delta: delta[z][x] key bits consumed at state z on input x.
        g: g[z][x] next state.
        f: f[(z, x, key_pattern)] output string, key_pattern of length delta[z][x].
        z_star: Initial state.
        name: Optional label used in reports.
    """

    alpha: int
    s: int
    out_alphabet: Tuple[str, ...]
    delta: Tuple[Tuple[int, ...], ...]
    g: Tuple[Tuple[int, ...], ...]
    f: Dict[FKey, str] = field(hash=False)
    z_star: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        validate(self)

    def output(self, z: int, x: int, key: str) -> str:
        return self.f[(z, x, key)]

    @property
    def max_delta(self) -> int:
        return max(max(row) for row in self.delta)


def validate(spec: EncrypterSpec) -> None:
    """Check totality and ranges of all tables.

    Raises:
        SpecValidationError: On the first violation found.
    """
    if spec.alpha < 2 or spec.s < 1:
        raise SpecValidationError(f"need alpha >= 2 and s >= 1, got {spec.alpha}, {spec.s}")
    if not 0 <= spec.z_star < spec.s:
        raise SpecValidationError(f"z_star {spec.z_star} outside 0..{spec.s - 1}")
    outs = set(spec.out_alphabet)
    for o in outs:
        if o.strip("01"):
            raise SpecValidationError(f"output {o!r} is not a binary string")
    for name, table in (("delta", spec.delta), ("g", spec.g)):
        if len(table) != spec.s or any(len(row) != spec.alpha for row in table):
            raise SpecValidationError(f"{name} must be an s x alpha table")
    for z in range(spec.s):
        for x in range(spec.alpha):
            d = spec.delta[z][x]
            if d < 0:
                raise SpecValidationError(f"delta({z},{x}) = {d} is negative")
            if not 0 <= spec.g[z][x] < spec.s:
                raise SpecValidationError(f"g({z},{x}) = {spec.g[z][x]} is not a state")
            for k in _patterns(d):
                out = spec.f.get((z, x, k))
                if out is None:
                    raise SpecValidationError(f"f({z},{x},{k!r}) is undefined")
                if out not in outs:
                    raise SpecValidationError(f"f({z},{x},{k!r}) = {out!r} not in out_alphabet")
    extra = [key for key in spec.f if len(key[2]) != _safe_delta(spec, key)]
    if extra:
        raise SpecValidationError(f"f has entries with wrong key width: {extra[:3]}")


def _safe_delta(spec: EncrypterSpec, key: FKey) -> int:
    z, x, _ = key
    if 0 <= z < spec.s and 0 <= x < spec.alpha:
        return spec.delta[z][x]
    return -1


def _patterns(width: int) -> List[str]:
    if width == 0:
        return [""]
    return [format(v, f"0{width}b") for v in range(1 << width)]


@dataclass
class Trace:
    """Full record of one encrypter run on x^n."""

    states: List[int]  # z_1 .. z_{n+1}
    offsets: List[int]  # t_0 .. t_n
    key_segments: List[str]  # k_1 .. k_n
    outputs: List[str]  # y_1 .. y_n

    @property
    def ciphertext(self) -> str:
        """Concatenated output stream."""
        return "".join(self.outputs)

    @property
    def key_used(self) -> int:
        return self.offsets[-1]


def state_sequence(spec: EncrypterSpec, x: Sequence, z: Optional[int] = None) -> List[int]:
    """States z_1..z_{n+1} driven by x alone, starting at ``z`` (default z_star)."""
    _check_alphabet(spec, x)
    state = spec.z_star if z is None else z
    states = [state]
    for sym in x.symbols:
        state = spec.g[state][sym]
        states.append(state)
    return states


def key_demand(spec: EncrypterSpec, x: Sequence) -> int:
    """Total key bits t_n consumed on x."""
    states = state_sequence(spec, x)
    return sum(spec.delta[z][sym] for z, sym in zip(states, x.symbols))


def run(spec: EncrypterSpec, x: Sequence, key: Bits) -> Trace:
    """Run the encrypter recursions on x with key bits ``key``.

    Raises:
        KeyExhaustedError: If ``key`` is shorter than the key demand of x.
    """
    states = state_sequence(spec, x)
    offsets = [0]
    segments: List[str] = []
    outputs: List[str] = []
    for z, sym in zip(states, x.symbols):
        t_prev = offsets[-1]
        t = t_prev + spec.delta[z][sym]
        if t > len(key):
            raise KeyExhaustedError(f"key has {len(key)} bits, step {len(segments) + 1} needs {t}")
        k = key.text[t_prev:t]
        segments.append(k)
        outputs.append(spec.f[(z, sym, k)])
        offsets.append(t)
    return Trace(states, offsets, segments, outputs)


def key_rate(spec: EncrypterSpec, x: Sequence) -> Fraction:
    """Key rate t_n / n, exact."""
    if len(x) == 0:
        raise ValueError("sequence must be nonempty")
    return Fraction(key_demand(spec, x), len(x))


def _check_alphabet(spec: EncrypterSpec, x: Sequence) -> None:
    if x.alpha != spec.alpha:
        raise ValueError(f"sequence alphabet {x.alpha} does not match encrypter alphabet {spec.alpha}")


@dataclass(frozen=True)
class TypeClass:
    """Joint empirical counts n(x, z) of (symbol, state) pairs along x^n."""

    counts: Tuple[Tuple[Tuple[int, int], int], ...]
    n: int

    @classmethod
    def from_counts(cls, counts: Dict[Tuple[int, int], int]) -> "TypeClass":
        items = tuple(sorted((k, v) for k, v in counts.items() if v > 0))
        return cls(items, sum(v for _, v in items))

    def as_dict(self) -> Dict[Tuple[int, int], int]:
        return dict(self.counts)

    def count(self, x: int, z: int) -> int:
        return self.as_dict().get((x, z), 0)


def empirical_joint(spec: EncrypterSpec, x: Sequence) -> TypeClass:
    """Type of x: counts of (x_i, z_i) over i = 1..n."""
    states = state_sequence(spec, x)
    return TypeClass.from_counts(Counter(zip(x.symbols, states)))


def key_rate_from_type(spec: EncrypterSpec, t: TypeClass) -> Fraction:
    """sum P(x,z) delta(z,x): the key rate seen through the type alone."""
    total = sum(count * spec.delta[z][sym] for (sym, z), count in t.counts)
    return Fraction(total, t.n)


def all_sequences(alpha: int, n: int) -> Iterator[Sequence]:
    """Every sequence of length n over alpha symbols, lexicographic."""
    for symbols in itertools.product(range(alpha), repeat=n):
        yield Sequence(symbols, alpha)


def type_class_members(
    spec: EncrypterSpec, t: TypeClass, budget: AuditBudget = DESK
) -> Set[Sequence]:
    """All sequences whose type under ``spec`` equals ``t``.

    Depth-first search over positions, pruned by the remaining counts.
    """
    budget.check(spec.alpha ** t.n, f"type class enumeration at n={t.n}")
    members: Set[Sequence] = set()
    remaining = t.as_dict()
    prefix: List[int] = []

    def extend(state: int) -> None:
        if len(prefix) == t.n:
            members.add(Sequence(tuple(prefix), spec.alpha))
            return
        for sym in range(spec.alpha):
            cell = (sym, state)
            if remaining.get(cell, 0) == 0:
                continue
            remaining[cell] -= 1
            prefix.append(sym)
            extend(spec.g[state][sym])
            prefix.pop()
            remaining[cell] += 1

    extend(spec.z_star)
    return members


def partition_by_type(
    spec: EncrypterSpec, n: int, budget: AuditBudget = DESK
) -> Dict[TypeClass, List[Sequence]]:
    """Group the whole input space of length n by type."""
    budget.check(spec.alpha ** n, f"input space enumeration at n={n}")
    classes: Dict[TypeClass, List[Sequence]] = defaultdict(list)
    for x in all_sequences(spec.alpha, n):
        classes[empirical_joint(spec, x)].append(x)
    logger.debug("n=%d: %d type classes over %d sequences", n, len(classes), spec.alpha ** n)
    return dict(classes)


def count_type_classes(spec: EncrypterSpec, n: int, budget: AuditBudget = DESK) -> int:
    """Exact number M_n of distinct type classes at length n."""
    return len(partition_by_type(spec, n, budget))


def type_class_bound(alpha: int, s: int, n: int) -> int:
    """(n+1)^(alpha s - 1), the polynomial bound on M_n."""
    return (n + 1) ** (alpha * s - 1)


def zero_key_image(
    spec: EncrypterSpec, members: Set[Sequence]
) -> Dict[Sequence, Tuple[Tuple[str, ...], int]]:
    """Map each member to (outputs under the all-zero key, final state)."""
    image = {}
    for x in members:
        trace = run(spec, x, Bits.zeros(key_demand(spec, x)))
        image[x] = (tuple(trace.outputs), trace.states[-1])
    return image


@dataclass
class ILResult:
    """Outcome of the information-losslessness audit.

    ``collisions[m]`` is True when some segment of length m+1 is not recovered
    uniquely from (start state, key segment, outputs, end state).
    """

    verdict: str  # "IL" | "notIL" | "inconclusive"
    m0: Optional[int]
    horizon: int
    collisions: List[bool]

    @property
    def strict(self) -> bool:
        """Uniqueness at every segment length (the stricter IL notion)."""
        return not any(self.collisions)


def _segment_work(spec: EncrypterSpec, length: int) -> int:
    return spec.s * spec.alpha ** length * (1 << (length * spec.max_delta))


def _has_collision(spec: EncrypterSpec, length: int) -> bool:
    for z in range(spec.s):
        seen: Dict[tuple, Tuple[int, ...]] = {}
        for xs in itertools.product(range(spec.alpha), repeat=length):
            states = [z]
            for sym in xs:
                states.append(spec.g[states[-1]][sym])
            widths = [spec.delta[st][sym] for st, sym in zip(states, xs)]
            total = sum(widths)
            for key in _patterns(total):
                outs = []
                pos = 0
                for st, sym, w in zip(states, xs, widths):
                    outs.append(spec.f[(st, sym, key[pos:pos + w])])
                    pos += w
                quad = (key, tuple(outs), states[-1])
                prev = seen.setdefault(quad, xs)
                if prev != xs:
                    logger.debug("collision at length %d from state %d: %s vs %s", length, z, prev, xs)
                    return True
    return False


def is_information_lossless(
    spec: EncrypterSpec, horizon: Optional[int] = None, budget: AuditBudget = DESK
) -> ILResult:
    """Exhaustive collision search over segment lengths 1..horizon+1.

    An explicit ``horizon`` that the budget cannot afford raises
    BudgetExceededError; the default horizon (``budget.il_horizon``) is cut
    back to the largest affordable one instead.
    """
    explicit = horizon is not None
    limit = budget.il_horizon if horizon is None else horizon
    collisions: List[bool] = []
    work = 0
    for m in range(limit + 1):
        work += _segment_work(spec, m + 1)
        if work > budget.max_enumeration:
            if explicit or m == 0:
                budget.check(work, f"IL audit up to horizon {limit}")
            logger.warning("IL audit of %r stopped at horizon %d (budget)", spec.name, m - 1)
            break
        collisions.append(_has_collision(spec, m + 1))
    reached = len(collisions) - 1
    if collisions[-1]:
        return ILResult("notIL", None, reached, collisions)
    m0 = reached
    while m0 > 0 and not collisions[m0 - 1]:
        m0 -= 1
    verdict = "IL" if all(collisions[:m0]) else "inconclusive"
    if verdict == "inconclusive":
        logger.warning("IL audit of %r is inconclusive: %s", spec.name, collisions)
    return ILResult(verdict, m0, reached, collisions)


def spec_to_dict(spec: EncrypterSpec) -> dict:
    """JSON-ready form of an encrypter spec."""
    return {
        "name": spec.name,
        "alpha": spec.alpha,
        "s": spec.s,
        "z_star": spec.z_star,
        "out_alphabet": list(spec.out_alphabet),
        "delta": [list(row) for row in spec.delta],
        "g": [list(row) for row in spec.g],
        "f": {f"{z},{x},{k}": out for (z, x, k), out in sorted(spec.f.items())},
    }


def spec_from_dict(data: dict, name: str = "") -> EncrypterSpec:
    """Build and validate a spec from its JSON form.

    Raises:
        SpecValidationError: On missing fields or invalid tables.
    """
    try:
        f: Dict[FKey, str] = {}
        for key, out in data["f"].items():
            z, x, k = key.split(",")
            f[(int(z), int(x), k)] = out
        return EncrypterSpec(
            alpha=int(data["alpha"]),
            s=int(data["s"]),
            out_alphabet=tuple(data["out_alphabet"]),
            delta=tuple(tuple(int(v) for v in row) for row in data["delta"]),
            g=tuple(tuple(int(v) for v in row) for row in data["g"]),
            f=f,
            z_star=int(data.get("z_star", 0)),
            name=data.get("name", name),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecValidationError):
            raise
        raise SpecValidationError(f"malformed encrypter spec: {exc!r}") from None


def load_spec(path: str) -> EncrypterSpec:
    """Load an encrypter spec from a JSON file."""
    with open(path, "r") as fh:
        data = json.load(fh)
    name = os.path.splitext(os.path.basename(path))[0]
    return spec_from_dict(data, name=name)


def list_specs(directory: str) -> List[EncrypterSpec]:
    """Load every spec JSON in a directory."""
    specs: List[EncrypterSpec] = []
    if not os.path.isdir(directory):
        return specs
    for filename in sorted(os.listdir(directory)):
        if filename.endswith(".json"):
            specs.append(load_spec(os.path.join(directory, filename)))
    return specs
