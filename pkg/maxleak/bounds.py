"""Converse-bound machinery: phrase/state counting, delta_s, the type-size bound and the converse chain.

Exact links (factorial products, pigeonhole, key-probability floor, type counts)
are checked with integers and dyadic rationals. Entropy and log comparisons
use floats with FLOAT_SLACK.
"""

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from maxleak.config import DESK, AuditBudget
from maxleak.dyadic import ZERO, DyadicRational
from maxleak.fse import (
    EncrypterSpec,
    empirical_joint,
    is_information_lossless,
    key_demand,
    key_rate,
    partition_by_type,
    state_sequence,
    type_class_bound,
    type_class_members,
    zero_key_image,
)
from maxleak.leakage import induced_channel, maximal_leakage
from maxleak.lz78 import Sequence, lz_complexity, parse, phrase_strings

logger = logging.getLogger("maxleak.bounds")

FLOAT_SLACK = 1e-9
LOG2E = math.log2(math.e)

Cell = Tuple[int, int, int]  # (phrase length, start state, end state)


class NotInformationLosslessError(ValueError):
    """The converse audit was asked to run on an encrypter that is not IL."""


@dataclass
class PhraseStateCounts:
    """c[(l, z, z')]: phrases of length l starting in state z and ending in z'.

    ``overcount`` is the product over cells of mult! over identical phrase
    contents in the cell. Complete phrases are distinct, so it exceeds 1 only
    when the final incomplete phrase repeats a phrase of its own cell.
    """

    counts: Dict[Cell, int]
    c: int
    n: int
    s: int
    overcount: int = 1

    def check(self) -> None:
        assert sum(self.counts.values()) == self.c
        assert sum(cell[0] * k for cell, k in self.counts.items()) == self.n


def phrase_state_counts(spec: EncrypterSpec, x: Sequence) -> PhraseStateCounts:
    """Tabulate the LZ78 phrases of x by (length, start state, end state)."""
    p = parse(x)
    states = state_sequence(spec, x)
    counts: Dict[Cell, int] = defaultdict(int)
    contents: Dict[Cell, Counter] = defaultdict(Counter)
    for ph, text in zip(p.phrases, phrase_strings(p, x)):
        cell = (ph.length, states[ph.start], states[ph.start + ph.length])
        counts[cell] += 1
        contents[cell][text] += 1
    overcount = 1
    for per_cell in contents.values():
        for mult in per_cell.values():
            overcount *= math.factorial(mult)
    psc = PhraseStateCounts(dict(counts), p.c, len(x), spec.s, overcount)
    psc.check()
    return psc


def permutation_count(psc: PhraseStateCounts) -> int:
    """Distinct rearrangements of phrases within cells: prod c! / overcount."""
    product = 1
    for k in psc.counts.values():
        product *= math.factorial(k)
    return product // psc.overcount


def permutation_lower_bound(psc: PhraseStateCounts) -> float:
    """log2 of the number of type-class members reachable by permuting phrases."""
    return math.log2(permutation_count(psc))


def _entropy(weights: Iterable[int]) -> float:
    ws = [w for w in weights if w > 0]
    total = sum(ws)
    return -sum(w / total * math.log2(w / total) for w in ws)


def entropy_term(psc: PhraseStateCounts) -> Tuple[float, float]:
    """(H(L,Z,Z'), log2(n/c + 1) + log2(s^2 e)) for pi(l,z,z') = c_lzz'/c."""
    if psc.c < 1:
        raise ValueError("need at least one phrase")
    h = _entropy(psc.counts.values())
    bound = math.log2(psc.n / psc.c + 1) + math.log2(psc.s ** 2 * math.e)
    return h, bound


def entropy_chain(psc: PhraseStateCounts) -> Dict[str, float]:
    """Every intermediate step of the bound on H(L,Z,Z'), in order."""
    marginal: Dict[int, Counter] = {0: Counter(), 1: Counter(), 2: Counter()}
    for cell, k in psc.counts.items():
        for axis in range(3):
            marginal[axis][cell[axis]] += k
    h_l, h_z, h_z2 = (_entropy(marginal[a].values()) for a in range(3))
    mean_len = psc.n / psc.c
    geometric = (1 + mean_len) * math.log2(1 + mean_len) - mean_len * math.log2(mean_len)
    two_log_s = 2 * math.log2(psc.s)
    return {
        "joint": _entropy(psc.counts.values()),
        "sum_of_marginals": h_l + h_z + h_z2,
        "length_plus_states": h_l + two_log_s,
        "geometric_max": geometric + two_log_s,
        "final": math.log2(mean_len + 1) + math.log2(psc.s ** 2 * math.e),
    }


def stirling_chain(psc: PhraseStateCounts) -> Tuple[float, float, float]:
    """(log2 of distinct rearrangements, sum c log2(c/e), c log2 c - c H - c log2 e)."""
    h, _ = entropy_term(psc)
    c = psc.c
    stirling = sum(k * math.log2(k / math.e) for k in psc.counts.values())
    closed = c * math.log2(c) - c * h - c * LOG2E
    return permutation_lower_bound(psc), stirling, closed


def delta_s(n: int, c: int, s: int) -> float:
    """(c/n) log2(n/c) + (c/n)^2 log2 e + (c/n) log2(s^2 e)."""
    if not 1 <= c <= n or s < 1:
        raise ValueError(f"need 1 <= c <= n and s >= 1, got n={n}, c={c}, s={s}")
    r = c / n
    return r * math.log2(n / c) + r * r * LOG2E + r * math.log2(s * s * math.e)


def delta_s_sweep(
    make: Callable[[int], Sequence], ns: Iterable[int], s: int
) -> List[Tuple[int, int, float]]:
    """(n, c(x^n), delta_s) for x^n = make(n) over the given lengths."""
    rows = []
    for n in ns:
        x = make(n)
        c = parse(x).c
        rows.append((n, c, delta_s(n, c, s)))
    return rows


def type_penalty(n: int, alpha: int, s: int) -> float:
    """(alpha s - 1) log2(n+1) / n."""
    return (alpha * s - 1) * math.log2(n + 1) / n


def state_penalty(n: int, s: int) -> float:
    """log2(s) / n."""
    return math.log2(s) / n


def converse_rhs(
    n: int, lam: Fraction, alpha: int, s: int, value: float, delta: float
) -> Tuple[float, float]:
    """Both forms of the converse bound.

    ``value`` is max_x[rho_LZ(x) - sigma_E(x)] for the leakage form and
    rho_LZ(x) for the key-rate form; ``delta`` is delta_s(n) at the realized c.
    Returns (lower bound on leakage / n, lower bound on sigma_E(x)).
    """
    penalties = delta + type_penalty(n, alpha, s) + state_penalty(n, s)
    return max(0.0, value - penalties), value - float(lam) - penalties


@dataclass
class BoundReport:
    """One audited inequality lhs >= rhs with every term itemized."""

    rho_lz: float
    delta_s: float
    penalty_types: float
    penalty_states: float
    rhs: float
    lhs: float
    holds: bool
    links: Dict[str, bool] = field(default_factory=dict)
    terms: Dict[str, float] = field(default_factory=dict)
    vacuous: bool = False
    slack: float = FLOAT_SLACK
    instance: str = ""

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "rho_lz": self.rho_lz,
            "delta_s": self.delta_s,
            "penalty_types": self.penalty_types,
            "penalty_states": self.penalty_states,
            "rhs": self.rhs,
            "lhs": self.lhs,
            "holds": self.holds,
            "vacuous": self.vacuous,
            "slack": self.slack,
            "links": dict(sorted(self.links.items())),
            "terms": dict(sorted(self.terms.items())),
        }


def lztype_check(
    spec: EncrypterSpec,
    x: Sequence,
    budget: AuditBudget = DESK,
    type_size: Optional[int] = None,
) -> BoundReport:
    """Audit log2|T(x)|/n >= rho_LZ(x) - delta_s(n) and the exact chain behind it."""
    n = len(x)
    if type_size is None:
        type_size = len(type_class_members(spec, empirical_joint(spec, x), budget))
    psc = phrase_state_counts(spec, x)
    rho = lz_complexity(x)
    d = delta_s(n, psc.c, spec.s)
    lhs = math.log2(type_size) / n
    rhs = rho - d
    log_perm, stirling, closed = stirling_chain(psc)
    h, h_bound = entropy_term(psc)
    links = {
        "type_size_ge_permutations": type_size >= permutation_count(psc),
        "permutations_ge_stirling": log_perm >= stirling - FLOAT_SLACK,
        "stirling_equals_entropy_form": abs(stirling - closed) <= 1e-6 * max(1.0, abs(closed)),
        "entropy_bound": h <= h_bound + FLOAT_SLACK,
        "lztype": lhs >= rhs - FLOAT_SLACK,
    }
    return BoundReport(
        rho_lz=rho,
        delta_s=d,
        penalty_types=0.0,
        penalty_states=0.0,
        rhs=rhs,
        lhs=lhs,
        holds=all(links.values()),
        links=links,
        terms={
            "c": float(psc.c),
            "log2_type_size": math.log2(type_size),
            "log2_permutations": log_perm,
            "stirling": stirling,
            "entropy_form": closed,
            "H_LZZ": h,
            "H_bound": h_bound,
        },
        instance=f"{spec.name}:{''.join(map(str, x.symbols))}",
    )


def lztype_sweep(spec: EncrypterSpec, n: int, budget: AuditBudget = DESK) -> List[BoundReport]:
    """lztype_check on every x of length n, sharing one type partition."""
    reports = []
    for members in partition_by_type(spec, n, budget).values():
        size = len(members)
        for x in members:
            reports.append(lztype_check(spec, x, budget, type_size=size))
    reports.sort(key=lambda r: r.instance)
    return reports


def theorem1_audit(
    spec: EncrypterSpec, n: int, budget: AuditBudget = DESK
) -> BoundReport:
    """Check every link of the converse proof on one encrypter at length n.

    The IL audit searches segments up to length n, cut back to what the
    budget affords.

    Raises:
        NotInformationLosslessError: If the IL audit fails, or losslessness
            only starts beyond segment length n.
        BudgetExceededError: If any enumeration is over budget.
    """
    il_budget = replace(budget, il_horizon=min(n - 1, budget.il_horizon))
    il = is_information_lossless(spec, budget=il_budget)
    if il.verdict != "IL":
        raise NotInformationLosslessError(
            f"{spec.name!r} is {il.verdict} up to horizon {il.horizon}"
        )
    if il.m0 is not None and il.m0 > n - 1:
        raise NotInformationLosslessError(
            f"{spec.name!r} is lossless only from segment length {il.m0 + 1} > n={n}"
        )

    ch = induced_channel(spec, n, budget)
    report = maximal_leakage(ch)
    classes = partition_by_type(spec, n, budget)
    m_n = len(classes)

    floor_ok = True
    for x, row in ch.rows.items():
        floor = DyadicRational(1, key_demand(spec, x))  # type: ignore[arg-type]
        if any(p < floor for p in row.values() if p):
            floor_ok = False
            logger.warning("key-probability floor violated for %s", x)

    pigeonhole_ok = True
    injective_ok = True
    type_sum = ZERO  # sum over types of |Y(P)| 2^{-n sigma(P)}
    members_sum = ZERO  # sum over types of |T(P)| 2^{-n sigma(P)}
    best_value = -math.inf
    best_delta = 0.0
    for members in classes.values():
        size = len(members)
        image = zero_key_image(spec, set(members))
        by_state: Dict[int, set] = defaultdict(set)
        per_state: Counter = Counter()
        for outs, z_end in image.values():
            by_state[z_end].add(outs)
            per_state[z_end] += 1
        if any(len(by_state[z]) != per_state[z] for z in per_state):
            injective_ok = False
        outputs = set()
        for x in members:
            outputs.update(ch.rows[x])
        if len(outputs) * spec.s < size or max(len(v) for v in by_state.values()) * spec.s < size:
            pigeonhole_ok = False
        t = key_demand(spec, members[0])
        type_sum = type_sum + DyadicRational(len(outputs), t)
        members_sum = members_sum + DyadicRational(size, t)
        for x in members:
            d = delta_s(n, parse(x).c, spec.s)
            value = lz_complexity(x) - float(key_rate(spec, x)) - d
            if value > best_value:
                best_value, best_delta = value, d

    value_plus_delta = best_value + best_delta
    rhs, _ = converse_rhs(n, Fraction(0), spec.alpha, spec.s, value_plus_delta, best_delta)
    lhs = report.leakage_bits / n
    sum_max = report.sum_max.to_fraction()
    links = {
        "il": True,
        "key_probability_floor": floor_ok,
        "zero_key_injective": injective_ok,
        "pigeonhole": pigeonhole_ok,
        "type_count_bound": m_n <= type_class_bound(spec.alpha, spec.s, n),
        "sum_over_output_types": sum_max * m_n >= type_sum.to_fraction(),
        "sum_over_members": sum_max * m_n * spec.s >= members_sum.to_fraction(),
        "converse": lhs >= rhs - FLOAT_SLACK,
    }
    vacuous = rhs == 0.0
    if vacuous:
        logger.warning("converse audit of %r at n=%d is vacuous (clamped to 0)", spec.name, n)
    return BoundReport(
        rho_lz=value_plus_delta,
        delta_s=best_delta,
        penalty_types=type_penalty(n, spec.alpha, spec.s),
        penalty_states=state_penalty(n, spec.s),
        rhs=rhs,
        lhs=lhs,
        holds=all(links.values()),
        links=links,
        terms={
            "leakage_bits": report.leakage_bits,
            "type_classes": float(m_n),
            "type_class_bound": float(type_class_bound(spec.alpha, spec.s, n)),
            "max_rho_minus_sigma_minus_delta": best_value,
            "il_m0": float(il.m0 or 0),
        },
        vacuous=vacuous,
        instance=f"{spec.name}:n={n}",
    )
