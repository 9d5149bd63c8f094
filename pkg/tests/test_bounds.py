"""Tests for maxleak.bounds -- phrase/state counts, delta_s and the converse audits."""

import math
from fractions import Fraction

import pytest

from maxleak.bounds import (
    FLOAT_SLACK,
    NotInformationLosslessError,
    converse_rhs,
    delta_s,
    delta_s_sweep,
    entropy_chain,
    entropy_term,
    lztype_check,
    lztype_sweep,
    permutation_count,
    phrase_state_counts,
    state_penalty,
    stirling_chain,
    theorem1_audit,
    type_penalty,
)
from maxleak.config import DEEP, BudgetExceededError
from maxleak.fse import all_sequences
from maxleak.leakage import induced_channel, maximal_leakage
from maxleak.lz78 import Sequence
from maxleak.machines import change_pad, delay, idle, parity, toggle, xor
from tests.conftest import WORKED_EXAMPLE, seq, tiny_budget


# --- Phrase/state counts ---


def test_worked_example_single_state_cells():
    psc = phrase_state_counts(xor(), seq(WORKED_EXAMPLE))
    assert psc.counts == {(1, 0, 0): 2, (2, 0, 0): 5, (3, 0, 0): 1}
    assert psc.c == 8
    # the trailing "aa" repeats a complete phrase of its own cell
    assert psc.overcount == 2
    assert permutation_count(psc) == 120


def test_repeated_tail_counted_once():
    psc = phrase_state_counts(xor(), seq("aaaa"))
    assert permutation_count(psc) == 1


def test_cells_follow_state_path():
    psc = phrase_state_counts(toggle(), seq("abba"))
    # a | b | ba: starts at steps 0, 1, 2 in states 0, 1, 0
    assert psc.counts == {(1, 0, 1): 1, (1, 1, 0): 1, (2, 0, 0): 1}


def test_single_phrase_cells_have_zero_entropy():
    psc = phrase_state_counts(toggle(), seq("a"))
    assert permutation_count(psc) == 1
    h, bound = entropy_term(psc)
    assert h == 0.0
    assert bound > 0


def test_counts_sum_to_c_and_n():
    for x in all_sequences(2, 9):
        psc = phrase_state_counts(parity(), x)
        assert sum(psc.counts.values()) == psc.c
        assert sum(l * k for (l, _, _), k in psc.counts.items()) == 9


# --- Entropy and Stirling steps ---


def test_entropy_term_worked_example():
    h, bound = entropy_term(phrase_state_counts(xor(), seq(WORKED_EXAMPLE)))
    assert h == pytest.approx(1.298795, abs=1e-6)
    assert bound == pytest.approx(math.log2(23 / 8) + math.log2(math.e))
    assert h <= bound


def test_entropy_chain_is_monotone():
    for x in all_sequences(2, 10):
        chain = entropy_chain(phrase_state_counts(toggle(), x))
        steps = [chain[k] for k in ("joint", "sum_of_marginals", "length_plus_states", "geometric_max", "final")]
        for a, b in zip(steps, steps[1:]):
            assert a <= b + FLOAT_SLACK


def test_stirling_chain_worked_example():
    log_perm, stirling, closed = stirling_chain(phrase_state_counts(xor(), seq(WORKED_EXAMPLE)))
    assert log_perm == pytest.approx(math.log2(120))
    assert stirling == pytest.approx(closed)
    assert stirling == pytest.approx(2.06808, abs=1e-4)
    assert log_perm >= stirling


# --- delta_s and penalties ---


def test_delta_s_worked_example():
    # n=15, c=8, s=1: 0.48368 + 0.41036 + 0.76944
    assert delta_s(15, 8, 1) == pytest.approx(1.6635, abs=1e-4)


def test_delta_s_one_phrase_per_symbol():
    assert delta_s(10, 10, 1) == pytest.approx(2 * math.log2(math.e))


def test_delta_s_grows_with_states():
    assert delta_s(15, 8, 2) == pytest.approx(delta_s(15, 8, 1) + 2 * 8 / 15)


def test_delta_s_domain():
    for args in ((15, 0, 1), (15, 16, 1), (15, 8, 0)):
        with pytest.raises(ValueError):
            delta_s(*args)


def test_delta_s_vanishes_on_constant_input():
    rows = delta_s_sweep(lambda n: Sequence.of([0] * n), [64, 512, 4096], s=1)
    assert [n for n, _, _ in rows] == [64, 512, 4096]
    values = [d for _, _, d in rows]
    assert values[0] > values[1] > values[2]
    assert values[2] < 0.2


def test_penalties():
    assert type_penalty(4, 2, 1) == pytest.approx(math.log2(5) / 4)
    assert state_penalty(8, 1) == 0.0
    assert state_penalty(8, 4) == 0.25


def test_converse_rhs_forms():
    leak, rate = converse_rhs(8, Fraction(1, 4), 2, 1, 1.0, 0.2)
    penalties = 0.2 + math.log2(9) / 8
    assert leak == pytest.approx(1.0 - penalties)
    assert rate == pytest.approx(1.0 - 0.25 - penalties)


def test_converse_rhs_single_state_key_rate_form():
    _, rate = converse_rhs(16, Fraction(0), 2, 1, 1.5, 0.4)
    assert rate == pytest.approx(1.5 - 0.4 - math.log2(17) / 16)


def test_converse_rhs_clamps_leakage_form():
    leak, rate = converse_rhs(8, Fraction(0), 2, 2, 0.1, 0.5)
    assert leak == 0.0
    assert rate < 0


# --- LZ-type audit ---


def test_lztype_worked_example():
    br = lztype_check(xor(), seq(WORKED_EXAMPLE))
    assert br.holds
    assert br.rho_lz == pytest.approx(1.6)
    assert br.lhs == pytest.approx(math.log2(math.comb(15, 6)) / 15)
    assert br.rhs == pytest.approx(1.6 - 1.6635, abs=1e-4)
    assert br.instance == "xor:" + "011010011000100"


def test_lztype_holds_for_every_x():
    for build, n in ((xor, 10), (toggle, 8), (parity, 8), (delay, 8)):
        for br in lztype_sweep(build(), n):
            assert br.holds, (br.instance, br.links)


@pytest.mark.slow
def test_lztype_holds_for_every_x_n12():
    for build in (xor, toggle, parity):
        for br in lztype_sweep(build(), 12):
            assert br.holds, (br.instance, br.links)


def test_lztype_sweep_uses_type_sizes():
    reports = lztype_sweep(xor(), 4)
    assert len(reports) == 16
    by_instance = {br.instance: br for br in reports}
    assert by_instance["xor:0011"].terms["log2_type_size"] == pytest.approx(math.log2(6))


def test_lztype_budget():
    with pytest.raises(BudgetExceededError):
        lztype_check(xor(), Sequence.of([0] * 12), budget=tiny_budget())


def test_bound_report_dict():
    data = lztype_check(toggle(), seq("abba")).to_dict()
    assert list(data["links"]) == sorted(data["links"])
    assert data["holds"] is True
    assert data["slack"] == FLOAT_SLACK


# --- Converse audit ---


def test_converse_xor_is_vacuous_and_holds():
    br = theorem1_audit(xor(), 4)
    assert br.holds, br.links
    assert br.vacuous
    assert br.lhs == 0.0
    assert br.terms["type_classes"] == 5.0


def test_converse_toggle_all_links():
    br = theorem1_audit(toggle(), 6)
    assert all(br.links.values()), br.links
    assert br.lhs == pytest.approx(0.5)
    assert br.lhs >= br.rhs


def test_converse_toggle_n12_matches_brute_force():
    br = theorem1_audit(toggle(), 12)
    exact = maximal_leakage(induced_channel(toggle(), 12)).leakage_bits / 12
    assert br.lhs == pytest.approx(exact)
    assert br.holds, br.links


@pytest.mark.parametrize("build", [change_pad, idle])
def test_converse_refuses_lossy_machines(build):
    with pytest.raises(NotInformationLosslessError):
        theorem1_audit(build(), 4)


def test_converse_budget():
    with pytest.raises(BudgetExceededError):
        theorem1_audit(xor(), 8, budget=tiny_budget())


@pytest.mark.slow
def test_converse_chain_up_to_n8():
    for build in (xor, toggle, parity):
        for n in range(1, 9):
            br = theorem1_audit(build(), n, budget=DEEP)
            assert br.holds, (br.instance, br.links)
