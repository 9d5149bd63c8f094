"""Tests for maxleak.fse -- encrypter tables, recursions, types and the IL audit."""

from fractions import Fraction

import pytest

from maxleak.bits import Bits
from maxleak.config import BudgetExceededError
from maxleak.fse import (
    EncrypterSpec,
    KeyExhaustedError,
    SpecValidationError,
    all_sequences,
    count_type_classes,
    empirical_joint,
    is_information_lossless,
    key_demand,
    key_rate,
    key_rate_from_type,
    list_specs,
    load_spec,
    partition_by_type,
    run,
    spec_from_dict,
    spec_to_dict,
    state_sequence,
    type_class_bound,
    type_class_members,
    zero_key_image,
)
from maxleak.machines import change_pad, delay, idle, parity, toggle, xor
from tests.conftest import SPECS_DIR, bits_of, spec_path, tiny_budget


# --- Validation ---


def _xor_tables():
    return spec_to_dict(xor())


def test_spec_round_trips_through_dict():
    for build in (xor, toggle, parity, change_pad):
        spec = build()
        back = spec_from_dict(spec_to_dict(spec))
        assert back.delta == spec.delta
        assert back.g == spec.g
        assert back.f == spec.f


def test_missing_f_entry_rejected():
    data = _xor_tables()
    del data["f"]["0,1,1"]
    with pytest.raises(SpecValidationError, match="undefined"):
        spec_from_dict(data)


def test_bad_next_state_rejected():
    data = _xor_tables()
    data["g"] = [[0, 3]]
    with pytest.raises(SpecValidationError, match="not a state"):
        spec_from_dict(data)


def test_output_outside_alphabet_rejected():
    data = _xor_tables()
    data["f"]["0,0,0"] = "01"
    with pytest.raises(SpecValidationError, match="out_alphabet"):
        spec_from_dict(data)


def test_wrong_key_width_rejected():
    data = _xor_tables()
    data["f"]["0,0,00"] = "0"
    with pytest.raises(SpecValidationError, match="key width"):
        spec_from_dict(data)


def test_negative_delta_rejected():
    with pytest.raises(SpecValidationError):
        EncrypterSpec(2, 1, ("0",), ((-1, 0),), ((0, 0),), {(0, 1, ""): "0"})


def test_malformed_json_rejected():
    with pytest.raises(SpecValidationError, match="malformed"):
        spec_from_dict({"alpha": 2})


def test_shipped_specs_load():
    specs = {spec.name: spec for spec in list_specs(SPECS_DIR)}
    assert set(specs) == {"change_pad", "idle", "parity", "toggle", "xor"}
    assert specs["toggle"].f == toggle().f
    assert load_spec(spec_path("xor")).delta == ((1, 1),)


def test_list_specs_missing_dir(tmp_dir):
    assert list_specs(f"{tmp_dir}/nope") == []


# --- Recursions ---


def test_xor_is_a_one_time_pad():
    trace = run(xor(), bits_of("0110"), Bits("1010"))
    assert trace.ciphertext == "1100"
    assert trace.offsets == [0, 1, 2, 3, 4]
    assert trace.key_used == 4


def test_toggle_pads_every_other_symbol():
    x = bits_of("1111")
    assert state_sequence(toggle(), x) == [0, 1, 0, 1, 0]
    trace = run(toggle(), x, Bits("11"))
    assert trace.outputs == ["0", "1", "0", "1"]
    assert trace.key_segments == ["1", "", "1", ""]


def test_idle_emits_nothing():
    trace = run(idle(), bits_of("0101"), Bits(""))
    assert trace.ciphertext == ""
    assert trace.key_used == 0


def test_state_path_ignores_key():
    spec = parity()
    x = bits_of("10110")
    for key in ("000", "111", "010"):
        assert run(spec, x, Bits(key)).states == state_sequence(spec, x)


def test_key_offsets_monotone():
    spec = toggle()
    for x in all_sequences(2, 5):
        offsets = run(spec, x, Bits.zeros(key_demand(spec, x))).offsets
        assert all(a <= b for a, b in zip(offsets, offsets[1:]))


def test_short_key_raises():
    with pytest.raises(KeyExhaustedError):
        run(xor(), bits_of("011"), Bits("10"))


def test_alphabet_mismatch():
    from maxleak.lz78 import Sequence

    with pytest.raises(ValueError, match="alphabet"):
        state_sequence(xor(), Sequence((0, 2), 3))


def test_key_rate():
    assert key_rate(xor(), bits_of("0101")) == 1
    assert key_rate(toggle(), bits_of("011")) == Fraction(2, 3)
    assert key_rate(idle(), bits_of("1")) == 0


# --- Types ---


def test_empirical_joint_counts():
    t = empirical_joint(toggle(), bits_of("1101"))
    assert t.n == 4
    assert t.count(1, 0) == 1  # x_1 = 1 in state 0
    assert t.count(0, 0) == 1  # x_3 = 0 in state 0
    assert t.count(1, 1) == 2


def test_key_rate_is_a_type_function():
    spec = parity()
    for x in all_sequences(2, 6):
        assert key_rate_from_type(spec, empirical_joint(spec, x)) == key_rate(spec, x)


def test_toggle_type_classes_n4():
    assert count_type_classes(toggle(), 4) == 9
    assert type_class_bound(2, 2, 4) == 125


def test_type_class_count_within_bound():
    for build in (xor, toggle, parity, delay):
        spec = build()
        for n in range(1, 9):
            assert count_type_classes(spec, n) <= type_class_bound(spec.alpha, spec.s, n)


def test_partition_covers_input_space():
    classes = partition_by_type(parity(), 6)
    assert sum(len(members) for members in classes.values()) == 64


def test_type_class_members_matches_partition():
    spec = toggle()
    for t, members in partition_by_type(spec, 5).items():
        assert type_class_members(spec, t) == set(members)


def test_type_class_enumeration_budget():
    spec = xor()
    t = empirical_joint(spec, bits_of("0" * 12))
    with pytest.raises(BudgetExceededError):
        type_class_members(spec, t, budget=tiny_budget(max_enumeration=100))


def test_zero_key_image_injective_on_il_types():
    spec = toggle()
    for t, members in partition_by_type(spec, 6).items():
        image = zero_key_image(spec, set(members))
        assert len(set(image.values())) == len(members)


# --- IL audit ---


@pytest.mark.parametrize("build", [xor, toggle, parity, delay])
def test_il_machines(build):
    result = is_information_lossless(build(), horizon=4)
    assert result.verdict == "IL"
    assert result.m0 == 0
    assert result.strict


def test_delay_recovered_through_end_state():
    result = is_information_lossless(delay(), horizon=2)
    assert result.collisions == [False, False, False]


def test_change_pad_is_not_il():
    result = is_information_lossless(change_pad(), horizon=4)
    assert result.verdict == "notIL"
    assert result.m0 is None
    assert result.collisions[0] is False
    assert result.collisions[1] is True


def test_change_pad_collision_pair():
    spec = change_pad()
    a = run(spec, bits_of("11"), Bits("1"))
    b = run(spec, bits_of("01"), Bits("1"))
    assert a.outputs == b.outputs == ["0", "0"]
    assert a.states[-1] == b.states[-1]


def test_idle_is_not_il():
    assert is_information_lossless(idle(), horizon=3).verdict == "notIL"


def test_default_horizon_truncated_by_budget():
    result = is_information_lossless(xor(), budget=tiny_budget())
    assert result.horizon == 3
    assert result.verdict == "IL"


def test_explicit_horizon_over_budget_raises():
    with pytest.raises(BudgetExceededError):
        is_information_lossless(xor(), horizon=6, budget=tiny_budget())
