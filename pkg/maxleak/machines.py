"""Preset encrypters used by the audits, the CLI and the tests."""

from typing import Callable, Dict, List

from maxleak.fse import EncrypterSpec, FKey
from maxleak.lz78 import symbol_width


def _bit(v: int) -> str:
    return "1" if v else "0"


def xor() -> EncrypterSpec:
    """One state, one key bit per symbol, y = x XOR k: a full one-time pad."""
    f: Dict[FKey, str] = {(0, x, k): _bit(x ^ int(k)) for x in (0, 1) for k in "01"}
    return EncrypterSpec(2, 1, ("0", "1"), ((1, 1),), ((0, 0),), f, name="xor")


def idle(alpha: int = 2) -> EncrypterSpec:
    """One state, no key, no output: the system only idles."""
    f: Dict[FKey, str] = {(0, x, ""): "" for x in range(alpha)}
    return EncrypterSpec(
        alpha, 1, ("",), ((0,) * alpha,), ((0,) * alpha,), f, name="idle"
    )


def clear(alpha: int = 2) -> EncrypterSpec:
    """One state, no key, each symbol sent in the clear in ceil(log2 alpha) bits."""
    width = symbol_width(alpha)
    words = tuple(format(x, f"0{width}b") for x in range(alpha))
    f: Dict[FKey, str] = {(0, x, ""): words[x] for x in range(alpha)}
    return EncrypterSpec(alpha, 1, words, ((0,) * alpha,), ((0,) * alpha,), f, name="clear")


def toggle() -> EncrypterSpec:
    """Two alternating states: padded in state 0, sent clear in state 1."""
    f: Dict[FKey, str] = {}
    for x in (0, 1):
        for k in "01":
            f[(0, x, k)] = _bit(x ^ int(k))
        f[(1, x, "")] = _bit(x)
    return EncrypterSpec(
        2, 2, ("0", "1"), ((1, 1), (0, 0)), ((1, 1), (0, 0)), f, name="toggle"
    )


def parity() -> EncrypterSpec:
    """State tracks the parity of ones; pads only while the parity is even."""
    f: Dict[FKey, str] = {}
    for x in (0, 1):
        for k in "01":
            f[(0, x, k)] = _bit(x ^ int(k))
        f[(1, x, "")] = _bit(x)
    return EncrypterSpec(
        2, 2, ("0", "1"), ((1, 1), (0, 0)), ((0, 1), (1, 0)), f, name="parity"
    )


def delay() -> EncrypterSpec:
    """State holds the previous symbol, which is emitted one step late; no key."""
    f: Dict[FKey, str] = {(z, x, ""): _bit(z) for z in (0, 1) for x in (0, 1)}
    return EncrypterSpec(
        2, 2, ("0", "1"), ((0, 0), (0, 0)), ((0, 1), (0, 1)), f, name="delay"
    )


def change_pad() -> EncrypterSpec:
    """Repeats emit "0" unkeyed; changes emit a padded "1".

    With key bit 1 a change also emits "0", so the position of a change is
    lost: this machine is not information lossless.
    """
    f: Dict[FKey, str] = {}
    for z in (0, 1):
        f[(z, z, "")] = "0"
        for k in "01":
            f[(z, 1 - z, k)] = _bit(1 ^ int(k))
    return EncrypterSpec(
        2, 2, ("0", "1"), ((0, 1), (1, 0)), ((0, 1), (0, 1)), f, name="change_pad"
    )


MACHINES: Dict[str, Callable[[], EncrypterSpec]] = {
    "xor": xor,
    "idle": idle,
    "clear": clear,
    "toggle": toggle,
    "parity": parity,
    "delay": delay,
    "change_pad": change_pad,
}


def get_machine(name: str) -> EncrypterSpec:
    """Look up a preset encrypter by name (case-insensitive).

    Raises:
        KeyError: If the machine name is not recognized.
    """
    key = name.lower()
    if key not in MACHINES:
        valid = ", ".join(sorted(MACHINES))
        raise KeyError(f"Unknown machine {name!r}. Valid: {valid}")
    return MACHINES[key]()


def list_machines() -> List[EncrypterSpec]:
    """All binary presets, in registry order."""
    return [build() for build in MACHINES.values()]
