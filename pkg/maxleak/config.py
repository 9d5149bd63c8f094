"""Central configuration for enumeration budgets and experiment runs."""

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from maxleak.lz78 import MAX_ALPHA

BUDGET_ENV_VAR = "MAXLEAK_BUDGET"
MAX_LAMBDA_TERM = 0xFFFFFFFF  # lambda travels as two 32-bit header fields


class BudgetExceededError(ValueError):
    """An exhaustive enumeration would exceed the configured budget."""


@dataclass
class AuditBudget:
    """Limits on exhaustive enumeration.

    Attributes:
        name: Display name of the preset.
        max_enumeration: Largest number of elementary cases (inputs times key
            patterns) a single enumeration may visit.
        max_n: Largest sequence length accepted by sweeps.
        il_horizon: Largest segment length searched by the IL audit.
    """

    name: str = "Desk"
    max_enumeration: int = 1 << 24
    max_n: int = 512
    il_horizon: int = 12

    def __post_init__(self) -> None:
        if self.max_enumeration <= 0 or self.max_n <= 0 or self.il_horizon < 0:
            raise ValueError(f"Budget limits must be positive: {self!r}")

    def check(self, work: int, what: str) -> None:
        """Raise BudgetExceededError if ``work`` cases exceed the budget."""
        if work > self.max_enumeration:
            raise BudgetExceededError(
                f"{what} needs {work} cases, budget is {self.max_enumeration} "
                f"(raise it with {BUDGET_ENV_VAR})"
            )


# Predefined budgets
QUICK = AuditBudget("Quick", 1 << 16, 64, 6)
DESK = AuditBudget("Desk", 1 << 24, 512, 12)
DEEP = AuditBudget("Deep", 1 << 28, 4096, 16)

BUDGET_PRESETS: Dict[str, AuditBudget] = {
    "quick": QUICK,
    "desk": DESK,
    "deep": DEEP,
}


def get_budget(name: str) -> AuditBudget:
    """Look up a budget preset by name (case-insensitive).

    Raises:
        KeyError: If the budget name is not recognized.
    """
    key = name.lower()
    if key not in BUDGET_PRESETS:
        valid = ", ".join(sorted(BUDGET_PRESETS))
        raise KeyError(f"Unknown budget {name!r}. Valid: {valid}")
    return BUDGET_PRESETS[key]


def list_budgets() -> List[AuditBudget]:
    """Return all budget presets from smallest to largest."""
    return [QUICK, DESK, DEEP]


def budget_from_env(base: Optional[AuditBudget] = None) -> AuditBudget:
    """Return ``base`` (default DESK) with max_enumeration taken from MAXLEAK_BUDGET if set."""
    base = base or DESK
    raw = os.environ.get(BUDGET_ENV_VAR)
    if raw is None or raw.strip() == "":
        return base
    try:
        value = int(raw, 0)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV_VAR} must be an integer, got {raw!r}") from None
    return AuditBudget(base.name, value, base.max_n, base.il_horizon)


def parse_lambda(text: str) -> Fraction:
    """Parse a normalized leakage given as ``p/q``, an integer or a decimal."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"lambda must be a rational p/q, got {text!r}") from None
    if value < 0:
        raise ValueError(f"lambda must be >= 0, got {text!r}")
    if max(value.numerator, value.denominator) > MAX_LAMBDA_TERM:
        raise ValueError(f"lambda {text!r} needs a numerator and denominator below 2**32")
    return value


@dataclass
class ExperimentConfig:
    """Top-level configuration for a maxleak command-line run."""

    command: str
    input_path: Optional[str] = None
    text: Optional[str] = None  # inline input, alternative to input_path
    alpha: int = 2
    lam: Fraction = Fraction(0)
    spec_path: Optional[str] = None
    machine: Optional[str] = None  # preset name, alternative to spec_path
    n: Optional[int] = None
    key_path: Optional[str] = None
    seed: Optional[int] = None
    budget: AuditBudget = field(default_factory=budget_from_env)
    workers: int = 1
    output_path: Optional[str] = None  # JSON report; stdout when None
    out_path: Optional[str] = None  # binary or text artifact (codeword, ciphertext, plaintext)
    mod: bool = False  # remap out-of-alphabet bytes modulo alpha
    padded: bool = False  # equal-length padding before the one-time pad
    all_x: bool = False
    horizon: Optional[int] = None
    options: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 2 <= self.alpha <= MAX_ALPHA:
            raise ValueError(f"alpha must be in 2..{MAX_ALPHA}, got {self.alpha}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if max(self.lam.numerator, self.lam.denominator) > MAX_LAMBDA_TERM:
            raise ValueError(f"lambda {self.lam} needs a numerator and denominator below 2**32")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.n is not None and not 1 <= self.n <= self.budget.max_n:
            raise ValueError(f"n must be in 1..{self.budget.max_n}, got {self.n}")
