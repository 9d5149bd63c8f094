"""Shared test fixtures and helpers for the maxleak test suite."""

import os
import shutil
import tempfile

import pytest

from maxleak.config import AuditBudget
from maxleak.lz78 import Sequence

SPECS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "specs")

WORKED_EXAMPLE = "abbabaabbaaabaa"


# --- Factory Helpers ---


def seq(text, alphabet="ab"):
    """Sequence from letters, a -> 0, b -> 1, ..."""
    return Sequence.from_text(text, alphabet)


def bits_of(x):
    """Sequence from a 0/1 string."""
    return Sequence.of([int(ch) for ch in x])


def tiny_budget(max_enumeration=1 << 10, il_horizon=12):
    """A budget small enough to trip in tests."""
    return AuditBudget("Tiny", max_enumeration, 64, il_horizon)


def spec_path(name):
    return os.path.join(SPECS_DIR, f"{name}.json")


# --- Fixtures ---


@pytest.fixture
def tmp_json_path():
    """Provide a temporary JSON file path, cleaned up after use."""
    with tempfile.NamedTemporaryFile(suffix=".json", delete=False) as f:
        path = f.name
    yield path
    if os.path.exists(path):
        os.unlink(path)


@pytest.fixture
def tmp_dir():
    """Provide a temporary directory, cleaned up after use."""
    d = tempfile.mkdtemp()
    yield d
    shutil.rmtree(d, ignore_errors=True)
