"""File I/O for reports, channel dumps and binary artifacts.

JSON is written atomically under an exclusive ``fcntl`` lock with sorted keys,
so two runs with the same seed produce byte-identical files.
"""

import fcntl
import json
import os
import tempfile
from contextlib import contextmanager
from typing import Any, Iterator, Optional


@contextmanager
def locked_open(path: str, mode: str = "r") -> Iterator[Any]:
    """Open a file under an advisory lock: shared for pure reads, else exclusive."""
    f = open(path, mode)
    try:
        read_only = "r" in mode and not any(ch in mode for ch in "wa+")
        fcntl.flock(f.fileno(), fcntl.LOCK_SH if read_only else fcntl.LOCK_EX)
        yield f
    finally:
        fcntl.flock(f.fileno(), fcntl.LOCK_UN)
        f.close()


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _atomic_write(path: str, payload: bytes) -> None:
    dir_path = os.path.dirname(path) or "."
    os.makedirs(dir_path, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dir_path, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            fcntl.flock(f.fileno(), fcntl.LOCK_EX)
            f.write(payload)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_json_save(path: str, data: Any) -> None:
    """Write ``data`` as canonical JSON, replacing ``path`` atomically."""
    _atomic_write(path, dumps(data).encode("utf-8"))


def atomic_bytes_save(path: str, payload: bytes) -> None:
    """Write a binary artifact (codeword, ciphertext) atomically."""
    _atomic_write(path, payload)


def locked_json_load(path: str) -> Optional[Any]:
    """Parse a JSON file under a shared lock; None if it is missing or empty."""
    if not os.path.isfile(path) or os.path.getsize(path) == 0:
        return None
    with locked_open(path, "r") as f:
        return json.load(f)


def read_bytes(path: str) -> bytes:
    """Read a whole binary file under a shared lock."""
    with locked_open(path, "rb") as f:
        return f.read()
