"""Run reports -- the JSON record of one maxleak command."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from maxleak import __version__
from maxleak.storage import atomic_json_save, dumps, locked_json_load

SCHEMA_ID = "maxleak.report/1"


@dataclass
class CheckResult:
    """One asserted property: its name, the instance it ran on and the outcome."""

    name: str
    passed: bool
    instance: str = ""
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "instance": self.instance, "detail": self.detail}


@dataclass
class Report:
    """Command echo, per-instance results and asserted checks.

    Results are kept sorted by instance key so the rendered JSON does not
    depend on the order sweep workers finish in.
    """

    command: str
    args: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    results: List[Dict[str, Any]] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)

    def add_result(self, kind: str, instance: str, data: Dict[str, Any]) -> None:
        self.results.append({"kind": kind, "instance": instance, "data": data})

    def check(self, name: str, passed: bool, instance: str = "", detail: str = "") -> bool:
        """Record an asserted property and return its outcome."""
        self.checks.append(CheckResult(name, bool(passed), instance, detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        results = sorted(self.results, key=lambda r: (r["kind"], r["instance"]))
        checks = sorted(self.checks, key=lambda c: (c.name, c.instance))
        return {
            "schema": SCHEMA_ID,
            "version": __version__,
            "command": self.command,
            "args": self.args,
            "seed": self.seed,
            "passed": self.passed,
            "results": results,
            "checks": [c.to_dict() for c in checks],
        }

    def render(self) -> str:
        return dumps(self.to_dict())

    def save(self, path: str) -> None:
        atomic_json_save(path, self.to_dict())


def load_report(path: str) -> Report:
    """Read a saved report back.

    Raises:
        ValueError: If the file is missing, empty or carries another schema.
    """
    data = locked_json_load(path)
    if data is None:
        raise ValueError(f"no report at {path!r}")
    if data.get("schema") != SCHEMA_ID:
        raise ValueError(f"unsupported report schema {data.get('schema')!r}, expected {SCHEMA_ID!r}")
    report = Report(data["command"], data.get("args", {}), data.get("seed"), list(data["results"]))
    for c in data.get("checks", []):
        report.checks.append(CheckResult(c["name"], c["passed"], c.get("instance", ""), c.get("detail", "")))
    return report
