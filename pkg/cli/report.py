"""
FermiBalance – Run reports
===========================
Collects verdicts and numbers from a command and renders them as a
deterministic JSON document (standard output) plus a short human summary
(standard error).
"""

from __future__ import annotations

import json
import numbers
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator

import numpy as np

from core.balance import BalanceReport


def to_jsonable(value: Any) -> Any:
    """Convert numpy and complex values; complex numbers with a non-zero imaginary part become ``[re, im]``."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return float(value)
    if isinstance(value, numbers.Complex):
        z = complex(value)
        return z.real if z.imag == 0.0 else [z.real, z.imag]
    return value


def balance_summary(report: BalanceReport) -> Dict[str, Any]:
    return {
        "max_violation": report.max_violation,
        "argmax_pair": list(report.argmax_pair),
        "tolerance": report.tolerance,
    }


@dataclass
class RunReport:
    """Outcome of one CLI command.

    ``verdicts`` hold the raw outcome of every check. ``expected`` lists the
    outcome a demo is meant to reproduce; checks missing from it are
    expected to pass.
    """

    command: str
    scenario: Dict[str, Any] = field(default_factory=dict)
    verdicts: Dict[str, bool] = field(default_factory=dict)
    expected: Dict[str, bool] = field(default_factory=dict)
    results: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(verdict == self.expected.get(name, True) for name, verdict in self.verdicts.items())

    def record(self, name: str, verdict: bool, **details: Any) -> None:
        self.verdicts[name] = bool(verdict)
        if details:
            self.results[name] = details

    def note(self, name: str, **details: Any) -> None:
        """Attach numbers that carry no verdict."""
        self.results[name] = details

    @contextmanager
    def timed(self, step: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[step] = self.timings.get(step, 0.0) + time.perf_counter() - start

    def to_dict(self, *, include_timings: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "command": self.command,
            "scenario": self.scenario,
            "verdicts": self.verdicts,
            "results": self.results,
            "passed": self.passed,
        }
        if self.expected:
            data["expected"] = self.expected
        if include_timings:
            data["timings"] = self.timings
        return to_jsonable(data)

    def to_json(self, *, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings=include_timings), sort_keys=True, indent=2)

    def summary(self) -> str:
        lines = [f"== {self.command} =="]
        for name, verdict in self.verdicts.items():
            wanted = self.expected.get(name, True)
            mark = "ok" if verdict == wanted else "MISMATCH"
            lines.append(f"  {name:<32} {str(verdict).lower():<6} (expected {str(wanted).lower()}) {mark}")
        for step, seconds in self.timings.items():
            lines.append(f"  time {step:<27} {seconds * 1000:.1f} ms")
        lines.append("PASSED" if self.passed else "FAILED")
        return "\n".join(lines)
