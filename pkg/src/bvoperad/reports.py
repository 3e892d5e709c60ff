"""Structured pass/fail ledgers shared by validators, identity sweeps and the CLI.

Each check records a stable name, a human-readable statement of the identity
or axiom, the range it swept, and -- on failure -- the first counterexample
found, with both sides rendered exactly.  Reports serialize to JSON with
sorted keys so repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional

from .fields import FieldSpec
from .linalg import Vec


def render_vec(field: FieldSpec, v: Vec) -> Dict[str, str]:
    return {str(k): field.render(v[k]) for k in sorted(v)}


@dataclass
class CheckResult:
    name: str
    statement: str
    scope: str
    passed: bool
    counterexample: Optional[dict] = None
    details: Optional[dict] = None

    def to_json_dict(self) -> dict:
        out: dict = {
            "name": self.name,
            "statement": self.statement,
            "scope": self.scope,
            "passed": self.passed,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.details is not None:
            out["details"] = self.details
        return out


@dataclass
class Report:
    title: str
    items: List[CheckResult] = dc_field(default_factory=list)
    metadata: Dict[str, object] = dc_field(default_factory=dict)

    def add(self, item: CheckResult) -> None:
        self.items.append(item)

    def extend(self, other: "Report") -> None:
        self.items.extend(other.items)

    @property
    def all_passed(self) -> bool:
        return all(item.passed for item in self.items)

    def failures(self) -> List[CheckResult]:
        return [item for item in self.items if not item.passed]

    def find(self, name: str) -> Optional[CheckResult]:
        for item in self.items:
            if item.name == name:
                return item
        return None

    def to_json_dict(self) -> dict:
        return {
            "title": self.title,
            "metadata": self.metadata,
            "all_passed": self.all_passed,
            "checks": [item.to_json_dict() for item in self.items],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def render_text(self) -> str:
        lines = [self.title]
        for item in self.items:
            mark = "PASS" if item.passed else "FAIL"
            lines.append(f"  {mark}  {item.name}  [{item.scope}]")
        return "\n".join(lines)
