"""Source locations and diagnostics shared by every analysis stage."""

from __future__ import annotations

import json
from dataclasses import dataclass

# Rule identifiers are a fixed catalogue; reports and tests key on them.
RULE_IDS = frozenset(
    {
        "SYNTAX",
        "DUPLICATE_CLASS",
        "DUPLICATE_FEATURE",
        "UNKNOWN_NAME",
        "BAD_CREATION_NAME",
        "ARITY",
        "TYPE_MISMATCH",
        "OLD_CONTEXT",
        "FORALL_RANGE",
        "ECC",
        "SECR",
        "ARG_ASSIGN",
        "SLICED_DEFINEDNESS",
        "IMPURE_INVARIANT",
    }
)


@dataclass(frozen=True)
class SourceLoc:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    rule_id: str
    loc: SourceLoc
    message: str

    def __post_init__(self):
        assert self.rule_id in RULE_IDS, self.rule_id
        assert self.severity in ("error", "warning")

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "rule_id": self.rule_id,
            "file": self.loc.file,
            "line": self.loc.line,
            "column": self.loc.column,
            "message": self.message,
        }

    def __str__(self) -> str:
        return f"{self.loc}: {self.severity}: [{self.rule_id}] {self.message}"


def diagnostics_to_json(diags: list[Diagnostic]) -> str:
    return json.dumps([d.to_json() for d in diags], indent=2, sort_keys=True)
