"""Structured pass/fail/skip evidence for verification scans.

Failures and skips are recorded individually with witnesses; passing
instances are aggregated per law so large scans stay cheap to report.
Reports are deterministic: entries are sorted on finalisation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
SKIP = "skipped"


@dataclass(frozen=True)
class Check:
    law: str
    status: str
    witnesses: tuple[str, ...] = ()
    message: str = ""

    def line(self) -> str:
        parts = [self.status.upper(), self.law]
        if self.witnesses:
            parts.append("witnesses=[" + ", ".join(self.witnesses) + "]")
        if self.message:
            parts.append(self.message)
        return "  ".join(parts)


@dataclass
class VerificationReport:
    """Evidence for one verification run.

    A fail entry always carries at least one witness; a skip entry always
    carries a reason, so no skip is ever unexplained.
    """

    title: str = ""
    entries: list[Check] = field(default_factory=list)
    pass_counts: dict[str, int] = field(default_factory=dict)

    def add_pass(self, law: str, n: int = 1) -> None:
        self.pass_counts[law] = self.pass_counts.get(law, 0) + n

    def fail(self, law: str, witnesses, message: str = "") -> None:
        ws = tuple(str(w) for w in witnesses)
        if not ws:
            raise ValueError("a failure must carry at least one witness")
        self.entries.append(Check(law, FAIL, ws, message))

    def skip(self, law: str, reason: str, witnesses=()) -> None:
        if not reason:
            raise ValueError("a skip must carry a reason")
        self.entries.append(Check(law, SKIP, tuple(str(w) for w in witnesses), reason))

    def extend(self, other: "VerificationReport") -> None:
        self.entries.extend(other.entries)
        for law, n in other.pass_counts.items():
            self.add_pass(law, n)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.entries if c.status == FAIL]

    @property
    def skips(self) -> list[Check]:
        return [c for c in self.entries if c.status == SKIP]

    def passed(self, warnings_as_errors: bool = False) -> bool:
        if self.failures:
            return False
        if warnings_as_errors and self.skips:
            return False
        return True

    def summary(self) -> dict[str, int]:
        return {
            PASS: sum(self.pass_counts.values()),
            FAIL: len(self.failures),
            SKIP: len(self.skips),
        }

    def finalize(self) -> "VerificationReport":
        self.entries.sort(key=lambda c: (c.law, c.status, c.witnesses, c.message))
        return self

    def to_dict(self) -> dict:
        self.finalize()
        checks = [
            {
                "law": c.law,
                "status": c.status,
                "witnesses": list(c.witnesses),
                "message": c.message,
            }
            for c in self.entries
        ]
        for law in sorted(self.pass_counts):
            checks.append(
                {
                    "law": law,
                    "status": PASS,
                    "witnesses": [],
                    "message": f"{self.pass_counts[law]} instances",
                }
            )
        return {"title": self.title, "checks": checks, "summary": self.summary()}

    def text(self) -> str:
        self.finalize()
        lines = []
        if self.title:
            lines.append(f"# {self.title}")
        for law in sorted(self.pass_counts):
            lines.append(f"PASS  {law}  ({self.pass_counts[law]} instances)")
        for c in self.entries:
            lines.append(c.line())
        s = self.summary()
        lines.append(f"summary: pass={s[PASS]} fail={s[FAIL]} skipped={s[SKIP]}")
        return "\n".join(lines)
