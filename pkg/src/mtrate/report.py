"""Structured pass/fail reports produced by the verification routines."""

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"


@dataclass
class CheckReport:
    """Outcome of one verification: named residuals (want ~0), named margins
    (want >= 0), and a verdict derived from them at a single tolerance."""

    verdict: str
    residuals: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)
    notes: str = ""
    tol: float = 0.0

    @property
    def passed(self):
        return self.verdict == PASS

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "margins": {k: float(v) for k, v in self.margins.items()},
            "notes": self.notes,
            "tol": self.tol,
        }


def build_report(residuals, margins, tol, notes=""):
    """Verdict is pass iff every residual <= tol and every margin >= -tol."""
    ok = all(abs(v) <= tol for v in residuals.values()) and all(
        v >= -tol for v in margins.values()
    )
    return CheckReport(
        verdict=PASS if ok else FAIL,
        residuals=dict(residuals),
        margins=dict(margins),
        notes=notes,
        tol=tol,
    )


def not_applicable(notes, residuals=None, margins=None, tol=0.0):
    return CheckReport(
        verdict=NOT_APPLICABLE,
        residuals=dict(residuals or {}),
        margins=dict(margins or {}),
        notes=notes,
        tol=tol,
    )
