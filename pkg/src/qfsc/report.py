"""Uniform pass/fail record shared by the verification routines."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of one numerical identity check.

    ``ref`` is a short neutral label of the identity being checked.
    """

    name: str
    max_deviation: float
    tolerance: float
    ref: str = ""
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation <= self.tolerance)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_ref": self.ref,
            "status": self.status,
            "max_deviation": float(self.max_deviation),
            "tolerance": float(self.tolerance),
            "params": self.params,
            "details": self.details,
        }
