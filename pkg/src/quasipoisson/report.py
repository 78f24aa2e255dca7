"""Check records shared by the verification routines and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    passed: bool
    residual: Fraction | float
    witness: str | None = None

    def residual_text(self) -> str:
        if isinstance(self.residual, Fraction):
            return str(self.residual)
        return repr(float(self.residual))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "status": "pass" if self.passed else "fail",
            "residual": self.residual_text(),
            "witness": self.witness,
        }


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks: Iterable[Check]) -> None:
        self.checks.extend(checks)

    def prefixed(self, prefix: str) -> "Report":
        return Report([Check(f"{prefix}.{c.id}", c.anchor, c.passed, c.residual, c.witness) for c in self.checks])

    def __getitem__(self, check_id: str) -> Check:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dicts(self) -> list[dict]:
        return [c.to_dict() for c in sorted(self.checks, key=lambda c: c.id)]


def exact_check(check_id: str, anchor: str, diff, labels=None) -> Check:
    """Pass iff every entry of the exact array ``diff`` vanishes; witness is the worst index."""
    arr = np.asarray(diff, dtype=object)
    if arr.size == 0:
        return Check(check_id, anchor, True, Fraction(0))
    flat = [abs(Fraction(v)) for v in arr.ravel()]
    worst = max(range(len(flat)), key=flat.__getitem__)
    residual = flat[worst]
    witness = None
    if residual:
        idx = np.unravel_index(worst, arr.shape)
        witness = str(tuple(int(i) for i in idx)) if labels is None else labels(idx)
    return Check(check_id, anchor, residual == 0, residual, witness)


def numeric_check(check_id: str, anchor: str, residual: float, tol: float, witness: str | None = None) -> Check:
    residual = float(residual)
    ok = bool(np.isfinite(residual) and residual <= tol)
    return Check(check_id, anchor, ok, residual, None if ok else witness)
