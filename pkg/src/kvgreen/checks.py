"""Result record shared by the identity checks."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of comparing two independently computed sides of an identity.

    ``deviation`` is relative (``|lhs - rhs| / max(|lhs|, |rhs|)``) unless
    both sides vanish, in which case it is absolute.
    """

    name: str
    lhs: complex | float
    rhs: complex | float
    deviation: float
    details: dict = field(default_factory=dict)

    def passed(self, tol: float) -> bool:
        return self.deviation < tol


def relative_deviation(lhs, rhs) -> float:
    scale = max(abs(lhs), abs(rhs))
    diff = abs(lhs - rhs)
    return float(diff / scale) if scale > 0 else float(diff)
