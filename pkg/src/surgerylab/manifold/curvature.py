"""Scalar-curvature bookkeeping for glued constructions."""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["scale_scalar_curvature", "ScalarCurvatureLedger"]


def scale_scalar_curvature(R: float, C: float) -> float:
    """Scalar curvature of ``C^2 g`` given that of ``g``: ``R / C^2``."""
    if not C > 0:
        raise ValueError("scale factor C must be positive")
    return R / C**2


@dataclass(frozen=True)
class ScalarCurvatureLedger:
    """Analytic lower bounds on scalar curvature, one per region.

    The construction's floor is the minimum over contributions.  Instances are
    immutable; :meth:`add` returns an extended copy.
    """

    contributions: tuple = field(default_factory=tuple)

    def add(self, label: str, floor: float) -> "ScalarCurvatureLedger":
        return ScalarCurvatureLedger(self.contributions + ((str(label), float(floor)),))

    def merged(self, other: "ScalarCurvatureLedger") -> "ScalarCurvatureLedger":
        return ScalarCurvatureLedger(self.contributions + other.contributions)

    @property
    def kappa_floor(self) -> float:
        if not self.contributions:
            raise ValueError("empty ledger")
        return min(v for _, v in self.contributions)

    def __len__(self) -> int:
        return len(self.contributions)
