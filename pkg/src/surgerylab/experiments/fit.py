"""Log-log slope fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SlopeFit", "fit_slope"]


@dataclass(frozen=True)
class SlopeFit:
    log_x: tuple
    log_y: tuple
    slope: float
    intercept: float
    r2: float

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "log_x": list(self.log_x), "log_y": list(self.log_y)}


def fit_slope(xs, ys) -> SlopeFit:
    """Least-squares line through ``(log x, log y)``.

    Raises
    ------
    ValueError
        With fewer than three points or any nonpositive value.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d of equal length")
    if len(x) < 3:
        raise ValueError("need at least three points")
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise ValueError("log-log fits need positive values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(tuple(lx.tolist()), tuple(ly.tolist()), float(slope), float(intercept), r2)
