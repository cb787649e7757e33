"""Parametric tunnel model with the diameter, volume and scalar bounds only."""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["TunnelModel", "tunnel_make", "sphere_area", "DEFAULT_A_MODEL", "DEFAULT_C_A"]

DEFAULT_A_MODEL = 4.0
# L = ell + DEFAULT_C_A * delta
DEFAULT_C_A = 2.0


def sphere_area(n: int) -> float:
    """Area of the unit ``(n-1)``-sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class TunnelModel:
    """Warped-product stand-in for a positive scalar curvature tunnel.

    The tunnel is ``[0, L] x S^(n-1)`` with ``L = ell + c_A delta`` and neck
    radius ``beta delta``, where ``beta`` is chosen so that
    ``vol = (A_model / 4) (ell + 2 delta) delta^(n-1)`` when ``c_A = 2``.
    Both bounds ``ell < L < A_model delta + ell`` and
    ``vol < A_model (delta^n + ell delta^(n-1))`` then hold strictly.
    """

    delta: float
    ell: float
    n: int = 3
    kappa: float = 0.0
    j: int = 1
    A_model: float = DEFAULT_A_MODEL
    c_A: float = DEFAULT_C_A

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.ell < 0:
            raise ValueError("ell must be nonnegative")
        if self.n < 3:
            raise ValueError("tunnels need n >= 3")
        if self.j < 1:
            raise ValueError("j must be at least 1")
        if not 0 < self.c_A < self.A_model:
            raise ValueError("need 0 < c_A < A_model")

    @property
    def L(self) -> float:
        return self.ell + self.c_A * self.delta

    @property
    def neck_ratio(self) -> float:
        return (self.A_model / (4.0 * sphere_area(self.n))) ** (1.0 / (self.n - 1))

    @property
    def neck_radius(self) -> float:
        return self.neck_ratio * self.delta

    @property
    def vol(self) -> float:
        return sphere_area(self.n) * self.neck_radius ** (self.n - 1) * self.L

    @property
    def scalar_floor(self) -> float:
        return self.kappa - 1.0 / self.j

    def diameter_bounds_hold(self) -> bool:
        return self.ell < self.L < self.A_model * self.delta + self.ell

    def volume_bound_holds(self) -> bool:
        return self.vol < self.A_model * (self.delta**self.n + self.ell * self.delta ** (self.n - 1))


def tunnel_make(delta: float, ell: float, n: int = 3, kappa: float = 0.0, j: int = 1,
                A_model: float = DEFAULT_A_MODEL) -> TunnelModel:
    """Build a :class:`TunnelModel`; see the class for the realized quantities."""
    return TunnelModel(float(delta), float(ell), int(n), float(kappa), int(j), float(A_model))
