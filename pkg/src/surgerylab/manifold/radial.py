"""Metrics in geodesic polar form ``dr^2 + g_r`` and their mollification."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cutoff import psi_extended

__all__ = [
    "RadialMetric",
    "SphereCheck",
    "mollify_ball_metric",
    "metric_c2_deviation",
    "geodesic_sphere_check",
    "DIFF_STEP",
]

# central-difference step as a fraction of the radius scale
DIFF_STEP = 1e-4


@dataclass(frozen=True)
class RadialMetric:
    """Polar-form metric ``dr^2 + g_r`` around a center.

    ``angular(r)`` returns the matrix of ``g_r`` in an orthonormal frame of the
    unit round metric on the ``(n-1)``-sphere, with shape ``r.shape + (n-1, n-1)``.
    The round metric is ``sin(r)**2 * I``.

    Parameters
    ----------
    angular : callable
        Vectorized map ``r -> g_r``.
    rho_max : float
        Largest radius on which the metric is defined.
    dimension : int
        Manifold dimension ``n >= 2``.
    center : str
        Id of the center point.
    """

    angular: Callable[[np.ndarray], np.ndarray]
    rho_max: float
    dimension: int = 2
    center: str = "p"
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")

    @property
    def m(self) -> int:
        return self.dimension - 1

    def g(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.asarray(self.angular(r), dtype=float)
        return np.broadcast_to(out, r.shape + (self.m, self.m))

    def derivatives(self, r, step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Value, first and second ``r``-derivatives by central differences."""
        r = np.asarray(r, dtype=float)
        gm, g0, gp = self.g(r - step), self.g(r), self.g(r + step)
        return g0, (gp - gm) / (2 * step), (gp - 2 * g0 + gm) / step**2

    @classmethod
    def round(cls, dimension: int = 2, rho_max: float = np.pi / 2, center: str = "p"):
        return cls.warped(lambda r: np.sin(r) ** 2, dimension, rho_max, center, "round")

    @classmethod
    def warped(cls, a: Callable, dimension: int = 2, rho_max: float = np.pi / 2,
               center: str = "p", label: str = "warped"):
        """Isotropic metric ``dr^2 + a(r) g_1``."""
        eye = np.eye(dimension - 1)

        def angular(r):
            return np.asarray(a(np.asarray(r, dtype=float)))[..., None, None] * eye

        return cls(angular, rho_max, dimension, center, label)


def _round_part(r: np.ndarray, m: int) -> np.ndarray:
    return (np.sin(r) ** 2)[..., None, None] * np.eye(m)


def mollify_ball_metric(g: RadialMetric, rho: float) -> RadialMetric:
    """Make ``g`` exactly round on ``[0, 0.9 rho]`` using the annular cutoff.

    On ``[0.9 rho, rho]`` the result is ``psi (g_r - sin^2 r g_1) + sin^2 r g_1``
    and for ``r >= rho`` it returns ``g_r`` unchanged.

    Raises
    ------
    ValueError
        If ``rho`` exceeds ``g.rho_max``.
    """
    if not 0 < rho <= g.rho_max:
        raise ValueError(f"rho={rho} must lie in (0, rho_max={g.rho_max}]")
    m = g.m

    def angular(r):
        r = np.asarray(r, dtype=float)
        gr = g.g(r)
        s = _round_part(r, m)
        psi = np.asarray(psi_extended(r, rho))[..., None, None]
        blended = psi * (gr - s) + s
        return np.where((r >= rho)[..., None, None], gr, blended)

    return RadialMetric(angular, g.rho_max, g.dimension, g.center, f"mollified({g.label}, {rho})")


def metric_c2_deviation(g1: RadialMetric, g2: RadialMetric, r_interval,
                        num: int = 801, scaled: bool = True,
                        step: float | None = None) -> float:
    """Fixed C2-norm of ``g1 - g2`` over a radial interval.

    The norm is the max over grid points and components of
    ``|D| + s |D'| + s^2 |D''|`` where ``D = g1_r - g2_r`` and ``s`` is the outer
    radius of the interval (``s = 1`` when ``scaled`` is false).  Weighting by
    the radius makes the norm invariant under rescaling the ball to unit size.

    Parameters
    ----------
    r_interval : (float, float)
        Closed interval ``[r0, r1]`` with ``r1 > 0``.  A left end at 0 is moved
        to ``step`` so the stencil stays in the chart.
    num : int
        Number of grid points.
    step : float, optional
        Central-difference step, default ``DIFF_STEP * r1``.
    """
    r0, r1 = map(float, r_interval)
    if not r1 > 0 or r1 < r0:
        raise ValueError("need 0 <= r0 <= r1 with r1 > 0")
    h = DIFF_STEP * r1 if step is None else step
    r = np.linspace(max(r0, h), r1, num)
    a0, a1, a2 = g1.derivatives(r, h)
    b0, b1, b2 = g2.derivatives(r, h)
    s = r1 if scaled else 1.0
    dev = np.abs(a0 - b0) + s * np.abs(a1 - b1) + s * s * np.abs(a2 - b2)
    return float(dev.max())


@dataclass(frozen=True)
class SphereCheck:
    eps: float
    deviation: float
    bound: float
    passed: bool


def geodesic_sphere_check(g: RadialMetric, eps: float, tol: float = 1e-6) -> SphereCheck:
    """Compare the rescaled geodesic sphere ``g_eps / eps^2`` with the unit round metric.

    The angular part is expressed in a rotation-invariant frame, so tangential
    derivatives vanish and the C2-norm reduces to the largest entry of
    ``I - g_eps / eps^2``.  The check passes when this is at most ``eps^2 (1 + tol)``.
    """
    if not 0 < eps < g.rho_max:
        raise ValueError("eps must lie in (0, rho_max)")
    dev = float(np.abs(np.eye(g.m) - g.g(np.array(eps)) / eps**2).max())
    bound = eps**2
    return SphereCheck(eps, dev, bound, dev <= bound * (1 + tol))
