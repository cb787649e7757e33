"""Analytic metric descriptions that the samplers know how to discretize.

Two families are supported:

* sphere metrics in the ambient embedding (:class:`RoundSphere`,
  :class:`ConformalSphere`), sampled on a Fibonacci lattice;
* rotationally symmetric metrics ``E(t) dt^2 + G(t) dphi^2`` in a
  ``(t, phi)`` chart (:class:`RevolutionMetric`), sampled on ring grids.
  Radial balls, warped cylinders and the conformal sphere with poles at
  ``x3 = +-1`` are all of this form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .radial import RadialMetric, mollify_ball_metric

__all__ = [
    "GL8",
    "RoundSphere",
    "ConformalSphere",
    "RevolutionMetric",
    "radial_ball",
    "warped_cylinder",
    "metric_from_description",
]

GL8 = np.polynomial.legendre.leggauss(8)
_GL32 = np.polynomial.legendre.leggauss(32)


def _gl_unit(n_nodes):
    x, w = n_nodes
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class RoundSphere:
    """Round 2-sphere of radius ``radius`` embedded in R^3."""

    radius: float = 1.0
    kind: str = field(default="round", init=False)

    def conformal_factor(self, x: np.ndarray) -> np.ndarray:
        return np.zeros(x.shape[:-1])

    def scalar_curvature_floor(self) -> float:
        return 2.0 / self.radius**2

    def description(self) -> dict:
        return {"kind": "round", "radius": self.radius}

    def revolution(self) -> "RevolutionMetric":
        tau2 = self.radius**2
        return RevolutionMetric(lambda t: tau2 + 0.0 * t,
                                lambda t: tau2 * np.sin(t) ** 2,
                                (0.0, np.pi), (True, True), self.description())


@dataclass(frozen=True)
class ConformalSphere:
    """``exp(2f) g_round`` on the unit-direction sphere with ``f = amplitude * x3``."""

    amplitude: float = 0.1
    radius: float = 1.0
    kind: str = field(default="conformal", init=False)

    def conformal_factor(self, x: np.ndarray) -> np.ndarray:
        """``f`` evaluated at unit direction vectors ``x`` of shape ``(..., 3)``."""
        return self.amplitude * x[..., 2]

    def scalar_curvature(self, theta) -> np.ndarray:
        # R = 2 e^{-2f}(1 - lap f)/tau^2 with lap(cos theta) = -2 cos theta
        f = self.amplitude * np.cos(theta)
        return 2.0 * np.exp(-2.0 * f) * (1.0 + 2.0 * f) / self.radius**2

    def scalar_curvature_floor(self) -> float:
        return float(self.scalar_curvature(np.linspace(0.0, np.pi, 20001)).min())

    def description(self) -> dict:
        return {"kind": "conformal", "amplitude": self.amplitude, "radius": self.radius}

    def revolution(self) -> "RevolutionMetric":
        a, tau2 = self.amplitude, self.radius**2
        return RevolutionMetric(lambda t: tau2 * np.exp(2 * a * np.cos(t)),
                                lambda t: tau2 * np.exp(2 * a * np.cos(t)) * np.sin(t) ** 2,
                                (0.0, np.pi), (True, True), self.description())


@dataclass(frozen=True)
class RevolutionMetric:
    """``E(t) dt^2 + G(t) dphi^2`` on ``[t0, t1] x S^1``.

    ``poles[k]`` marks that ``G`` vanishes at the corresponding end and the
    whole end circle is a single point.
    """

    E: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    t_range: tuple
    poles: tuple = (False, False)
    meta: dict = field(default_factory=dict, compare=False)
    kind: str = field(default="revolution", init=False)

    def description(self) -> dict:
        return dict(self.meta) if self.meta else {"kind": "revolution"}

    def radial_coordinate(self, t, end: int = 0) -> np.ndarray:
        """Distance along a meridian from the ``end`` boundary (0 or 1) to ``t``."""
        t = np.asarray(t, dtype=float)
        lo = self.t_range[end]
        x, w = _gl_unit(_GL32)
        span = t - lo
        nodes = lo + span[..., None] * x
        vals = np.sqrt(self.E(nodes)) @ w
        return np.abs(span) * vals

    def t_of_radius(self, r, end: int = 0) -> np.ndarray:
        """Invert :meth:`radial_coordinate` by Newton iteration."""
        r = np.asarray(r, dtype=float)
        lo = self.t_range[end]
        sgn = 1.0 if end == 0 else -1.0
        t = lo + sgn * r / np.sqrt(self.E(np.asarray(lo)))
        for _ in range(50):
            err = self.radial_coordinate(t, end) - r
            step = sgn * err / np.sqrt(self.E(t))
            t = t - step
            if np.all(np.abs(step) <= 1e-15 * (1 + np.abs(t))):
                break
        return t

    @property
    def length(self) -> float:
        return float(self.radial_coordinate(np.array(self.t_range[1])))

    def polar_metric(self, end: int = 0, rho_max: float | None = None,
                     center: str = "p") -> RadialMetric:
        """The metric around a pole as ``dr^2 + a(r) dphi^2`` (``dphi`` unit-round)."""
        if not self.poles[end]:
            raise ValueError("polar form needs a pole at that end")
        if rho_max is None:
            rho_max = 0.5 * self.length
        return RadialMetric.warped(lambda r: self.G(self.t_of_radius(r, end)),
                                   2, float(rho_max), center, f"polar[{end}]")

    def with_balls_mollified(self, rho: float, ends=(0, 1)) -> "RevolutionMetric":
        """Replace ``G`` near the chosen poles by its mollified polar form."""
        for e in ends:
            if not self.poles[e]:
                raise ValueError("mollification is centered at poles")
        total = self.length
        if 2 * rho >= total:
            raise ValueError("balls overlap")
        moll = {e: mollify_ball_metric(self.polar_metric(e, 0.5 * total), rho) for e in ends}
        base_G = self.G

        def G(t):
            t = np.asarray(t, dtype=float)
            out = np.array(base_G(t), dtype=float, copy=True)
            for e, g in moll.items():
                r = self.radial_coordinate(t, e)
                inside = r < rho
                if np.any(inside):
                    out[inside] = g.g(r[inside])[..., 0, 0]
            return out

        meta = dict(self.meta)
        meta["mollified_rho"] = rho
        return RevolutionMetric(self.E, G, self.t_range, self.poles, meta)

    def segment_length(self, t_a, phi_a, t_b, phi_b) -> np.ndarray:
        """Length of the chart-linear segment, 8-point Gauss-Legendre."""
        x, w = _gl_unit(GL8)
        t_a, t_b = np.asarray(t_a, float), np.asarray(t_b, float)
        dt = (t_b - t_a)[..., None]
        dphi = (np.asarray(phi_b, float) - np.asarray(phi_a, float))[..., None]
        tt = t_a[..., None] + dt * x
        speed = np.sqrt(self.E(tt) * dt**2 + self.G(tt) * dphi**2)
        return speed @ w

    def area_between(self, t_a, t_b) -> np.ndarray:
        """``int sqrt(E G) dt`` between ``t_a`` and ``t_b`` (per unit of phi)."""
        x, w = _gl_unit(GL8)
        t_a, t_b = np.asarray(t_a, float), np.asarray(t_b, float)
        tt = t_a[..., None] + (t_b - t_a)[..., None] * x
        return np.abs(t_b - t_a) * (np.sqrt(self.E(tt) * self.G(tt)) @ w)


def radial_ball(g: RadialMetric, radius: float | None = None) -> RevolutionMetric:
    """Disk chart ``[0, radius] x S^1`` carrying a 2-dimensional radial metric."""
    if g.dimension != 2:
        raise ValueError("ring-grid sampling supports 2-dimensional radial metrics")
    R = g.rho_max if radius is None else radius
    return RevolutionMetric(lambda t: np.ones_like(np.asarray(t, float)),
                            lambda t: g.g(t)[..., 0, 0], (0.0, float(R)), (True, False),
                            {"kind": "radial", "label": g.label, "radius": float(R)})


def warped_cylinder(length: float, warp: Callable | float = 1.0) -> RevolutionMetric:
    """``dz^2 + w(z)^2 dphi^2`` on ``[0, length] x S^1``."""
    if callable(warp):
        G = lambda z: np.asarray(warp(np.asarray(z, float)), float) ** 2  # noqa: E731
        w_desc = "function"
    else:
        w0 = float(warp)
        G = lambda z: np.full(np.shape(z), w0 * w0)  # noqa: E731
        w_desc = w0
    return RevolutionMetric(lambda z: np.ones(np.shape(z)), G, (0.0, float(length)),
                            (False, False), {"kind": "cylinder", "length": float(length),
                                             "radius": w_desc})


def metric_from_description(desc: dict):
    """Build a metric object from a JSON-style description.

    Recognized kinds: ``round`` (radius), ``conformal`` (amplitude, radius),
    ``radial`` (profile ``"round"`` or ``"conformal"`` with amplitude, radius),
    ``cylinder`` (length, radius).
    """
    kind = desc.get("kind")
    if kind == "round":
        return RoundSphere(float(desc.get("radius", 1.0)))
    if kind == "conformal":
        return ConformalSphere(float(desc.get("amplitude", 0.1)), float(desc.get("radius", 1.0)))
    if kind == "radial":
        R = float(desc.get("radius", 0.5))
        profile = desc.get("profile", "round")
        if profile == "round":
            return radial_ball(RadialMetric.round(2, R), R)
        if profile == "conformal":
            rev = ConformalSphere(float(desc.get("amplitude", 0.1))).revolution()
            return radial_ball(rev.polar_metric(0, R), R)
        raise ValueError(f"unknown radial profile {profile!r}")
    if kind == "cylinder":
        return warped_cylinder(float(desc.get("length", 1.0)), float(desc.get("radius", 1.0)))
    raise ValueError(f"unknown metric kind {kind!r}")
