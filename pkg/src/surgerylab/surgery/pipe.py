"""The four single-pair spaces used to compare one tunnel with one string.

The base is a rotationally symmetric surface with the surgery points ``p``
and ``q`` at its two poles.  Ring grids keep that symmetry exactly, so a
sup over ring-invariant vertex sets is realized by one source per ring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..manifold.cutoff import cutoff_phi
from ..manifold.curvature import ScalarCurvatureLedger
from ..manifold.metrics import ConformalSphere, RevolutionMetric, RoundSphere, warped_cylinder
from ..manifold.radial import RadialMetric
from ..manifold.sampled import (DEFAULT_RING_REACH, SampledManifold, graded_nodes,
                                injectivity_radius_proxy, sample_rings)
from .glued import Attachments, GluedSpace
from .model import TunnelModel

__all__ = ["PipeParameterError", "PipeSpaces", "build_pipe_spaces"]


class PipeParameterError(ValueError):
    """Pipe parameters violate a precondition."""


@dataclass(frozen=True, eq=False)
class PipeSpaces:
    """``M_rho``, ``M~_rho``, ``M_0`` and ``M~_{0,rho}`` plus shared bookkeeping.

    Attributes
    ----------
    base, base_mollified : SampledManifold
        Same vertices and edges under ``g`` and the mollified ``g~``.
    W : ndarray of bool
        Base vertices outside both open balls of radius ``rho``.
    ring_radius_p, ring_radius_q : ndarray
        Distance of each ring to ``p`` and to ``q``.
    polar_p, polar_q : RadialMetric
        ``g`` in geodesic polar form at ``p`` and ``q``.
    """

    rho: float
    ell: float
    delta: float
    M_rho: GluedSpace
    Mt_rho: GluedSpace
    M_0: GluedSpace
    Mt_0rho: GluedSpace
    base: SampledManifold
    base_mollified: SampledManifold
    W: np.ndarray
    ring_radius_p: np.ndarray
    ring_radius_q: np.ndarray
    tunnel: TunnelModel
    metric: RevolutionMetric
    metric_mollified: RevolutionMetric
    polar_p: RadialMetric
    polar_q: RadialMetric

    @property
    def p(self) -> int:
        return 0

    @property
    def q(self) -> int:
        return self.base.n - 1

    @property
    def spaces(self) -> dict:
        return {"M_rho": self.M_rho, "Mt_rho": self.Mt_rho,
                "M_0": self.M_0, "Mt_0rho": self.Mt_0rho}


def _as_revolution(metric) -> RevolutionMetric:
    if isinstance(metric, (RoundSphere, ConformalSphere)):
        return metric.revolution()
    if isinstance(metric, RevolutionMetric) and all(metric.poles):
        return metric
    raise PipeParameterError("pipe spaces need a surface of revolution with two poles")


def _tunnel_glue(base: SampledManifold, metric: RevolutionMetric, t_delta_p: float,
                 t_delta_q: float, k_p: int, k_q: int, tunnel: TunnelModel, fine: float,
                 h: float, reach: float):
    lay = base.layout
    nsec = lay.n_sectors
    w_p = float(np.sqrt(metric.G(np.array(t_delta_p))))
    w_q = float(np.sqrt(metric.G(np.array(t_delta_q))))
    neck, L, dl = tunnel.neck_radius, tunnel.L, tunnel.delta

    def warp(s):
        s = np.asarray(s, dtype=float)
        u0 = np.clip(s / dl, 0.0, 1.0)
        u1 = np.clip((L - s) / dl, 0.0, 1.0)
        return neck + (w_p - neck) * (1 - cutoff_phi(u0)) + (w_q - neck) * (1 - cutoff_phi(u1))

    s_nodes = graded_nodes(L, h, [(0, dl, fine), (1, dl, fine)])
    cyl = sample_rings(warped_cylinder(L, warp), s_nodes, nsec, h, reach=reach,
                       prefix="tunnel/p-q")
    clay = cyl.layout
    # tunnel ring 0 is the base ring at p, its last ring the base ring at q
    remap = np.empty(cyl.n, dtype=np.int64)
    remap[clay.ring_vertices(0)] = lay.ring_vertices(k_p)
    remap[clay.ring_vertices(clay.n_rings - 1)] = lay.ring_vertices(k_q)
    interior = np.concatenate([clay.ring_vertices(k) for k in range(1, clay.n_rings - 1)])
    remap[interior] = base.n + np.arange(len(interior))
    ids = tuple(cyl.ids[i] for i in interior)
    return ids, remap[cyl.edges], cyl.lengths, cyl.volumes[interior]


def build_pipe_spaces(metric, rho: float, ell: float, delta: float | None = None,
                      h: float = 0.05, n_sectors: int | None = None, n_ball: int = 40,
                      kappa: float | None = None, j: int | None = None, n_model: int = 3,
                      A_model: float = 4.0, reach: float = DEFAULT_RING_REACH,
                      check_injectivity: bool = True) -> PipeSpaces:
    """Build ``M_rho``, ``M~_rho``, ``M_0`` and ``M~_{0,rho}`` for one pair of poles.

    ``p`` and ``q`` are the two poles of ``metric``.  Rings are uniform with
    step ``rho / n_ball`` inside both balls of radius ``rho`` (so the rings at
    ``delta``, ``0.9 rho`` and ``rho`` are exact) and have spacing at most
    ``h`` elsewhere.

    Parameters
    ----------
    metric : RoundSphere, ConformalSphere or RevolutionMetric
    rho : float
        Mollification radius, at most 0.5.
    ell : float
        String length, ``0 < ell < d_g(p, q)``.
    delta : float, optional
        Tunnel neck scale, default ``rho / 4``; must be below ``rho / 2``.
    kappa : float, optional
        Scalar floor of the base; taken from the metric when available.
    j : int, optional
        Scalar schedule, default ``ceil(1 / rho)``.

    Raises
    ------
    PipeParameterError
        On any precondition failure, including the gate ``ell < d_g~(p, q)``.
    """
    rev = _as_revolution(metric)
    if not 0 < rho <= 0.5:
        raise PipeParameterError("rho must lie in (0, 0.5]")
    delta = rho / 4 if delta is None else float(delta)
    if not 0 < delta < rho / 2:
        raise PipeParameterError("need 0 < delta < rho / 2")
    total = rev.length
    if not 0 < ell < total:
        raise PipeParameterError(f"need 0 < ell < d_g(p, q) = {total:.6g}")
    if 2 * rho >= total:
        raise PipeParameterError("balls around p and q overlap")
    fine = rho / n_ball
    k_delta = int(round(delta / fine))
    if abs(k_delta * fine - delta) > 1e-9 * rho or k_delta < 1:
        raise PipeParameterError("delta must be a multiple of rho / n_ball")
    if kappa is None:
        kappa = metric.scalar_curvature_floor() if hasattr(metric, "scalar_curvature_floor") else 0.0
    j = int(math.ceil(1.0 / rho)) if j is None else int(j)

    r_nodes = graded_nodes(total, h, [(0, rho, fine), (1, rho, fine)])
    t_nodes = rev.t_of_radius(r_nodes, 0)
    t_nodes[0], t_nodes[-1] = rev.t_range
    # measure the q side from q so the fine rings are exact there too
    q_side = r_nodes > 0.5 * total
    t_nodes[q_side] = rev.t_of_radius(total - r_nodes[q_side], 1)
    t_nodes[-1] = rev.t_range[1]
    r_p = r_nodes

    rev_t = rev.with_balls_mollified(rho)
    if n_sectors is None:
        widest = float(np.sqrt(np.max(rev.G(np.linspace(*rev.t_range, 2001)))))
        n_sectors = max(8, int(math.ceil(2 * np.pi * widest / h)))
    base = sample_rings(rev, t_nodes, n_sectors, h, reach=reach)
    base_t = sample_rings(rev_t, t_nodes, n_sectors, h, reach=reach, stencil_metric=rev)

    if check_injectivity:
        inj = injectivity_radius_proxy(base, 0, np.linspace(rho, 2 * rho, 3))
        if inj < rho:
            raise PipeParameterError(f"rho={rho} exceeds the injectivity proxy {inj:.3g}")
    lay = base.layout
    tol = 1e-9 * rho
    ring_r_p = r_p
    ring_r_q = np.abs(total - r_p)
    k_p = int(np.argmin(np.abs(r_p - delta)))
    k_q = int(np.argmin(np.abs(ring_r_q - delta)))
    ring_removed = (ring_r_p < delta - tol) | (ring_r_q < delta - tol)
    ring_W = (ring_r_p >= rho - tol) & (ring_r_q >= rho - tol)
    ring_of = lay.ring_of()
    keep = ~ring_removed[ring_of]
    W = ring_W[ring_of]

    tunnel = TunnelModel(delta, ell, n_model, float(kappa), j, A_model)
    ledger = ScalarCurvatureLedger().add("base", float(kappa)).add("tunnel", tunnel.scalar_floor)
    att_t = Attachments.build("tunnel", [0], [1], [ell], [delta], [tunnel.L])
    att_s = Attachments.build("string", [0], [1], [ell])

    spaces = {}
    for label, sample, met in (("", base, rev), ("t", base_t, rev_t)):
        ids, e, ln, vol = _tunnel_glue(sample, met, t_nodes[k_p], t_nodes[k_q], k_p, k_q,
                                       tunnel, fine, h, reach)
        spaces["rho" + label] = GluedSpace(sample, keep, ids, e, ln, vol, att_t, ledger,
                                           lay, f"M{'~' if label else ''}_rho",
                                           tunnel_volume=tunnel.vol)
        nseg = max(1, int(math.ceil(ell / h)))
        chain = [0] + [sample.n + k for k in range(nseg - 1)] + [sample.n - 1]
        s_ids = tuple(f"string/p-q/{k}" for k in range(1, nseg))
        s_edges = np.column_stack([chain[:-1], chain[1:]])
        spaces["0" + label] = GluedSpace(sample, np.ones(sample.n, dtype=bool), s_ids, s_edges,
                                         np.full(nseg, ell / nseg), np.zeros(nseg - 1), att_s,
                                         None, lay, f"M{'~' if label else ''}_0")

    gate = float(base_t.distances([0])[0, base_t.n - 1])
    if not ell < gate:
        raise PipeParameterError(f"gate fails: ell={ell} >= d_g~(p, q) = {gate:.6g}")
    return PipeSpaces(rho, ell, delta, spaces["rho"], spaces["rhot"], spaces["0"], spaces["0t"],
                      base, base_t, W, ring_r_p, ring_r_q, tunnel, rev, rev_t,
                      rev.polar_metric(0, 0.5 * total, "p"), rev.polar_metric(1, 0.5 * total, "q"))
