"""Epsilon-nets, ports on geodesic spheres, string spaces and tunnel spaces."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from ..manifold.curvature import ScalarCurvatureLedger
from ..manifold.metrics import RoundSphere, warped_cylinder
from ..manifold.sampled import ResolutionError, SampledManifold, graded_nodes, sample_rings
from ..manifold.cutoff import cutoff_phi
from ..metric_core import FiniteMetricSpace
from .glued import Attachments, ConstructionError, GluedSpace
from .model import TunnelModel

__all__ = [
    "HypothesisError",
    "EpsilonNet",
    "PortSet",
    "TunnelRadii",
    "build_epsilon_net",
    "place_ports",
    "attach_strings",
    "choose_tunnel_radii",
    "attach_tunnels",
    "rho0_bisection",
    "pair_list",
]

_MIN_EDGE = 1e-12


class HypothesisError(ValueError):
    """An input violates a hypothesis of the construction."""


def pair_list(N: int) -> np.ndarray:
    """Unordered center pairs ``(i, j)``, ``i < j``, in lexicographic order."""
    i, j = np.triu_indices(N, k=1)
    return np.column_stack([i, j])


def _all_pairs(m: SampledManifold, D):
    return m.all_pairs if D is None else np.asarray(D)


# ---------------------------------------------------------------- nets

@dataclass(frozen=True, eq=False)
class EpsilonNet:
    """Centers ``p_1..p_N`` that are ``eps``-covering and ``eps``-separated."""

    eps: float
    centers: np.ndarray
    covering_radius: float
    min_separation: float

    @property
    def N(self) -> int:
        return len(self.centers)

    def center_ids(self, m: SampledManifold) -> tuple:
        return tuple(m.ids[i] for i in self.centers)


def build_epsilon_net(m: SampledManifold, eps: float, D=None) -> EpsilonNet:
    """Farthest-point epsilon-net seeded at the vertex of largest mean distance.

    Points are added while some vertex is farther than ``eps`` from every
    center, so the result covers within ``eps`` and every new center is more
    than ``eps`` from the previous ones.

    Raises
    ------
    ResolutionError
        If ``eps`` is below the graph resolution.
    """
    if eps < m.resolution:
        raise ResolutionError(f"eps={eps} is below the graph resolution h={m.resolution}")
    D = _all_pairs(m, D)
    seed = int(np.argmax(D.mean(axis=1)))
    centers = [seed]
    near = D[seed].copy()
    while True:
        far = int(np.argmax(near))
        if near[far] <= eps:
            break
        centers.append(far)
        np.minimum(near, D[far], out=near)
    c = np.array(centers, dtype=int)
    sep = D[np.ix_(c, c)][~np.eye(len(c), dtype=bool)].min() if len(c) > 1 else np.inf
    return EpsilonNet(float(eps), c, float(near.max()), float(sep))


# ---------------------------------------------------------------- ports

@dataclass(frozen=True, eq=False)
class PortSet:
    """Ports ``q_j^i`` around each center, stored by slot.

    Slot ``s`` of center ``i`` holds the port toward partner ``s`` (if
    ``s < i``) or ``s + 1``.  A port is the base vertex ``anchor`` when
    ``offset == 0``; otherwise it is a point at graph distance ``offset``
    from the anchor (a pendant point at an exactly placed position).
    """

    eps: float
    N: int
    centers: np.ndarray
    anchor: np.ndarray
    offset: np.ndarray
    mode: str
    min_spacing: float
    positions: np.ndarray | None = None

    @property
    def spacing_floor(self) -> float:
        return self.eps / self.N

    @staticmethod
    def slot(i: int, j: int) -> int:
        if i == j:
            raise ValueError("a center has no port toward itself")
        return j if j < i else j - 1

    def port(self, i: int, j: int) -> tuple[int, float]:
        s = self.slot(i, j)
        return int(self.anchor[i, s]), float(self.offset[i, s])

    def port_id(self, i: int, j: int) -> str:
        return f"port/{i}-{j}"

    def pair_ports(self, pairs: np.ndarray):
        """Anchors and offsets of ``q_j^i`` and ``q_i^j`` for each pair ``i < j``."""
        I, J = pairs[:, 0], pairs[:, 1]
        a, w = self.anchor[I, J - 1], self.offset[I, J - 1]
        b, v = self.anchor[J, I], self.offset[J, I]
        return a, w, b, v


def _shell_ports(m, D, net, h):
    N, eps = net.N, net.eps
    used = np.zeros(m.n, dtype=bool)
    used[net.centers] = True
    anchor = np.zeros((N, N - 1), dtype=int)
    near_center = D[net.centers].min(axis=0)
    spacing = np.inf
    for i, c in enumerate(net.centers):
        cand = np.flatnonzero((np.abs(D[c] - eps) <= h) & ~used)
        if len(cand) < N - 1:
            raise ResolutionError(
                f"geodesic sphere around center {i} has {len(cand)} free vertices, need {N - 1}")
        Dc = D[np.ix_(cand, cand)]
        # start from the candidate farthest from the other centers
        first = int(np.argmax(near_center[cand] if N > 1 else -cand))
        chosen = [first]
        gap = Dc[first].copy()
        for _ in range(N - 2):
            nxt = int(np.argmax(gap))
            chosen.append(nxt)
            np.minimum(gap, Dc[nxt], out=gap)
        sel = cand[chosen]
        used[sel] = True
        anchor[i] = sel
        if N > 2:
            sub = Dc[np.ix_(chosen, chosen)]
            spacing = min(spacing, float(sub[~np.eye(len(chosen), dtype=bool)].min()))
    return anchor, np.zeros((N, N - 1)), spacing, None


def _tangent_frame(u: np.ndarray):
    ref = np.array([0.0, 0.0, 1.0]) if abs(u[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(u, ref)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(u, e1)


def _exact_ports(m, D, net, phase):
    metric = m.metric
    if not isinstance(metric, RoundSphere):
        raise ResolutionError("exact port placement needs a round-sphere sample")
    tau = metric.radius
    x = m.coords / tau
    tree = cKDTree(x)
    N, eps = net.N, net.eps
    ang = eps / tau
    s = np.arange(N - 1)
    theta = phase + 2 * np.pi * s / (N - 1)
    pos = np.zeros((N, N - 1, 3))
    for i, c in enumerate(net.centers):
        u = x[c]
        e1, e2 = _tangent_frame(u)
        pos[i] = (np.cos(ang) * u[None, :]
                  + np.sin(ang) * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2))
    flat = pos.reshape(-1, 3)
    _, anc = tree.query(flat)
    dots = np.clip(np.einsum("ij,ij->i", flat, x[anc]), -1.0, 1.0)
    off = tau * np.arccos(dots)
    anchor = anc.reshape(N, N - 1)
    offset = off.reshape(N, N - 1)
    # forbid coincidence with any center
    chord, _ = cKDTree(x[net.centers]).query(flat)
    closest = 2 * np.arcsin(np.clip(chord / 2, 0, 1)) * tau
    if closest.min() <= 1e-9 * max(tau, 1.0):
        raise ResolutionError("a port coincides with a net center")
    spacing = np.inf
    if N > 2:
        for i in range(N):
            a, w = anchor[i], offset[i]
            dd = D[np.ix_(a, a)] + w[:, None] + w[None, :]
            same = a[:, None] == a[None, :]
            dd = np.where(same, w[:, None] + w[None, :], dd)
            np.fill_diagonal(dd, np.inf)
            spacing = min(spacing, float(dd.min()))
    return anchor, offset, spacing, pos * tau


def place_ports(m: SampledManifold, net: EpsilonNet, mode: str = "auto", D=None,
                phase: float = 0.0) -> PortSet:
    """Place ``N - 1`` well-spread ports on each geodesic sphere ``dB(p_i, eps)``.

    Parameters
    ----------
    mode : {"auto", "shell", "exact"}
        ``shell`` runs farthest-point sampling on the vertex shell
        ``|d(p_i, v) - eps| <= h``.  ``exact`` places uniformly spaced points
        on the true geodesic circle (round spheres only) and attaches each to
        its nearest vertex by a pendant edge of exact length.  ``auto`` tries
        ``shell`` and falls back to ``exact``.

    Raises
    ------
    ResolutionError
        When the sphere is too sparsely sampled or the spacing floor
        ``eps / N`` cannot be met.
    """
    D = _all_pairs(m, D)
    N = net.N
    if N == 1:
        z = np.zeros((1, 0))
        return PortSet(net.eps, 1, net.centers, z.astype(int), z, "none", np.inf)
    if mode not in ("auto", "shell", "exact"):
        raise ValueError(f"unknown port mode {mode!r}")
    result = None
    used = mode
    if mode in ("auto", "shell"):
        try:
            result = _shell_ports(m, D, net, m.resolution)
            used = "shell"
        except ResolutionError:
            if mode == "shell":
                raise
    if result is None:
        result = _exact_ports(m, D, net, phase)
        used = "exact"
    anchor, offset, spacing, pos = result
    if N > 2 and not spacing > net.eps / N:
        raise ResolutionError(f"port spacing {spacing:.3g} does not exceed eps/N = {net.eps / N:.3g}")
    return PortSet(net.eps, N, net.centers, anchor, offset, used, float(spacing), pos)


# ---------------------------------------------------------------- strings

def _aligned_target(m: SampledManifold, d_target: FiniteMetricSpace) -> np.ndarray:
    return d_target.aligned(m.ids)


def attach_strings(m: SampledManifold, ports: PortSet, d_target: FiniteMetricSpace,
                   chain: bool = False, D=None, check: bool = True) -> GluedSpace:
    """String space: one segment of length ``d(q_j^i, q_i^j)`` per pair of centers.

    Parameters
    ----------
    d_target : FiniteMetricSpace
        Target distance on the base vertex set, strictly below the graph
        distance.  Pendant ports extend it by ``d(q, .) = d(anchor, .) + s w``
        with ``s = max d / d_g``, which is again a metric below ``d_g``.
    chain : bool
        Sample each string as a chain of ``ceil(ell / h)`` vertices with
        pendant port vertices.  Otherwise each string is contracted to one
        edge between anchors of length ``w + ell + w'``, which leaves all
        distances between base vertices unchanged.

    Raises
    ------
    HypothesisError
        If ``d_target >= d_g`` for some pair.
    """
    D = _all_pairs(m, D)
    dT = _aligned_target(m, d_target)
    n = m.n
    if check:
        off = ~np.eye(n, dtype=bool)
        bad = (dT >= D) & off
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise HypothesisError(
                f"target distance is not strictly below d_g at ({m.ids[i]}, {m.ids[j]})")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(D > 0, dT / np.where(D > 0, D, 1.0), 0.0)
    s = float(ratio.max())
    pairs = pair_list(ports.N)
    if len(pairs) == 0:
        return GluedSpace(m, np.ones(n, dtype=bool), name="Y")
    a, w, b, v = ports.pair_ports(pairs)
    ell = dT[a, b] + s * (w + v)
    att = Attachments.build("string", pairs[:, 0], pairs[:, 1], ell)
    if not chain:
        e = np.column_stack([a, b])
        return GluedSpace(m, np.ones(n, dtype=bool), edges=e, lengths=w + ell + v,
                          attachments=att, name="Y")
    h = m.resolution
    extra, edges, lengths = [], [], []

    def vid(name):
        extra.append(name)
        return n + len(extra) - 1

    for k, (i, j) in enumerate(pairs):
        ends = []
        for (c, p), anc, off in (((i, j), a[k], w[k]), ((j, i), b[k], v[k])):
            if off > 0:
                q = vid(ports.port_id(c, p))
                edges.append((anc, q))
                lengths.append(off)
                ends.append(q)
            else:
                ends.append(anc)
        nseg = max(1, int(math.ceil(ell[k] / h)))
        chain_v = [ends[0]] + [vid(f"string/{i}-{j}/{t}") for t in range(1, nseg)] + [ends[1]]
        for u, x in zip(chain_v[:-1], chain_v[1:]):
            edges.append((u, x))
            lengths.append(ell[k] / nseg)
    return GluedSpace(m, np.ones(n, dtype=bool), tuple(extra), np.array(edges),
                      np.array(lengths), np.zeros(len(extra)), att, name="Y")


# ---------------------------------------------------------------- radii

@dataclass(frozen=True, eq=False)
class TunnelRadii:
    """Radius ``rho_{i,j}`` per unordered pair, aligned with ``pairs``."""

    pairs: np.ndarray
    rho: np.ndarray
    min_port_distance: float

    def __len__(self) -> int:
        return len(self.rho)


def rho0_bisection(predicate: Callable[[float], bool], rho_hi: float,
                   tol: float = 1e-3, max_iter: int = 60) -> float:
    """Largest ``rho`` (up to ``tol`` relative) with ``predicate(rho)`` true.

    Returns ``rho_hi`` when the predicate already holds there and raises
    ``ValueError`` if it fails for every tested radius.
    """
    if predicate(rho_hi):
        return float(rho_hi)
    lo, hi = 0.0, float(rho_hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
        if lo > 0 and hi - lo <= tol * lo:
            break
    if lo == 0.0:
        raise ValueError("gate fails for every tested radius")
    return lo


def _min_port_distance(D, anchors, offsets) -> float:
    a = anchors.ravel()
    w = offsets.ravel()
    if len(a) < 2:
        return np.inf
    uniq, inv = np.unique(a, return_inverse=True)
    best = np.full(len(uniq), np.inf)
    second = np.full(len(uniq), np.inf)
    order = np.lexsort((w, inv))
    for pos, k in enumerate(order):
        g = inv[k]
        if w[k] < best[g]:
            best[g], second[g] = w[k], best[g]
        elif w[k] < second[g]:
            second[g] = w[k]
    same = float((best + second).min())
    if len(uniq) > 1:
        Du = D[np.ix_(uniq, uniq)] + best[:, None] + best[None, :]
        np.fill_diagonal(Du, np.inf)
        cross = float(Du.min())
    else:
        cross = np.inf
    return min(same, cross)


def choose_tunnel_radii(net: EpsilonNet, ports: PortSet, rho0_map=None,
                        m: SampledManifold | None = None, D=None) -> TunnelRadii:
    """Radii ``rho_{i,j} = min(eps / N^4, rho0_{i,j})`` with disjoint balls.

    Parameters
    ----------
    rho0_map : float, mapping or callable, optional
        Gate radius per pair ``(i, j)``; ``None`` means no extra constraint.
    m, D : optional
        Base sample or its all-pairs matrix, used for the disjointness check.

    Raises
    ------
    ResolutionError
        When two port balls would overlap in the graph metric.
    """
    N = net.N
    pairs = pair_list(N)
    cap = net.eps / N**4
    if rho0_map is None:
        rho0 = np.full(len(pairs), np.inf)
    elif callable(rho0_map):
        rho0 = np.array([rho0_map(int(i), int(j)) for i, j in pairs], dtype=float)
    elif isinstance(rho0_map, Mapping):
        rho0 = np.array([rho0_map[(int(i), int(j))] for i, j in pairs], dtype=float)
    else:
        rho0 = np.full(len(pairs), float(rho0_map))
    rho = np.minimum(cap, rho0)
    if np.any(rho <= 0):
        raise ValueError("radii must be positive")
    dmin = np.inf
    if len(pairs) and (m is not None or D is not None):
        Dm = _all_pairs(m, D)
        dmin = _min_port_distance(Dm, ports.anchor, ports.offset)
        if not dmin > 2 * rho.max():
            raise ResolutionError(
                f"closest ports are {dmin:.3g} apart, balls of radius {rho.max():.3g} overlap")
    return TunnelRadii(pairs, rho, float(dmin))


# ---------------------------------------------------------------- tunnels

def _ball(m: SampledManifold, anchor: int, offset: float, rho: float):
    """Ball vertices and boundary vertices with their distance to the port."""
    reach = rho + float(m.lengths.max())
    d = dijkstra(m.graph, directed=False, indices=anchor, limit=max(reach - offset, 0.0)) + offset
    inside = np.flatnonzero(d < rho)
    if len(inside) == 0:
        return inside, np.array([anchor]), np.array([d[anchor]])
    mask = np.zeros(m.n, dtype=bool)
    mask[inside] = True
    g = m.graph
    nbr = np.unique(g[inside].indices)
    bdry = nbr[~mask[nbr]]
    return inside, bdry, d[bdry]


def _frame_angles(coords: np.ndarray, center: np.ndarray) -> np.ndarray:
    rel = coords - center
    if rel.shape[1] < 2:
        raise ConstructionError("need at least 2 coordinates to orient a tunnel")
    _, _, vt = np.linalg.svd(rel - rel.mean(axis=0), full_matrices=False)
    return np.arctan2(rel @ vt[1], rel @ vt[0])


def attach_tunnels(m: SampledManifold, ports: PortSet, radii: TunnelRadii,
                   tunnels: Sequence[TunnelModel], kappa: float | None = None) -> GluedSpace:
    """Tunnel space: remove the port balls and join their boundaries by tunnels.

    A tunnel whose mouth circumference ``2 pi rho`` is below the resolution
    is collapsed: when the ball contains no vertex other than its anchor it
    becomes one edge of length ``(w - rho)+ + L + (w' - rho)+`` between
    anchors, otherwise each ball
    is replaced by a mouth vertex wired to the ball boundary and the two
    mouths are joined by an edge of length ``L``.  Resolved tunnels are
    sampled as warped cylinders with ``ceil(2 pi rho / h)`` sectors.

    Parameters
    ----------
    tunnels : sequence of TunnelModel
        One model per entry of ``radii.pairs``; supplies ``L``, ``delta`` and
        the scalar floor.
    kappa : float, optional
        Scalar-curvature floor of the base, recorded in the ledger.
    """
    if len(tunnels) != len(radii):
        raise ValueError("one tunnel model per pair is required")
    n = m.n
    h = m.resolution
    keep = np.ones(n, dtype=bool)
    ledger = ScalarCurvatureLedger()
    if kappa is not None:
        ledger = ledger.add("base", kappa)
    if len(radii) == 0:
        return GluedSpace(m, keep, ledger=ledger if len(ledger) else None, name="X")
    pairs = radii.pairs
    rho = radii.rho
    a, w, b, v = ports.pair_ports(pairs)
    L = np.array([t.L for t in tunnels])
    ell = np.array([t.ell for t in tunnels])
    delta = np.array([t.delta for t in tunnels])
    if np.any(ell >= L):
        raise ConstructionError("tunnel length must exceed its string length")
    floors = np.array([t.scalar_floor for t in tunnels])
    ledger = ledger.add("tunnels", float(floors.min()))
    tunnel_volume = float(sum(t.vol for t in tunnels))

    # below resolution a ball holding no vertex but its own anchor is not removed
    near = (w < rho) | (v < rho)
    sub = 2 * np.pi * rho < h
    for k in np.flatnonzero(near & sub):
        ok = all(len(_ball(m, int(c), float(o), float(rho[k]))[0]) <= 1
                 for c, o in ((a[k], w[k]), (b[k], v[k])))
        near[k] = not ok
    simple = ~near & sub
    edges = [np.column_stack([a[simple], b[simple]])]
    lengths = [np.maximum(w[simple] - rho[simple], 0.0) + L[simple]
               + np.maximum(v[simple] - rho[simple], 0.0)]
    extra, ex_vol = [], []

    def vid(name, vol=0.0):
        extra.append(name)
        ex_vol.append(vol)
        return n + len(extra) - 1

    pos = ports.positions
    balls = {}
    for k in np.flatnonzero(~simple):
        i, j = int(pairs[k, 0]), int(pairs[k, 1])
        ends = []
        for side, (c, p, anc, off) in enumerate(((i, j, a[k], w[k]), (j, i, b[k], v[k]))):
            inside, bdry, dist = _ball(m, int(anc), float(off), float(rho[k]))
            keep[inside] = False
            if pos is not None:
                centre = pos[c, PortSet.slot(c, p)]
            else:
                centre = m.coords[anc]
            ends.append((inside, bdry, dist, centre))
        balls[k] = ends
    for k, ends in balls.items():
        i, j = int(pairs[k, 0]), int(pairs[k, 1])
        # boundary vertices may sit inside a neighbouring ball
        ends = [(ins, bd[keep[bd]], ds[keep[bd]], c) for ins, bd, ds, c in ends]
        if any(len(e[1]) == 0 for e in ends):
            raise ConstructionError(f"tunnel {i}-{j} has an empty mouth")
        resolved = 2 * np.pi * rho[k] >= h
        if not resolved:
            mouths = []
            for side, (inside, bdry, dist, _) in enumerate(ends):
                q = vid(f"tunnel/{i}-{j}/{'ab'[side]}")
                mouths.append(q)
                edges.append(np.column_stack([bdry, np.full(len(bdry), q)]))
                lengths.append(np.maximum(dist - rho[k], _MIN_EDGE))
            edges.append(np.array([mouths]))
            lengths.append(np.array([L[k]]))
            continue
        # resolved: warped cylinder whose end rings are wired to the ball boundaries
        nsec = max(8, int(math.ceil(2 * np.pi * rho[k] / h)))
        neck = tunnels[k].neck_radius
        r0, Lk, dk = float(rho[k]), float(L[k]), float(delta[k])

        def warp(s, r0=r0, Lk=Lk, dk=dk, neck=neck):
            u0 = np.clip(np.asarray(s) / dk, 0, 1)
            u1 = np.clip((Lk - np.asarray(s)) / dk, 0, 1)
            return neck + (r0 - neck) * (1 - cutoff_phi(u0)) + (r0 - neck) * (1 - cutoff_phi(u1))

        s_nodes = graded_nodes(Lk, h, [(0, dk, dk / 4), (1, dk, dk / 4)])
        cyl = sample_rings(warped_cylinder(Lk, warp), s_nodes, nsec, h,
                           prefix=f"tunnel/{i}-{j}")
        off = len(extra)
        for t_id, vol in zip(cyl.ids, cyl.volumes):
            vid(t_id, vol)
        ce = cyl.edges + n + off
        edges.append(ce)
        lengths.append(cyl.lengths)
        lay = cyl.layout
        for side, (inside, bdry, dist, centre) in enumerate(ends):
            ring = 0 if side == 0 else lay.n_rings - 1
            ang = _frame_angles(m.coords[bdry], centre)
            sec = np.round(ang / (2 * np.pi / nsec)).astype(int) % nsec
            if side == 1:
                sec = (-sec) % nsec
            tgt = lay.ring_start[ring] + sec + n + off
            dphi = np.angle(np.exp(1j * (ang - sec * 2 * np.pi / nsec)))
            radial = np.maximum(dist - rho[k], 0.0)
            edges.append(np.column_stack([bdry, tgt]))
            lengths.append(np.maximum(np.hypot(radial, rho[k] * dphi), _MIN_EDGE))
    att = Attachments.build("tunnel", pairs[:, 0], pairs[:, 1], ell, delta, L)
    e = np.concatenate(edges) if edges else np.zeros((0, 2), dtype=int)
    ln = np.concatenate(lengths) if lengths else np.zeros(0)
    return GluedSpace(m, keep, tuple(extra), e, ln, np.array(ex_vol), att, ledger,
                      name="X", tunnel_volume=tunnel_volume)
