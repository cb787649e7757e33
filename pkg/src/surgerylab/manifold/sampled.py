"""Graph discretizations of Riemannian surfaces and shortest-path distances."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import SphericalVoronoi, cKDTree

from ..metric_core import FiniteMetricSpace
from .metrics import (GL8, ConformalSphere, RevolutionMetric, RoundSphere,
                      metric_from_description)

__all__ = [
    "ResolutionError",
    "DisconnectedGraphError",
    "RingLayout",
    "SampledManifold",
    "fibonacci_sphere",
    "sample_sphere",
    "sample_rings",
    "graded_nodes",
    "sample_manifold",
    "geodesic_distance",
    "min_distance_between",
    "injectivity_radius_proxy",
    "symmetric_graph",
    "DEFAULT_SPHERE_REACH",
    "DEFAULT_RING_REACH",
]

# radius-graph constant: connect directions within reach * sqrt(h) radians
DEFAULT_SPHERE_REACH = 0.8
# ring-grid constant: connect within reach * local spacing
DEFAULT_RING_REACH = 3.0
_SOURCE_CHUNK = 64


class ResolutionError(RuntimeError):
    """The sampling is too coarse for the requested construction."""


class DisconnectedGraphError(RuntimeError):
    """A shortest-path query reached an unreachable vertex."""


def symmetric_graph(n: int, edges: np.ndarray, lengths: np.ndarray) -> csr_matrix:
    """Undirected CSR adjacency keeping the shortest of parallel edges."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    w = np.asarray(lengths, dtype=float)
    lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
    keep = lo != hi
    lo, hi, w = lo[keep], hi[keep], w[keep]
    key = lo * n + hi
    order = np.lexsort((w, key))
    key, w = key[order], w[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    key, w = key[first], w[first]
    lo, hi = key // n, key % n
    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    return coo_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n)).tocsr()


@dataclass(frozen=True)
class RingLayout:
    """Vertex bookkeeping for rotationally symmetric ring grids.

    Rings are listed in chart order; a pole ring holds a single vertex.
    Vertex ``ring_start[k] + j`` is sector ``j`` of ring ``k``.
    """

    ring_t: np.ndarray
    ring_start: np.ndarray
    ring_size: np.ndarray
    n_sectors: int

    @property
    def n_rings(self) -> int:
        return len(self.ring_t)

    def vertex(self, k: int, j: int = 0) -> int:
        return int(self.ring_start[k] + (j % self.ring_size[k]))

    def ring_vertices(self, k: int) -> np.ndarray:
        return self.ring_start[k] + np.arange(self.ring_size[k])

    def ring_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_rings), self.ring_size)


@dataclass(frozen=True, eq=False)
class SampledManifold:
    """Weighted graph approximating a Riemannian surface.

    Parameters
    ----------
    ids : tuple of str
        Vertex ids.
    coords : ndarray, shape (V, d)
        Chart or embedding coordinates.
    edges : ndarray, shape (E, 2)
        Vertex index pairs.
    lengths : ndarray, shape (E,)
        Strictly positive edge lengths.
    volumes : ndarray, shape (V,)
        Cell areas; their sum approximates the total volume.
    dimension, resolution : int, float
        Manifold dimension and target vertex spacing ``h``.
    description : dict
        JSON-style generator description.
    metric : object, optional
        Analytic metric the graph was sampled from.
    layout : RingLayout, optional
        Present for ring grids, whose rotational symmetry lets sup-type
        queries use one source per ring.
    curvature_scale : float
        Recorded constant in the edge-length accuracy bound ``h^2 kappa``.
    """

    ids: tuple
    coords: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    volumes: np.ndarray
    dimension: int = 2
    resolution: float = 0.0
    description: dict = field(default_factory=dict)
    metric: object = None
    layout: RingLayout | None = None
    curvature_scale: float = 1.0
    check_connected: bool = True

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        lengths = np.asarray(self.lengths, dtype=float)
        n = len(self.ids)
        if len(lengths) != len(edges):
            raise ValueError("one length per edge is required")
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise ValueError("edge endpoint out of range")
        if not np.all(lengths > 0) or not np.all(np.isfinite(lengths)):
            raise ValueError("edge lengths must be finite and strictly positive")
        for name, arr in (("edges", edges), ("lengths", lengths),
                          ("coords", np.asarray(self.coords, dtype=float)),
                          ("volumes", np.asarray(self.volumes, dtype=float))):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "ids", tuple(self.ids))
        if self.check_connected and n > 1:
            ncomp, _ = connected_components(self.graph, directed=False)
            if ncomp != 1:
                raise ResolutionError(f"sampled graph has {ncomp} components; refine h")

    @property
    def n(self) -> int:
        return len(self.ids)

    @cached_property
    def graph(self) -> csr_matrix:
        return symmetric_graph(self.n, self.edges, self.lengths)

    @cached_property
    def _lookup(self) -> dict:
        return {p: i for i, p in enumerate(self.ids)}

    def index(self, pid) -> int:
        if isinstance(pid, (int, np.integer)):
            return int(pid)
        try:
            return self._lookup[pid]
        except KeyError:
            raise KeyError(f"unknown vertex id {pid!r}") from None

    @property
    def total_volume(self) -> float:
        return float(self.volumes.sum())

    def distances(self, sources, strict: bool = True) -> np.ndarray:
        """Shortest-path rows from each source (ids or indices)."""
        idx = np.atleast_1d(np.array([self.index(s) for s in np.atleast_1d(sources)], dtype=int))
        out = np.empty((len(idx), self.n))
        for a in range(0, len(idx), _SOURCE_CHUNK):
            out[a:a + _SOURCE_CHUNK] = dijkstra(self.graph, directed=False,
                                                 indices=idx[a:a + _SOURCE_CHUNK])
        if strict and not np.all(np.isfinite(out)):
            raise DisconnectedGraphError("unreachable vertex in connected-graph mode")
        return out

    @cached_property
    def all_pairs(self) -> np.ndarray:
        """Dense all-pairs shortest paths, computed once."""
        d = self.distances(np.arange(self.n))
        d = np.minimum(d, d.T)
        d.setflags(write=False)
        return d

    def metric_space(self, indices=None) -> FiniteMetricSpace:
        idx = np.arange(self.n) if indices is None else np.asarray(indices, dtype=int)
        d = self.distances(idx)[:, idx]
        d = np.minimum(d, d.T)
        return FiniteMetricSpace(tuple(self.ids[i] for i in idx), d)

    def with_lengths(self, lengths, volumes=None, metric=None, description=None) -> "SampledManifold":
        """Same vertices and edges with new weights."""
        return SampledManifold(self.ids, self.coords, self.edges, lengths,
                               self.volumes if volumes is None else volumes,
                               self.dimension, self.resolution,
                               self.description if description is None else description,
                               self.metric if metric is None else metric,
                               self.layout, self.curvature_scale)

    # serialization -------------------------------------------------------

    def to_csv(self, directory) -> None:
        """Write ``vertices.csv``, ``edges.csv`` and ``meta.json``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "vertices.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id"] + [f"x{k}" for k in range(self.coords.shape[1])] + ["volume"])
            for pid, c, v in zip(self.ids, self.coords, self.volumes):
                w.writerow([pid] + [repr(float(x)) for x in c] + [repr(float(v))])
        with open(d / "edges.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "length"])
            for (i, j), ln in zip(self.edges, self.lengths):
                w.writerow([int(i), int(j), repr(float(ln))])
        meta = {"dimension": self.dimension, "resolution": self.resolution,
                "description": self.description, "curvature_scale": self.curvature_scale}
        (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str))

    @classmethod
    def from_csv(cls, directory) -> "SampledManifold":
        d = Path(directory)
        with open(d / "vertices.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        ids = tuple(r[0] for r in rows[1:])
        body = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float)
        with open(d / "edges.csv", newline="") as fh:
            erows = list(csv.reader(fh))[1:]
        edges = np.array([[int(r[0]), int(r[1])] for r in erows], dtype=np.int64).reshape(-1, 2)
        lengths = np.array([float(r[2]) for r in erows])
        meta = json.loads((d / "meta.json").read_text()) if (d / "meta.json").exists() else {}
        return cls(ids, body[:, :-1], edges, lengths, body[:, -1],
                   int(meta.get("dimension", 2)), float(meta.get("resolution", 0.0)),
                   meta.get("description", {}), None, None,
                   float(meta.get("curvature_scale", 1.0)))


# ---------------------------------------------------------------- spheres

def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` quasi-uniform unit vectors on the golden-angle spiral."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _slerp_lengths(metric, x: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    a, b = x[pairs[:, 0]], x[pairs[:, 1]]
    ang = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.einsum("ij,ij->i", a, b))
    if isinstance(metric, RoundSphere):
        return metric.radius * ang
    nodes, weights = GL8
    s = 0.5 * (nodes + 1.0)
    sin_ang = np.sin(ang)
    total = np.zeros(len(pairs))
    for sk, wk in zip(s, 0.5 * weights):
        ca = np.sin((1 - sk) * ang) / sin_ang
        cb = np.sin(sk * ang) / sin_ang
        pt = ca[:, None] * a + cb[:, None] * b
        total += wk * np.exp(metric.conformal_factor(pt))
    return metric.radius * ang * total


def sample_sphere(metric, h: float, reach: float = DEFAULT_SPHERE_REACH,
                  n_points: int | None = None) -> SampledManifold:
    """Fibonacci-lattice radius graph on a round or conformal 2-sphere.

    The lattice has about one vertex per hexagonal cell of side ``h``.  Pairs
    of directions within ``reach * sqrt(h / radius)`` radians are joined, so
    the neighborhood widens more slowly than the spacing shrinks and graph
    distances converge to geodesic distances as ``h -> 0``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    tau = metric.radius
    n = n_points or int(math.ceil(4 * np.pi * tau**2 / (np.sqrt(3) / 2 * h * h)))
    x = fibonacci_sphere(n)
    R = min(reach * math.sqrt(h / tau), np.pi / 2)
    pairs = cKDTree(x).query_pairs(2 * math.sin(R / 2), output_type="ndarray")
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    lengths = _slerp_lengths(metric, x, pairs)
    vol = SphericalVoronoi(x).calculate_areas() * tau**2 * np.exp(2 * metric.conformal_factor(x))
    ids = tuple(f"base/{i}" for i in range(n))
    desc = dict(metric.description(), grid="fibonacci", h=h, reach=reach)
    return SampledManifold(ids, tau * x, pairs, lengths, vol, 2, h, desc, metric,
                           curvature_scale=1.0 / tau**2)


# ---------------------------------------------------------------- ring grids

def graded_nodes(length: float, h: float, fine: list | None = None) -> np.ndarray:
    """Nodes on ``[0, length]`` with spacing at most ``h``.

    ``fine`` is a list of ``(end, extent, step)`` triples: near ``end`` (0 or 1)
    the nodes are uniform with ``step`` up to ``extent``, then grow
    geometrically (ratio 1.25) until the spacing reaches ``h``.
    """
    fine = fine or []
    sides = {0: [0.0], 1: [0.0]}
    for end, extent, step in fine:
        k = max(1, int(round(extent / step)))
        pts = list(np.arange(k + 1) * (extent / k))
        s = extent / k
        while s < h:
            s = min(h, 1.25 * s)
            pts.append(pts[-1] + s)
        sides[end] = pts
    left = np.array(sides[0])
    right = length - np.array(sides[1])
    if left[-1] >= right[-1]:
        # graded layers meet: keep the finer side structure up to the midpoint
        mid = 0.5 * length
        left = left[left < mid]
        right = right[right > mid]
        return np.unique(np.concatenate([left, [mid], right[::-1]]))
    gap = right[-1] - left[-1]
    k = max(1, int(math.ceil(gap / h - 1e-12)))
    middle = left[-1] + np.arange(1, k) * (gap / k)
    return np.concatenate([left, middle, right[::-1]])


def _ring_stencil(metric: RevolutionMetric, t: np.ndarray, sizes: np.ndarray,
                  n_sectors: int, reach: float):
    """Edge types ``(k, k2, b, length)`` for a ring grid (lengths under ``metric``)."""
    K = len(t)
    dphi = 2 * np.pi / n_sectors
    meridian = metric.segment_length(t[:-1], 0.0, t[1:], 0.0)
    arc = np.sqrt(np.maximum(metric.G(t), 0.0)) * dphi
    arc[sizes == 1] = 0.0
    gap = np.zeros(K)
    gap[:-1] = meridian
    gap[1:] = np.maximum(gap[1:], meridian)
    spacing = np.maximum(gap, arc)
    half = n_sectors // 2
    bs_all = np.arange(-half, n_sectors - half)
    types = []
    for k in range(K):
        if sizes[k] > 1:
            b = np.arange(1, half + 1)
            ln = metric.segment_length(np.full(len(b), t[k]), 0.0, np.full(len(b), t[k]), b * dphi)
            ok = ln <= reach * spacing[k]
            ok[0] = True
            types += [(k, k, int(bb), float(v)) for bb, v in zip(b[ok], ln[ok])]
        radial = 0.0
        for k2 in range(k + 1, K):
            radial += meridian[k2 - 1]
            thr = reach * max(spacing[k], spacing[k2])
            if radial > thr and k2 > k + 1:
                break
            if sizes[k] == 1 or sizes[k2] == 1:
                b = np.array([0])
            else:
                b = bs_all
            ln = metric.segment_length(np.full(len(b), t[k]), 0.0, np.full(len(b), t[k2]), b * dphi)
            ok = ln <= thr
            if k2 == k + 1:
                ok[b == 0] = True
            types += [(k, k2, int(bb), float(v)) for bb, v in zip(b[ok], ln[ok])]
    return types


def _expand_types(types, start, sizes, n_sectors, lengths_override=None):
    rows, cols, ws = [], [], []
    for idx, (k, k2, b, ln) in enumerate(types):
        if lengths_override is not None:
            ln = lengths_override[idx]
        if sizes[k] == 1 and sizes[k2] == 1:
            i = np.array([start[k]])
            j = np.array([start[k2]])
        elif sizes[k] == 1:
            j = start[k2] + np.arange(n_sectors)
            i = np.full(n_sectors, start[k])
        elif sizes[k2] == 1:
            i = start[k] + np.arange(n_sectors)
            j = np.full(n_sectors, start[k2])
        else:
            s = np.arange(n_sectors)
            i = start[k] + s
            j = start[k2] + (s + b) % n_sectors
        rows.append(i)
        cols.append(j)
        ws.append(np.full(len(i), ln))
    e = np.column_stack([np.concatenate(rows), np.concatenate(cols)])
    w = np.concatenate(ws)
    lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
    key = lo * int(start[-1] + sizes[-1]) + hi
    _, first = np.unique(key, return_index=True)
    first.sort()
    return np.column_stack([lo[first], hi[first]]), w[first]


def sample_rings(metric: RevolutionMetric, t_nodes, n_sectors: int, h: float | None = None,
                 reach: float = DEFAULT_RING_REACH, stencil_metric: RevolutionMetric | None = None,
                 prefix: str = "base", check_connected: bool = True) -> SampledManifold:
    """Sample a rotationally symmetric metric on a grid of rings.

    Parameters
    ----------
    metric : RevolutionMetric
        Metric whose lengths are assigned to edges.
    t_nodes : array_like
        Increasing chart positions of the rings.  At an end marked as a pole
        the first (last) node must equal the chart end and becomes one vertex.
    n_sectors : int
        Vertices per ring, at angles ``2 pi j / n_sectors``.
    reach : float
        Joins chart-linear segments no longer than ``reach`` times the local
        spacing.
    stencil_metric : RevolutionMetric, optional
        Metric used to choose the edge set.  Passing the same stencil metric
        for two metrics gives graphs with identical vertices and edges.

    Notes
    -----
    Every edge type is evaluated once and copied to all sectors, so the graph
    is exactly invariant under rotation by ``2 pi / n_sectors``.
    """
    t = np.asarray(t_nodes, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("ring positions must increase")
    sizes = np.full(len(t), n_sectors)
    t0, t1 = metric.t_range
    if metric.poles[0]:
        if t[0] != t0:
            raise ValueError("first node must be the pole")
        sizes[0] = 1
    if metric.poles[1]:
        if t[-1] != t1:
            raise ValueError("last node must be the pole")
        sizes[-1] = 1
    start = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    sm = stencil_metric or metric
    types = _ring_stencil(sm, t, sizes, n_sectors, reach)
    if sm is not metric:
        k = np.array([ty[0] for ty in types])
        k2 = np.array([ty[1] for ty in types])
        b = np.array([ty[2] for ty in types], dtype=float)
        override = metric.segment_length(t[k], 0.0, t[k2], b * 2 * np.pi / n_sectors)
    else:
        override = None
    edges, lengths = _expand_types(types, start, sizes, n_sectors, override)

    # cells: half-way between rings, clipped to the chart
    mids = 0.5 * (t[1:] + t[:-1])
    lo = np.concatenate([[t0 if metric.poles[0] else t[0]], mids])
    hi = np.concatenate([mids, [t1 if metric.poles[1] else t[-1]]])
    ring_area = metric.area_between(lo, hi) * 2 * np.pi
    volumes = np.repeat(ring_area / sizes, sizes)

    ids, coords = [], []
    for k in range(len(t)):
        for j in range(sizes[k]):
            ids.append(f"{prefix}/r{k}s{j}")
            coords.append((t[k], 2 * np.pi * j / n_sectors if sizes[k] > 1 else 0.0))
    layout = RingLayout(t, start, sizes, n_sectors)
    desc = dict(metric.description(), grid="rings", n_sectors=n_sectors, n_rings=len(t))
    if h is None:
        h = float(np.max(np.diff(t)))
    return SampledManifold(tuple(ids), np.array(coords), edges, lengths, volumes, 2,
                           float(h), desc, metric, layout, check_connected=check_connected)


def sample_manifold(g, h: float, **kwargs) -> SampledManifold:
    """Discretize a metric description at resolution ``h``.

    Parameters
    ----------
    g : dict or metric object
        ``{"kind": "round" | "conformal" | "radial" | "cylinder", ...}`` or one of
        :class:`RoundSphere`, :class:`ConformalSphere`, :class:`RevolutionMetric`.
        Sphere kinds accept ``"grid": "rings"`` for a pole-to-pole ring grid.
    h : float
        Target vertex spacing.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    grid = "fibonacci"
    if isinstance(g, dict):
        grid = g.get("grid", grid)
        g = metric_from_description(g)
    if isinstance(g, (RoundSphere, ConformalSphere)):
        if grid == "fibonacci":
            return sample_sphere(g, h, **kwargs)
        g = g.revolution()
    n_sectors = kwargs.pop("n_sectors", None)
    rev: RevolutionMetric = g
    L = rev.length
    r_nodes = graded_nodes(L, h)
    t_nodes = rev.t_of_radius(r_nodes, 0)
    t_nodes[0], t_nodes[-1] = rev.t_range
    if n_sectors is None:
        widest = float(np.sqrt(np.max(rev.G(np.linspace(*rev.t_range, 2001)))))
        n_sectors = max(8, int(math.ceil(2 * np.pi * widest / h)))
    return sample_rings(rev, t_nodes, n_sectors, h, **kwargs)


# ---------------------------------------------------------------- queries

def geodesic_distance(m: SampledManifold, source) -> np.ndarray:
    """Exact single-source shortest-path distances on the weighted graph."""
    return m.distances([source])[0]


def min_distance_between(m: SampledManifold, p, q) -> float:
    """Graph distance between two vertices."""
    return float(geodesic_distance(m, p)[m.index(q)])


def injectivity_radius_proxy(m: SampledManifold, center, radii=None) -> float:
    """Largest tested radius whose graph ball looks like a disk.

    A radius passes when the ball and its complement are both nonempty and
    connected, which for a surface means the ball boundary is one cycle.
    Radii are tested in increasing order and the scan stops at the first
    failure.
    """
    d = geodesic_distance(m, center)
    if radii is None:
        radii = np.linspace(0, d.max(), 65)[1:]
    best = 0.0
    g = m.graph
    for r in np.sort(np.asarray(radii, dtype=float)):
        inside = d < r
        outside = ~inside
        if not outside.any():
            break
        ok = True
        for mask in (inside, outside):
            idx = np.flatnonzero(mask)
            sub = g[idx][:, idx]
            if connected_components(sub, directed=False)[0] != 1:
                ok = False
                break
        if not ok:
            break
        best = float(r)
    return best
