"""Sampled manifolds with removed balls, strings and tunnels attached."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import connected_components, dijkstra

from ..manifold.curvature import ScalarCurvatureLedger
from ..manifold.sampled import (DisconnectedGraphError, RingLayout, SampledManifold,
                                symmetric_graph)
from ..metric_core import FiniteMetricSpace

__all__ = ["ConstructionError", "Attachments", "GluedSpace", "glue"]

_SOURCE_CHUNK = 64


class ConstructionError(RuntimeError):
    """A surgery produced an invalid space (e.g. a disconnected graph)."""


@dataclass(frozen=True, eq=False)
class Attachments:
    """Columnar record of strings and tunnels (one row per attachment)."""

    kind: np.ndarray
    i: np.ndarray
    j: np.ndarray
    ell: np.ndarray
    delta: np.ndarray
    L: np.ndarray

    @classmethod
    def empty(cls) -> "Attachments":
        z = np.zeros(0)
        return cls(np.zeros(0, dtype="<U6"), z.astype(int), z.astype(int), z, z, z)

    @classmethod
    def build(cls, kind: str, i, j, ell, delta=None, L=None) -> "Attachments":
        i = np.asarray(i, dtype=int)
        n = len(i)
        ell = np.asarray(ell, dtype=float)
        delta = np.zeros(n) if delta is None else np.asarray(delta, dtype=float)
        L = ell.copy() if L is None else np.asarray(L, dtype=float)
        return cls(np.full(n, kind, dtype="<U6"), i, np.asarray(j, dtype=int), ell, delta, L)

    def __len__(self) -> int:
        return len(self.i)

    def concat(self, other: "Attachments") -> "Attachments":
        return Attachments(*(np.concatenate([getattr(self, f), getattr(other, f)])
                             for f in ("kind", "i", "j", "ell", "delta", "L")))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "i", "j", "ell", "delta", "L"])
            for row in zip(self.kind, self.i, self.j, self.ell, self.delta, self.L):
                w.writerow([row[0], int(row[1]), int(row[2])] + [repr(float(v)) for v in row[3:]])


@dataclass(frozen=True, eq=False)
class GluedSpace:
    """A base graph with some vertices removed and extra vertices/edges added.

    Vertices are indexed as in the base (removed ones stay as isolated
    indices and are never reported) followed by the extra vertices.

    Parameters
    ----------
    base : SampledManifold
    keep : ndarray of bool
        Retained base vertices.
    extra_ids : tuple of str
        Ids of added vertices (``"string/i-j/t"``, ``"tunnel/i-j/..."``).
    edges, lengths : ndarray
        Added edges in combined indexing.
    extra_volumes : ndarray
        Cell volumes of added vertices.
    attachments : Attachments
    ledger : ScalarCurvatureLedger, optional
    symmetry : RingLayout, optional
        Set when the whole space is invariant under the base rotation, so
        one source per ring realizes every sup over ring-invariant sets.
    name : str
    """

    base: SampledManifold
    keep: np.ndarray
    extra_ids: tuple = ()
    edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    lengths: np.ndarray = field(default_factory=lambda: np.zeros(0))
    extra_volumes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    attachments: Attachments = field(default_factory=Attachments.empty)
    ledger: ScalarCurvatureLedger | None = None
    symmetry: RingLayout | None = None
    name: str = ""
    tunnel_volume: float = 0.0

    def __post_init__(self):
        keep = np.asarray(self.keep, dtype=bool)
        if keep.shape != (self.base.n,):
            raise ValueError("keep mask must cover the base vertices")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        lengths = np.asarray(self.lengths, dtype=float)
        if len(edges) != len(lengths):
            raise ValueError("one length per edge is required")
        if len(lengths) and not np.all(lengths > 0):
            raise ConstructionError("attached edge lengths must be positive")
        total = self.base.n + len(self.extra_ids)
        if len(edges) and (edges.min() < 0 or edges.max() >= total):
            raise ConstructionError("attachment endpoint does not exist")
        if len(edges):
            base_end = edges[edges < self.base.n]
            if not np.all(keep[base_end]):
                raise ConstructionError("attachment endpoint lies in a removed region")
        object.__setattr__(self, "keep", keep)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "extra_ids", tuple(self.extra_ids))
        object.__setattr__(self, "extra_volumes", np.asarray(self.extra_volumes, dtype=float))
        alive = self.alive
        g = self.graph
        idx = np.flatnonzero(alive)
        if len(idx) > 1 and connected_components(g[idx][:, idx], directed=False)[0] != 1:
            raise ConstructionError(f"{self.name or 'glued space'} is disconnected")

    # structure -----------------------------------------------------------

    @property
    def n_total(self) -> int:
        return self.base.n + len(self.extra_ids)

    @cached_property
    def alive(self) -> np.ndarray:
        return np.concatenate([self.keep, np.ones(len(self.extra_ids), dtype=bool)])

    @cached_property
    def graph(self):
        be = self.base.edges
        ok = self.keep[be[:, 0]] & self.keep[be[:, 1]]
        e = np.concatenate([be[ok], self.edges])
        w = np.concatenate([self.base.lengths[ok], self.lengths])
        return symmetric_graph(self.n_total, e, w)

    @cached_property
    def ids(self) -> tuple:
        base_ids = [p for p, k in zip(self.base.ids, self.keep) if k]
        return tuple(base_ids) + self.extra_ids

    @cached_property
    def _extra_lookup(self) -> dict:
        return {p: self.base.n + i for i, p in enumerate(self.extra_ids)}

    def index(self, pid) -> int:
        if isinstance(pid, (int, np.integer)):
            return int(pid)
        if pid in self._extra_lookup:
            return self._extra_lookup[pid]
        i = self.base.index(pid)
        if not self.keep[i]:
            raise KeyError(f"{pid!r} was removed by surgery")
        return i

    def id_of(self, i: int) -> str:
        return self.base.ids[i] if i < self.base.n else self.extra_ids[i - self.base.n]

    @property
    def volume(self) -> float:
        """Sum of retained base cells and attached cells."""
        return float(self.base.volumes[self.keep].sum() + self.extra_volumes.sum())

    @property
    def model_volume(self) -> float:
        """Retained base cells plus the analytic tunnel-model volumes."""
        return float(self.base.volumes[self.keep].sum()) + self.tunnel_volume

    # distances -----------------------------------------------------------

    def distances(self, sources) -> np.ndarray:
        """Shortest-path rows over the combined index (removed columns are inf)."""
        idx = np.array([self.index(s) for s in np.atleast_1d(sources)], dtype=int)
        out = np.empty((len(idx), self.n_total))
        for a in range(0, len(idx), _SOURCE_CHUNK):
            out[a:a + _SOURCE_CHUNK] = dijkstra(self.graph, directed=False,
                                                 indices=idx[a:a + _SOURCE_CHUNK])
        if not np.all(np.isfinite(out[:, self.alive])):
            raise DisconnectedGraphError("unreachable vertex")
        return out

    def metric_space(self, indices=None) -> FiniteMetricSpace:
        """Finite metric space on the given combined indices (default: all alive)."""
        idx = np.flatnonzero(self.alive) if indices is None else np.asarray(indices, dtype=int)
        d = self.distances(idx)[:, idx]
        d = np.minimum(d, d.T)
        return FiniteMetricSpace(tuple(self.id_of(i) for i in idx), d)

    def representatives(self, mask: np.ndarray) -> np.ndarray:
        """Sources realizing sups over pairs in the base set ``mask``.

        With a ring symmetry this is one vertex per ring meeting ``mask``;
        otherwise every vertex of ``mask``.
        """
        mask = np.asarray(mask, dtype=bool)
        if self.symmetry is None:
            return np.flatnonzero(mask)
        lay = self.symmetry
        reps = [lay.vertex(k, 0) for k in range(lay.n_rings) if mask[lay.ring_vertices(k)].any()]
        return np.array(reps, dtype=int)

    # io ------------------------------------------------------------------

    def to_csv(self, directory) -> None:
        """Write vertices/edges of the glued graph plus ``attachments.csv``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        alive = np.flatnonzero(self.alive)
        pos = -np.ones(self.n_total, dtype=np.int64)
        pos[alive] = np.arange(len(alive))
        vols = np.concatenate([self.base.volumes, self.extra_volumes])
        with open(d / "vertices.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "volume"])
            for i in alive:
                w.writerow([self.id_of(i), repr(float(vols[i]))])
        g = self.graph.tocoo()
        upper = g.row < g.col
        with open(d / "edges.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "length"])
            for a, b, ln in zip(g.row[upper], g.col[upper], g.data[upper]):
                w.writerow([int(pos[a]), int(pos[b]), repr(float(ln))])
        self.attachments.to_csv(d / "attachments.csv")


def glue(base: SampledManifold, **kwargs) -> GluedSpace:
    """Convenience constructor with everything kept by default."""
    keep = kwargs.pop("keep", np.ones(base.n, dtype=bool))
    return GluedSpace(base, keep, **kwargs)
