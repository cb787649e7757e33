"""Finite metric spaces and comparisons between metrics on a common point set.

A :class:`FiniteMetricSpace` is an ordered tuple of opaque string ids together
with a dense symmetric distance matrix.  Every construction in the package
ends in one of these, so the helpers here (axiom checks, bilipschitz
constants, uniform distance, pullbacks) are the common currency.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "MalformedInputError",
    "MismatchedPointsError",
    "NotBijectiveError",
    "FiniteMetricSpace",
    "AxiomReport",
    "BilipschitzReport",
    "verify_metric_axioms",
    "bilipschitz_compare",
    "uniform_distance",
    "pullback_metric",
    "relabel",
    "ANALYTIC_REL_TOL",
    "GRAPH_REL_TOL",
]

ANALYTIC_REL_TOL = 1e-9
GRAPH_REL_TOL = 1e-6

_MAGIC = b"FMS1"


class MalformedInputError(ValueError):
    """Distance data that is not a finite square matrix."""


class MismatchedPointsError(ValueError):
    """Two metrics that are not defined on the same point set."""


class NotBijectiveError(ValueError):
    """A relabeling map that is not a bijection of point ids."""


def _as_matrix(dist) -> np.ndarray:
    d = np.array(dist, dtype=float, copy=True)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise MalformedInputError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise MalformedInputError("distance matrix contains NaN or infinite entries")
    return d


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Point ids plus a dense symmetric distance matrix.

    The matrix is copied on construction and made read-only, so instances can
    be shared freely between workers.  Only shape and finiteness are checked
    here; use :func:`verify_metric_axioms` for the axioms themselves.
    """

    points: tuple
    dist: np.ndarray

    def __post_init__(self):
        pts = tuple(str(p) for p in self.points)
        d = _as_matrix(self.dist)
        if len(pts) != d.shape[0]:
            raise MalformedInputError(
                f"{len(pts)} point ids for a {d.shape[0]}x{d.shape[0]} matrix")
        if len(set(pts)) != len(pts):
            raise MalformedInputError("point ids must be unique")
        d.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dist", d)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def index(self, pid: str) -> int:
        return self._lookup[pid]

    @property
    def _lookup(self) -> dict:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {p: i for i, p in enumerate(self.points)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def distance(self, x: str, y: str) -> float:
        return float(self.dist[self.index(x), self.index(y)])

    def scaled(self, k: float) -> "FiniteMetricSpace":
        return FiniteMetricSpace(self.points, self.dist * k)

    def restrict(self, ids: Sequence[str]) -> "FiniteMetricSpace":
        idx = np.array([self.index(p) for p in ids], dtype=int)
        return FiniteMetricSpace(tuple(ids), self.dist[np.ix_(idx, idx)])

    def aligned(self, order: Sequence[str]) -> np.ndarray:
        """Distance matrix reordered to ``order`` (which must be a permutation)."""
        if tuple(order) == self.points:
            return self.dist
        if len(order) != self.n or set(order) != set(self.points):
            raise MismatchedPointsError("point sets differ")
        idx = np.array([self.index(p) for p in order], dtype=int)
        return self.dist[np.ix_(idx, idx)]

    # serialization -------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.points)
            for row in self.dist:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "FiniteMetricSpace":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise MalformedInputError(f"{path}: empty file")
        try:
            mat = [[float(v) for v in r] for r in rows[1:]]
        except ValueError as exc:
            raise MalformedInputError(f"{path}: {exc}") from None
        if any(len(r) != len(rows[0]) for r in mat):
            raise MalformedInputError(f"{path}: ragged rows")
        return cls(tuple(rows[0]), np.array(mat, dtype=float).reshape(len(mat), len(rows[0])))

    def to_bytes(self) -> bytes:
        iu = np.triu_indices(self.n, k=1)
        body = np.ascontiguousarray(self.dist[iu], dtype="<f8").tobytes()
        return _MAGIC + struct.pack("<I", self.n) + body

    @classmethod
    def from_bytes(cls, blob: bytes, points: Sequence[str] | None = None) -> "FiniteMetricSpace":
        """Inverse of :meth:`to_bytes`; ids default to ``"0".."n-1"``."""
        if blob[:4] != _MAGIC:
            raise MalformedInputError("bad magic bytes")
        (n,) = struct.unpack("<I", blob[4:8])
        m = n * (n - 1) // 2
        if len(blob) != 8 + 8 * m:
            raise MalformedInputError("truncated cache")
        vals = np.frombuffer(blob, dtype="<f8", offset=8, count=m)
        d = np.zeros((n, n))
        iu = np.triu_indices(n, k=1)
        d[iu] = vals
        d[(iu[1], iu[0])] = vals
        pts = tuple(points) if points is not None else tuple(str(i) for i in range(n))
        return cls(pts, d)

    def save_cache(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load_cache(cls, path, points=None) -> "FiniteMetricSpace":
        return cls.from_bytes(Path(path).read_bytes(), points)


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of :func:`verify_metric_axioms`.

    ``worst_triple`` is ``(i, j, k)`` maximizing ``d[i,k] - d[i,j] - d[j,k]``.
    """

    passed: bool
    tolerance: float
    max_diagonal: float
    max_asymmetry: float
    min_offdiagonal: float
    triangle_defect: float
    worst_triple: tuple | None

    def __bool__(self) -> bool:
        return self.passed


def _triangle_defect(d: np.ndarray) -> tuple[float, tuple | None]:
    n = d.shape[0]
    if n < 3:
        return 0.0, None
    best, arg = -np.inf, None
    for j in range(n):
        # defect[i, k] = d[i,k] - (d[i,j] + d[j,k])
        defect = d - (d[:, j][:, None] + d[j, :][None, :])
        flat = int(np.argmax(defect))
        v = defect.flat[flat]
        if v > best:
            best, arg = float(v), (flat // n, j, flat % n)
    return best, arg


def verify_metric_axioms(space, tol: float | None = None,
                         rel_tol: float = ANALYTIC_REL_TOL) -> AxiomReport:
    """Check zero diagonal, symmetry, positivity and the triangle inequality.

    Parameters
    ----------
    space : FiniteMetricSpace or array_like
        The metric to test.
    tol : float, optional
        Absolute tolerance.  Defaults to ``rel_tol * diameter``.
    rel_tol : float
        Relative tolerance used when ``tol`` is not given.  Use
        :data:`GRAPH_REL_TOL` for shortest-path matrices.

    Returns
    -------
    AxiomReport
    """
    d = space.dist if isinstance(space, FiniteMetricSpace) else _as_matrix(space)
    n = d.shape[0]
    if tol is None:
        tol = rel_tol * (float(d.max()) if n else 0.0)
    diag = float(np.abs(np.diag(d)).max()) if n else 0.0
    asym = float(np.abs(d - d.T).max()) if n else 0.0
    if n > 1:
        off = d[~np.eye(n, dtype=bool)]
        min_off = float(off.min())
    else:
        min_off = np.inf
    defect, triple = _triangle_defect(d)
    ok = diag <= tol and asym <= tol and min_off > 0 and defect <= tol
    return AxiomReport(bool(ok), float(tol), diag, asym, min_off, max(defect, 0.0), triple)


@dataclass(frozen=True)
class BilipschitzReport:
    """Two-sided ratio bounds ``c_lower <= d2/d1 <= C_upper`` over all pairs."""

    c_lower: float
    C_upper: float
    sup_abs_diff: float
    argmax_pair: tuple

    @property
    def alpha(self) -> float:
        """Smallest ``a >= 1`` with ``1/a <= d2/d1 <= a``."""
        return max(1.0, self.C_upper, 1.0 / self.c_lower)


def _pair_arrays(d1: FiniteMetricSpace, d2: FiniteMetricSpace):
    if len(d1) != len(d2) or set(d1.points) != set(d2.points):
        raise MismatchedPointsError("metrics are defined on different point sets")
    return d1.dist, d2.aligned(d1.points)


def bilipschitz_compare(d1: FiniteMetricSpace, d2: FiniteMetricSpace) -> BilipschitzReport:
    """Ratio bounds of ``d2`` against ``d1`` over unordered distinct pairs."""
    a, b = _pair_arrays(d1, d2)
    n = a.shape[0]
    if n < 2:
        raise MalformedInputError("need at least two points")
    iu = np.triu_indices(n, k=1)
    x, y = a[iu], b[iu]
    ratio = y / x
    diff = np.abs(y - x)
    k = int(np.argmax(diff))
    pair = (d1.points[iu[0][k]], d1.points[iu[1][k]])
    return BilipschitzReport(float(ratio.min()), float(ratio.max()), float(diff[k]), pair)


def uniform_distance(d1: FiniteMetricSpace, d2: FiniteMetricSpace) -> float:
    """Sup of ``|d1 - d2|`` over all pairs of the common point set."""
    a, b = _pair_arrays(d1, d2)
    return float(np.abs(a - b).max()) if a.size else 0.0


def _check_bijection(F: Mapping[str, str], target: Sequence[str]) -> None:
    vals = list(F.values())
    if len(F) != len(target) or len(set(vals)) != len(vals) or set(vals) != set(target):
        raise NotBijectiveError("map is not a bijection onto the target point set")


def pullback_metric(d_target: FiniteMetricSpace, F: Mapping[str, str]) -> FiniteMetricSpace:
    """Pull ``d_target`` back along ``F``: ``d(x, y) = d_target(F(x), F(y))``.

    Entries are copied, not recomputed, so the result satisfies the axioms
    exactly whenever ``d_target`` does.
    """
    _check_bijection(F, d_target.points)
    dom = tuple(str(k) for k in F)
    idx = np.array([d_target.index(F[k]) for k in F], dtype=int)
    return FiniteMetricSpace(dom, d_target.dist[np.ix_(idx, idx)])


def relabel(space: FiniteMetricSpace, mapping: Mapping[str, str]) -> FiniteMetricSpace:
    """Rename every point ``p`` to ``mapping[p]`` keeping the matrix as is."""
    _check_bijection({v: k for k, v in mapping.items()}, space.points)
    return FiniteMetricSpace(tuple(mapping[p] for p in space.points), space.dist)
