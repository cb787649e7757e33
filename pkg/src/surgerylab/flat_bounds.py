"""Upper bounds on intrinsic flat distance and their composition.

Every formula is evaluated exactly as written, left to right, so results are
reproducible bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "PreconditionError",
    "LakzianSormaniInput",
    "FlatBoundReport",
    "PipeBound",
    "TunnelSumReport",
    "a_floor",
    "lakzian_sormani_bound",
    "hls_bound",
    "string_limit_bound",
    "pipe_bound",
    "tunnels_to_strings_bound",
    "claim_t1_lambda",
    "sup_difference",
    "fit_constant",
]


class PreconditionError(ValueError):
    """An input violates the hypotheses of a bound."""


@dataclass(frozen=True)
class LakzianSormaniInput:
    """Quantities entering the subregion estimate for two manifolds.

    ``eps_bilip`` is the metric sandwich constant on the common region,
    ``lam`` the sup of distance differences on it, ``D_U1``/``D_U2`` its
    diameters measured in each manifold, and ``vol_excess_k`` the volume of
    ``M_k`` outside the region.
    """

    n: int
    eps_bilip: float
    D_U1: float
    D_U2: float
    lam: float
    vol_U1: float
    vol_U2: float
    vol_bdry_U1: float = 0.0
    vol_bdry_U2: float = 0.0
    vol_excess_1: float = 0.0
    vol_excess_2: float = 0.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if k != "n" and not (v >= 0 and math.isfinite(v)):
                raise PreconditionError(f"{k} must be finite and nonnegative, got {v}")


@dataclass(frozen=True)
class FlatBoundReport:
    a: float
    h: float
    h_bar: float
    bound: float
    provenance: str
    lam: float = 0.0
    eps: float = 0.0


def a_floor(inp: LakzianSormaniInput) -> float:
    """``arccos(1 / (1 + eps)) / pi * max(D_U1, D_U2)``."""
    return math.acos(1.0 / (1.0 + inp.eps_bilip)) / math.pi * max(inp.D_U1, inp.D_U2)


def lakzian_sormani_bound(inp: LakzianSormaniInput, a: float | None = None) -> FlatBoundReport:
    """Flat-distance bound from a common subregion.

    ``h = sqrt(lam (max(D_U1, D_U2) + lam / 4))``,
    ``h_bar = max(h, sqrt(eps^2 + 2 eps) D_U1, sqrt(eps^2 + 2 eps) D_U2)`` and
    ``bound = (2 h_bar + a)(vol_U1 + vol_U2 + vol_bdry_U1 + vol_bdry_U2)
    + vol_excess_1 + vol_excess_2``.

    Parameters
    ----------
    a : float, optional
        Must exceed :func:`a_floor`.  Defaults to ``1.0001`` times the floor,
        or the smallest positive double when the floor is zero.

    Raises
    ------
    PreconditionError
        If ``a`` does not exceed its floor.
    """
    floor = a_floor(inp)
    if a is None:
        a = 1.0001 * floor if floor > 0 else np.finfo(float).tiny
    if not a > floor:
        raise PreconditionError(f"a={a!r} must exceed its floor {floor!r}")
    eps = inp.eps_bilip
    lam = inp.lam
    h = math.sqrt(lam * (max(inp.D_U1, inp.D_U2) + lam / 4))
    s = math.sqrt(eps**2 + 2 * eps)
    h_bar = max(h, s * inp.D_U1, s * inp.D_U2)
    bound = (2 * h_bar + a) * (inp.vol_U1 + inp.vol_U2 + inp.vol_bdry_U1 + inp.vol_bdry_U2) \
        + inp.vol_excess_1 + inp.vol_excess_2
    return FlatBoundReport(float(a), h, h_bar, bound, "subregion", lam, eps)


def hls_bound(n: int, alpha: float, mass: float, eps_unif: float) -> float:
    """``2^((n+3)/2) alpha^(n+1) mass eps`` for uniformly close metrics."""
    if alpha < 1:
        raise PreconditionError(f"alpha={alpha} must be at least 1")
    if mass < 0 or eps_unif < 0:
        raise PreconditionError("mass and eps must be nonnegative")
    return 2 ** ((n + 3) / 2) * alpha ** (n + 1) * mass * eps_unif


def string_limit_bound(eps_net: float, c: float, mass: float, n: int) -> float:
    """Uniform bound ``12 eps`` pushed through :func:`hls_bound` with ``alpha = 1/c``."""
    if not 0 < c < 1:
        raise PreconditionError(f"c={c} must lie in (0, 1)")
    return hls_bound(n, 1 / c, mass, 12 * eps_net)


@dataclass(frozen=True)
class PipeBound:
    value: float
    terms: tuple
    dominant: str


def pipe_bound(rho: float, A_T1: float, A_T2: float, A_T3: float) -> PipeBound:
    """``A_T1 sqrt(rho) + A_T2 rho + A_T3 rho^2`` with the largest term named."""
    if min(A_T1, A_T2, A_T3) < 0:
        raise PreconditionError("constants must be nonnegative")
    if rho < 0:
        raise PreconditionError("rho must be nonnegative")
    terms = (A_T1 * math.sqrt(rho), A_T2 * rho, A_T3 * rho**2)
    names = ("sqrt_rho", "rho", "rho^2")
    return PipeBound(terms[0] + terms[1] + terms[2], terms, names[int(np.argmax(terms))])


@dataclass(frozen=True)
class TunnelSumReport:
    raw: float
    normalized: float
    K: int
    per_surgery: float


def tunnels_to_strings_bound(eps: float, K: int, per_surgery_bound: float,
                             N: int | None = None) -> TunnelSumReport:
    """Sum of per-surgery bounds over ``K`` tunnel/string swaps.

    ``normalized = raw * (N^2 / K) / sqrt(eps)`` is the constant ``A`` in the
    ``A sqrt(eps)`` form; it is independent of ``eps`` when each surgery costs
    ``A sqrt(rho)`` with ``rho`` proportional to ``eps / N^4``.

    Raises
    ------
    PreconditionError
        If ``N`` is given and ``K != N (N - 1) / 2``.
    """
    if K < 0 or per_surgery_bound < 0:
        raise PreconditionError("K and per_surgery_bound must be nonnegative")
    if N is not None and K != N * (N - 1) // 2:
        raise PreconditionError(f"K={K} is inconsistent with N={N}")
    raw = K * per_surgery_bound
    if K == 0 or eps <= 0:
        normalized = 0.0
    else:
        n_eff = N if N is not None else (1 + math.sqrt(1 + 8 * K)) / 2
        normalized = raw * (n_eff**2 / K) / math.sqrt(eps)
    return TunnelSumReport(raw, normalized, int(K), per_surgery_bound)


def sup_difference(space_a, space_b, mask, targets=None) -> tuple[float, np.ndarray, np.ndarray]:
    """Sup of ``|d_a - d_b|`` over pairs in ``mask x targets`` of base vertices.

    Returns the sup and the two distance blocks (rows = representatives of
    ``mask``).  Sources come from :meth:`GluedSpace.representatives`, which is
    exact for ring-symmetric spaces.
    """
    mask = np.asarray(mask, dtype=bool)
    targets = mask if targets is None else np.asarray(targets, dtype=bool)
    if space_a.base.n != space_b.base.n:
        raise PreconditionError("spaces do not share a base")
    if not (np.all(space_a.keep[mask | targets]) and np.all(space_b.keep[mask | targets])):
        raise PreconditionError("vertex set is not contained in both spaces")
    sym = space_a.symmetry is not None and space_b.symmetry is not None
    reps = space_a.representatives(mask) if sym else np.flatnonzero(mask)
    nb = space_a.base.n
    da = space_a.distances(reps)[:, :nb][:, targets]
    db = space_b.distances(reps)[:, :nb][:, targets]
    return float(np.abs(da - db).max()), da, db


def claim_t1_lambda(M_rho, Mt_rho, W) -> float:
    """``sup_{x, y in W} |d_{M_rho}(x, y) - d_{M~_rho}(x, y)|``.

    ``W`` is a boolean mask or a list of base vertex ids shared by both spaces.
    """
    W = np.asarray(W)
    if W.dtype != bool:
        ids = list(W)
        mask = np.zeros(M_rho.base.n, dtype=bool)
        try:
            mask[[M_rho.base.index(p) for p in ids]] = True
            other = [Mt_rho.base.index(p) for p in ids]
        except KeyError as exc:
            raise PreconditionError(f"W mismatch: {exc}") from None
        if sorted(other) != sorted(np.flatnonzero(mask).tolist()):
            raise PreconditionError("W sets differ between the two spaces")
        W = mask
    if M_rho.base.ids != Mt_rho.base.ids:
        raise PreconditionError("W sets differ between the two spaces")
    return sup_difference(M_rho, Mt_rho, W)[0]


def fit_constant(xs, ys, power: float) -> float:
    """Certificate constant ``max_k ys[k] / xs[k]^power``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return float(np.max(ys / xs**power))
