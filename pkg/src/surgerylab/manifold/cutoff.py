"""Smooth cutoff profiles used to mollify metrics on thin annuli."""
from __future__ import annotations

import numpy as np

__all__ = ["DomainError", "bump", "cutoff_phi", "cutoff_psi"]

_A, _B = 0.25, 0.75
_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


class DomainError(ValueError):
    """Argument outside the domain of a profile."""


def bump(t):
    """``exp(-1/(t-1/4) - 1/(3/4-t))`` on ``(1/4, 3/4)``, zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > _A) & (t < _B)
    s = t[inside]
    out[inside] = np.exp(-1.0 / (s - _A) - 1.0 / (_B - s))
    return out


def _integral(t: np.ndarray) -> np.ndarray:
    # Gauss-Legendre on [1/4, t]; the integrand is flat to all orders at both ends
    half = 0.5 * (t - _A)
    nodes = _A + half[:, None] * (_GL_X[None, :] + 1.0)
    return half * (bump(nodes) @ _GL_W)


_NORM = float(_integral(np.array([_B]))[0])


def cutoff_phi(t):
    """Smooth step with ``phi = 0`` on ``[0, 1/4]`` and ``phi = 1`` on ``[3/4, 1]``.

    The profile is the normalized integral of :func:`bump`; it is symmetric
    about ``1/2`` so ``phi(1/2) = 1/2``.

    Parameters
    ----------
    t : float or array_like
        Values in ``[0, 1]``.

    Raises
    ------
    DomainError
        If any value lies outside ``[0, 1]``.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError("cutoff_phi is defined on [0, 1]")
    return _phi(arr)


def _phi(arr: np.ndarray):
    flat = np.atleast_1d(arr).astype(float).ravel()
    out = np.where(flat >= _B, 1.0, 0.0)
    mid = (flat > _A) & (flat < _B)
    if mid.any():
        # quadrature rounding can overshoot 1 by an ulp near the top
        out[mid] = np.clip(_integral(flat[mid]) / _NORM, 0.0, 1.0)
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def cutoff_psi(t, rho: float):
    """Annular cutoff ``psi(t) = phi(10/rho * (t - 9 rho/10))`` on ``[0.9 rho, rho]``."""
    if rho <= 0:
        raise DomainError("rho must be positive")
    arr = np.asarray(t, dtype=float)
    u = 10.0 / rho * (arr - 0.9 * rho)
    # absorb rounding at the annulus ends
    tol = 1e-12
    if np.any((u < -tol) | (u > 1 + tol)):
        raise DomainError("cutoff_psi is defined on [0.9 rho, rho]")
    return _phi(np.clip(u, 0.0, 1.0))


def psi_extended(r, rho: float):
    """``psi`` extended by 0 below the annulus and by 1 above it."""
    u = 10.0 / rho * (np.asarray(r, dtype=float) - 0.9 * rho)
    return _phi(np.clip(u, 0.0, 1.0))
