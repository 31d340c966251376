"""Hermitian matrix functions built on the eigendecomposition.

Every function accepts a single ``(m, m)`` matrix or a stack ``(..., m, m)``
and symmetrizes its input first, so tiny asymmetries from floating point
round-off never leak into the results.
"""
from __future__ import annotations

import numpy as np

from .exceptions import DegenerateMatrixError, EigenDecompositionError

__all__ = [
    "clamp_eigenvalues",
    "frobenius_norm",
    "hermitian_eig",
    "hermitize",
    "matrix_inv_sqrt",
    "matrix_sqrt",
    "psd_project",
    "spectral_floor",
]


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return ``(A + A^H) / 2``; diagonal imaginary parts become exactly zero."""
    a = np.asarray(a)
    out = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    if np.iscomplexobj(out):
        idx = np.arange(out.shape[-1])
        out[..., idx, idx] = out[..., idx, idx].real
    return out


def frobenius_norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def hermitian_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a Hermitian (or real symmetric) matrix.

    Parameters
    ----------
    a : ndarray, shape (..., m, m)

    Returns
    -------
    w : ndarray, shape (..., m)
        Real eigenvalues in descending order.
    v : ndarray, shape (..., m, m)
        Unitary matrix whose columns are the eigenvectors, so that
        ``a == v @ diag(w) @ v^H``.
    """
    h = hermitize(a)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        norm = float(np.max(frobenius_norm(h))) if h.size else 0.0
        raise EigenDecompositionError(
            f"eigensolver did not converge (dim={h.shape[-1]}, "
            f"max Frobenius norm={norm:.3e}, finite={np.isfinite(h).all()})"
        ) from exc
    return w[..., ::-1], v[..., ::-1]


def _compose(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return hermitize((v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2)))


def spectral_floor(a: np.ndarray, rel: float = 1e-10) -> np.ndarray:
    """Scale-relative eigenvalue floor ``rel * trace(A) / dim`` (per matrix)."""
    a = np.asarray(a)
    tr = np.trace(a, axis1=-2, axis2=-1).real
    return rel * np.maximum(tr, 0.0) / a.shape[-1]


def clamp_eigenvalues(a: np.ndarray, floor=0.0) -> tuple[np.ndarray, int]:
    """
    Raise every eigenvalue of ``a`` to at least ``floor``.

    Returns the clamped matrix and the number of eigenvalues that moved.
    ``floor`` may be a scalar or one value per stacked matrix.
    """
    w, v = hermitian_eig(a)
    floor = np.asarray(floor, dtype=float)[..., None]
    low = w < floor
    if not low.any():
        return hermitize(a), 0
    return _compose(v, np.maximum(w, floor)), int(low.sum())


def matrix_sqrt(a: np.ndarray, floor=0.0, return_clamped: bool = False):
    """
    Principal (PSD Hermitian) square root.

    Eigenvalues below ``floor`` are clamped to ``floor`` before taking the
    root, so indefinite input is accepted. With ``return_clamped=True`` the
    number of clamped eigenvalues is returned alongside the root.
    """
    floor = np.asarray(floor, dtype=float)
    if np.any(floor < 0):
        raise ValueError("floor must be nonnegative")
    w, v = hermitian_eig(a)
    fl = floor[..., None]
    n_clamped = int(np.count_nonzero(w < fl))
    root = _compose(v, np.sqrt(np.maximum(w, fl)))
    if return_clamped:
        return root, n_clamped
    return root


def matrix_inv_sqrt(a: np.ndarray, rel_threshold: float = 1e-10) -> np.ndarray:
    """
    Pseudo-inverse square root of a PSD Hermitian matrix.

    Eigenvalues at or below ``rel_threshold * max_eigenvalue`` are treated as
    zero and map to zero, so the result ``C`` satisfies ``C A C = P`` with
    ``P`` the orthogonal projector onto the retained eigenspace.

    Raises
    ------
    DegenerateMatrixError
        If no eigenvalue survives the threshold.
    """
    if rel_threshold < 0:
        raise ValueError("rel_threshold must be nonnegative")
    w, v = hermitian_eig(a)
    wmax = w[..., :1]
    keep = (w > rel_threshold * wmax) & (wmax > 0)
    if not keep.any(axis=-1).all():
        raise DegenerateMatrixError("matrix numerically zero")
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return _compose(v, inv)


def psd_project(a: np.ndarray) -> np.ndarray:
    """
    Nearest PSD matrix in Frobenius norm (eigenvalue clipping at zero).

    PSD input is returned unchanged (bitwise, after symmetrization), which
    makes the projection exactly idempotent. Eigenvalues within round-off
    of zero (``-1e-13 * max|w|``) count as nonnegative.
    """
    h = hermitize(a)
    w, v = hermitian_eig(h)
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    ok = np.all(w >= -1e-13 * scale, axis=-1)
    if np.all(ok):
        return h
    return np.where(ok[..., None, None], h, _compose(v, np.maximum(w, 0.0)))
