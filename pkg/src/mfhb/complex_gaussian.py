"""
Complex normal laws and their real representation.

A centered complex vector ``X`` with covariance ``Sigma = E X X^H`` and
relation matrix ``Gamma = E X X^T`` corresponds to the real vector
``(Re X, Im X)`` with covariance

    G = 1/2 [[Re S + Re Γ, -Im S + Im Γ],
             [Im S + Im Γ,  Re S - Re Γ]].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_eig, hermitize, matrix_sqrt

__all__ = [
    "ComplexGaussianLaw",
    "circular_factor",
    "empirical_real_moments",
    "from_real_rep",
    "real_to_complex",
    "sample_circular",
    "stack_real",
    "to_real_rep",
]


def to_real_rep(sigma, gamma) -> np.ndarray:
    """Covariance of ``(Re X, Im X)`` from ``(Sigma, Gamma)``."""
    sigma = np.asarray(sigma, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    if sigma.shape != gamma.shape or sigma.shape[-1] != sigma.shape[-2]:
        raise ValueError("sigma and gamma must be square and of equal shape")
    g11 = 0.5 * (sigma.real + gamma.real)
    g12 = 0.5 * (-sigma.imag + gamma.imag)
    g21 = 0.5 * (sigma.imag + gamma.imag)
    g22 = 0.5 * (sigma.real - gamma.real)
    g = np.block([[g11, g12], [g21, g22]])
    return 0.5 * (g + g.T)


def from_real_rep(g) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`to_real_rep`; returns ``(Sigma, Gamma)``."""
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
        raise ValueError("real representation must be a square matrix of even size")
    j = g.shape[0] // 2
    g11, g12 = g[:j, :j], g[:j, j:]
    g21, g22 = g[j:, :j], g[j:, j:]
    sigma = (g11 + g22) + 1j * (g21 - g12)
    gamma = (g11 - g22) + 1j * (g21 + g12)
    return sigma, 0.5 * (gamma + gamma.T)


@dataclass(frozen=True, eq=False)
class ComplexGaussianLaw:
    """``N^c(mean, cov, rel)``."""

    mean: np.ndarray
    cov: np.ndarray
    rel: np.ndarray

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.cov, dtype=complex))
        rel = np.atleast_2d(np.asarray(self.rel, dtype=complex))
        mean = np.atleast_1d(np.asarray(self.mean, dtype=complex))
        if cov.shape != rel.shape or mean.shape != cov.shape[:1]:
            raise ValueError("inconsistent dimensions")
        if np.max(np.abs(rel - rel.T), initial=0.0) > 1e-12:
            raise ValueError("relation matrix must be symmetric")
        object.__setattr__(self, "cov", hermitize(cov))
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "mean", mean)
        w, _ = hermitian_eig(self.real_rep())
        if w[-1] < -1e-10 * max(1.0, abs(w[0])):
            raise ValueError("(cov, rel) do not form a valid covariance structure")

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    def real_rep(self) -> np.ndarray:
        return to_real_rep(self.cov, self.rel)

    @classmethod
    def from_real_rep(cls, g, mean=None) -> "ComplexGaussianLaw":
        sigma, gamma = from_real_rep(g)
        mean = np.zeros(sigma.shape[0], dtype=complex) if mean is None else mean
        return cls(mean, sigma, gamma)


def stack_real(z: np.ndarray) -> np.ndarray:
    """``(..., J)`` complex -> ``(..., 2J)`` real, real parts first."""
    z = np.asarray(z)
    return np.concatenate([z.real, z.imag], axis=-1)


def real_to_complex(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`stack_real`."""
    x = np.asarray(x, dtype=float)
    j = x.shape[-1] // 2
    return x[..., :j] + 1j * x[..., j:]


def circular_factor(cov) -> np.ndarray:
    """
    Square root of the real covariance of a circular vector ``N^c(0, cov, 0)``.

    ``cov`` may be stacked ``(..., m, m)``; the result has shape
    ``(..., 2m, 2m)``. Tiny negative eigenvalues (round-off) are clamped.
    """
    cov = hermitize(np.asarray(cov, dtype=complex))
    re, im = cov.real, cov.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    g = 0.5 * np.concatenate([top, bottom], axis=-2)
    w, _ = hermitian_eig(g)
    scale = np.maximum(np.abs(w[..., :1]), np.finfo(float).tiny)
    if np.any(w[..., -1:] < -1e-8 * scale):
        raise ValueError("covariance is not positive semidefinite")
    return matrix_sqrt(g, 0.0)


def draw_circular(factor: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Map standard normal draws ``z (..., 2m)`` through a circular factor."""
    y = np.einsum("...ab,...b->...a", factor, z)
    return real_to_complex(y)


def sample_circular(cov, count: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw ``count`` vectors from ``N^c(0, cov, 0)``.

    The real and imaginary parts are drawn jointly from the ``2m``-variate
    real normal law and recombined. Returns shape ``(count, ..., m)``.
    """
    factor = circular_factor(cov)
    z = rng.standard_normal((int(count),) + factor.shape[:-1])
    return draw_circular(factor, z)


def empirical_real_moments(vectors, centered: bool = True) -> np.ndarray:
    """
    Second moments of ``(Re v, Im v)`` over a sample of complex vectors.

    With ``centered=True`` the outer product of the sample mean is subtracted
    (divisor is the sample size in both cases).
    """
    v = np.asarray(vectors)
    if v.ndim != 2 or v.shape[0] < 2:
        raise ValueError("need at least two vectors, shape (count, J)")
    x = stack_real(v)
    if centered:
        x = x - x.mean(axis=0)
    g = x.T @ x / x.shape[0]
    return 0.5 * (g + g.T)
