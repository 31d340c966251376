"""
Frequency-domain building blocks.

Conventions
-----------
* A series is an ``(n, m)`` float array, row ``t`` holding ``X(t+1)``.
* The Fourier grid of size ``n`` holds the indices ``1 <= |j| <= n // 2`` with
  frequencies ``2 pi j / n``. For even ``n`` both ``j = n/2`` and ``j = -n/2``
  are members, so the frequency pi is counted twice.
* A :class:`SpectralField` stores the matrices at the positive indices only.
  Values at negative indices are transposes, ``A(-lam) = A(lam)^T``, so the
  reflection symmetry holds exactly by construction.
* Component indices are zero based.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._validation import check_component, check_series
from .linalg import clamp_eigenvalues, hermitize, spectral_floor

__all__ = [
    "ComplexExponential",
    "Constant",
    "FrequencyGrid",
    "KernelSpectralEstimate",
    "SpectralField",
    "SpectralMeanSpec",
    "Tabulated",
    "bartlett_priestley",
    "fourier_transform",
    "integrated_periodogram",
    "kernel_spectral_estimate",
    "periodogram",
    "read_series_csv",
    "sample_cross_correlation",
    "sample_cross_covariance",
    "spectral_mean_true",
    "subsample_mean_spectrum",
    "subsample_periodograms",
    "wrap_frequency",
]

TWO_PI = 2.0 * np.pi


def wrap_frequency(lam) -> np.ndarray:
    """Map frequencies into ``(-pi, pi]``."""
    lam = np.asarray(lam, dtype=float)
    out = np.pi - np.mod(np.pi - lam, TWO_PI)
    return out


@dataclass(frozen=True)
class FrequencyGrid:
    """Fourier frequencies ``2 pi j / n`` for ``1 <= |j| <= n // 2``."""

    n: int

    def __post_init__(self):
        if int(self.n) < 2:
            raise ValueError("grid size must be at least 2")
        object.__setattr__(self, "n", int(self.n))

    @property
    def half(self) -> int:
        return self.n // 2

    @property
    def positive_indices(self) -> np.ndarray:
        return np.arange(1, self.half + 1)

    @property
    def positive_freqs(self) -> np.ndarray:
        return TWO_PI * self.positive_indices / self.n

    @property
    def indices(self) -> np.ndarray:
        """All indices ordered ``-N, ..., -1, 1, ..., N``."""
        pos = self.positive_indices
        return np.concatenate([-pos[::-1], pos])

    @property
    def freqs(self) -> np.ndarray:
        return TWO_PI * self.indices / self.n

    def __len__(self) -> int:
        return 2 * self.half


@dataclass(frozen=True, eq=False)
class SpectralField:
    """
    Hermitian matrices on a Fourier grid.

    ``values`` has shape ``(..., N, m, m)`` where ``N = grid.half``; leading
    axes index a batch (for example one field per subsample). Indexing a
    batched field returns the field of a single batch member.
    """

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim < 3 or vals.shape[-1] != vals.shape[-2]:
            raise ValueError("values must have shape (..., N, m, m)")
        if vals.shape[-3] != self.grid.half:
            raise ValueError(
                f"values hold {vals.shape[-3]} frequencies, grid expects "
                f"{self.grid.half}"
            )
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.values.shape[:-3]

    def __len__(self) -> int:
        if not self.batch_shape:
            raise TypeError("unbatched SpectralField has no length")
        return self.batch_shape[0]

    def __getitem__(self, item) -> "SpectralField":
        if not self.batch_shape:
            raise TypeError("unbatched SpectralField is not indexable")
        return SpectralField(self.grid, self.values[item])

    def at(self, j: int) -> np.ndarray:
        """Matrix at grid index ``j`` (negative indices are transposes)."""
        if not 1 <= abs(j) <= self.grid.half:
            raise IndexError(f"index {j} not on grid of size {self.grid.n}")
        mat = self.values[..., abs(j) - 1, :, :]
        return mat if j > 0 else np.swapaxes(mat, -1, -2)

    def full(self) -> np.ndarray:
        """Matrices at every grid index, ordered as ``grid.indices``."""
        neg = np.swapaxes(self.values[..., ::-1, :, :], -1, -2)
        return np.concatenate([neg, self.values], axis=-3)

    def mean(self) -> "SpectralField":
        """Average over the leading batch axis."""
        return SpectralField(self.grid, self.values.mean(axis=0))


# --------------------------------------------------------------------------
# weight functions


@dataclass(frozen=True)
class Constant:
    c: complex = 1.0

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        return np.full(lam.shape, complex(self.c))

    def to_dict(self) -> dict:
        c = complex(self.c)
        return {"kind": "constant", "re": c.real, "im": c.imag}


@dataclass(frozen=True)
class ComplexExponential:
    """``lam -> exp(i h lam)``."""

    h: int

    def __call__(self, lam) -> np.ndarray:
        x = self.h * np.asarray(lam, dtype=float)
        return np.cos(x) + 1j * np.sin(x)

    def to_dict(self) -> dict:
        return {"kind": "complex_exponential", "h": int(self.h)}


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Weight function given by values on a frequency table.

    Evaluation interpolates real and imaginary parts linearly and
    periodically.
    """

    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        f = wrap_frequency(self.freqs)
        v = np.asarray(self.values, dtype=complex)
        if f.shape != v.shape or f.ndim != 1 or f.size < 2:
            raise ValueError("freqs and values must be matching 1-d arrays")
        if not np.all(np.isfinite(v)):
            raise ValueError("tabulated weights must be finite")
        order = np.argsort(f)
        object.__setattr__(self, "freqs", f[order])
        object.__setattr__(self, "values", v[order])

    def __call__(self, lam) -> np.ndarray:
        lam = wrap_frequency(lam)
        re = np.interp(lam, self.freqs, self.values.real, period=TWO_PI)
        im = np.interp(lam, self.freqs, self.values.imag, period=TWO_PI)
        return re + 1j * im

    def to_dict(self) -> dict:
        return {
            "kind": "tabulated",
            "freqs": self.freqs.tolist(),
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }


def weight_from_dict(d: dict):
    kind = d["kind"]
    if kind == "constant":
        return Constant(complex(d.get("re", 1.0), d.get("im", 0.0)))
    if kind == "complex_exponential":
        return ComplexExponential(int(d["h"]))
    if kind == "tabulated":
        vals = np.asarray(d["re"]) + 1j * np.asarray(d.get("im", np.zeros(len(d["re"]))))
        return Tabulated(np.asarray(d["freqs"]), vals)
    raise ValueError(f"unknown weight function kind {kind!r}")


@dataclass(frozen=True)
class SpectralMeanSpec:
    """A list of ``(phi, r, s)`` triples defining integrated periodograms."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((phi, int(r), int(s)) for phi, r, s in self.entries)
        if not entries:
            raise ValueError("a spectral mean spec needs at least one entry")
        for _, r, s in entries:
            if r < 0 or s < 0:
                raise ValueError("component indices must be nonnegative")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def r(self) -> np.ndarray:
        return np.array([e[1] for e in self.entries])

    @property
    def s(self) -> np.ndarray:
        return np.array([e[2] for e in self.entries])

    def weights(self, lam) -> np.ndarray:
        """Weight values, shape ``(J, len(lam))``."""
        return np.stack([phi(lam) for phi, _, _ in self.entries])

    def check_dim(self, m: int) -> None:
        for _, r, s in self.entries:
            check_component(r, m, "r")
            check_component(s, m, "s")


# --------------------------------------------------------------------------
# finite Fourier transform and periodograms


def fourier_transform(x, grid: FrequencyGrid | None = None) -> np.ndarray:
    """
    Finite Fourier transform at the positive grid frequencies.

    Returns ``d`` with shape ``(..., N, m)`` where
    ``d_r(lam) = (2 pi n)^(-1/2) sum_{t=1}^{n} X_r(t) exp(-i t lam)``.
    Values at ``-lam`` are the complex conjugates. Stacked series
    ``(..., n, m)`` are transformed independently.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-2]
    grid = FrequencyGrid(n) if grid is None else grid
    if grid.n != n:
        raise ValueError(f"grid size {grid.n} does not match series length {n}")
    spec = np.fft.fft(x, axis=-2)[..., 1 : grid.half + 1, :]
    # the sum starts at t = 1, numpy's at t = 0
    phase = np.exp(-1j * grid.positive_freqs)[:, None]
    return spec * phase / np.sqrt(TWO_PI * n)


def _outer(d: np.ndarray) -> np.ndarray:
    return d[..., :, None] * np.conj(d[..., None, :])


def periodogram(x, grid: FrequencyGrid | None = None) -> SpectralField:
    """Periodogram matrices ``I(lam) = d(lam) d(lam)^H`` on the Fourier grid."""
    x = np.asarray(x, dtype=float)
    grid = FrequencyGrid(x.shape[-2]) if grid is None else grid
    return SpectralField(grid, _outer(fourier_transform(x, grid)))


def subsample_periodograms(x, b: int) -> SpectralField:
    """
    Periodograms of all ``n - b + 1`` blocks of ``b`` consecutive rows.

    The result is a batched field on ``FrequencyGrid(b)``; entry ``t`` is the
    periodogram of rows ``t, ..., t + b - 1``.
    """
    x = check_series(x)
    n = x.shape[0]
    b = int(b)
    if b > n:
        raise ValueError(f"block length {b} exceeds series length {n}")
    if b < 4:
        raise ValueError("block length must be at least 4")
    blocks = np.lib.stride_tricks.sliding_window_view(x, b, axis=0)
    # sliding_window_view puts the window axis last: (T, m, b)
    blocks = np.swapaxes(blocks, -1, -2)
    return periodogram(blocks, FrequencyGrid(b))


def subsample_mean_spectrum(subs: SpectralField) -> SpectralField:
    """Average of the subsample periodograms (``f~``)."""
    if not subs.batch_shape or len(subs) == 0:
        raise ValueError("need a nonempty batch of subsample periodograms")
    return subs.mean()


# --------------------------------------------------------------------------
# time-domain moments


def sample_cross_covariance(x, h: int, r: int, s: int) -> float:
    """
    Moment estimator of the lag-``h`` cross-covariance ``gamma_rs(h)``.

    For ``h >= 0`` this is ``n^-1 sum_{t=1}^{n-h} X_r(t+h) X_s(t)``; negative
    lags use ``gamma_rs(h) = gamma_sr(-h)``. No mean correction is applied.
    """
    x = check_series(x)
    n, m = x.shape
    r = check_component(r, m, "r")
    s = check_component(s, m, "s")
    h = int(h)
    if abs(h) >= n:
        raise ValueError(f"|lag| must be below n={n}, got {h}")
    if h < 0:
        r, s, h = s, r, -h
    return float(np.dot(x[h:, r], x[: n - h, s]) / n)


def sample_cross_correlation(x, h: int, r: int, s: int) -> np.ndarray:
    """
    Sample cross-correlation ``gamma_rs(h) / sqrt(gamma_rr(0) gamma_ss(0))``.

    Works on a single ``(n, m)`` series or a stack ``(..., n, m)``; the data
    are used as given (center them first if needed).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-2]
    h = int(h)
    if abs(h) >= n:
        raise ValueError(f"|lag| must be below n={n}, got {h}")
    if h < 0:
        r, s, h = s, r, -h
    num = np.sum(x[..., h:, r] * x[..., : n - h, s], axis=-1) / n
    var_r = np.sum(x[..., r] ** 2, axis=-1) / n
    var_s = np.sum(x[..., s] ** 2, axis=-1) / n
    return num / np.sqrt(var_r * var_s)


# --------------------------------------------------------------------------
# kernel spectral density estimation


def bartlett_priestley(u) -> np.ndarray:
    """``K(u) = 3/(4 pi) (1 - (u/pi)^2)`` on ``|u| <= pi``; integrates to one."""
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= np.pi, 0.75 / np.pi * (1.0 - (u / np.pi) ** 2), 0.0)


class KernelSpectralEstimate:
    """
    Smoothed periodogram ``f^`` with an evaluator at arbitrary frequencies.

    ``f^(lam) = 2 pi / (n h) * sum_{j in G(n)} K(wrap(lam - lam_j) / h) I(lam_j)``

    followed by symmetrization and an eigenvalue floor of
    ``floor_rel * trace / m`` so every returned matrix is Hermitian PD.
    """

    def __init__(self, pgram: SpectralField, bandwidth: float, floor_rel: float = 1e-10):
        n = pgram.grid.n
        if not TWO_PI / n < bandwidth < np.pi:
            raise ValueError(
                f"bandwidth must lie in (2 pi / n, pi) = ({TWO_PI / n:.4g}, pi), "
                f"got {bandwidth}"
            )
        self.pgram = pgram
        self.bandwidth = float(bandwidth)
        self.floor_rel = float(floor_rel)
        self.n = n
        self._freqs = pgram.grid.freqs
        self._full = pgram.full()
        self.n_floored = 0

    def _raw(self, lam: np.ndarray) -> np.ndarray:
        u = wrap_frequency(lam[:, None] - self._freqs[None, :]) / self.bandwidth
        w = bartlett_priestley(u) * (TWO_PI / (self.n * self.bandwidth))
        return np.einsum("kl,lab->kab", w, self._full)

    def evaluate(self, lam) -> np.ndarray:
        """Estimate at the frequencies ``lam``; shape ``(len(lam), m, m)``.

        Negative frequencies return the transpose of the estimate at ``-lam``.
        """
        lam = wrap_frequency(np.atleast_1d(lam))
        pos = np.abs(lam)
        est = hermitize(self._raw(pos))
        est, n_fl = clamp_eigenvalues(est, spectral_floor(est, self.floor_rel))
        self.n_floored += n_fl
        neg = lam < 0
        est[neg] = np.swapaxes(est[neg], -1, -2)
        return est

    def on_grid(self, grid: FrequencyGrid) -> SpectralField:
        """Estimate at the positive frequencies of ``grid``."""
        return SpectralField(grid, self.evaluate(grid.positive_freqs))


def kernel_spectral_estimate(x, bandwidth: float) -> tuple[SpectralField, KernelSpectralEstimate]:
    """Kernel estimate on ``G(n)`` plus the evaluator that produced it."""
    x = check_series(x)
    est = KernelSpectralEstimate(periodogram(x), bandwidth)
    return est.on_grid(FrequencyGrid(x.shape[0])), est


# --------------------------------------------------------------------------
# integrated periodograms


def integrated_periodogram(fld: SpectralField, spec: SpectralMeanSpec) -> np.ndarray:
    """
    Riemann sums ``2 pi / N_grid * sum_{l in G} phi_j(lam_l) A_{r_j s_j}(lam_l)``.

    The grid is summed in ``(lam, -lam)`` pairs using ``A(-lam) = A(lam)^T``,
    which makes the result exactly real whenever ``phi(-lam)`` is the
    conjugate of ``phi(lam)`` and the field is Hermitian. Batched fields
    return shape ``(..., J)``.
    """
    spec.check_dim(fld.dim)
    lam = fld.grid.positive_freqs
    r, s = spec.r, spec.s
    w_pos = spec.weights(lam)
    w_neg = spec.weights(-lam)
    a_rs = fld.values[..., :, r, s]  # (..., N, J)
    a_sr = fld.values[..., :, s, r]
    pair = w_pos.T * a_rs + w_neg.T * a_sr
    return (TWO_PI / fld.grid.n) * pair.sum(axis=-2)


def spectral_mean_true(
    f: Callable[[np.ndarray], np.ndarray],
    spec: SpectralMeanSpec,
    n_points: int = 4096,
) -> tuple[np.ndarray, float]:
    """
    Spectral means ``int phi_j f_{r_j s_j}`` of an analytic spectral density.

    Uses the periodic trapezoidal rule on ``n_points`` nodes. Returns the
    means and an error estimate (difference to the rule with half the nodes).
    """

    def rule(k: int) -> np.ndarray:
        lam = -np.pi + TWO_PI * np.arange(k) / k
        vals = f(lam)
        spec.check_dim(vals.shape[-1])
        integrand = spec.weights(lam) * vals[:, spec.r, spec.s].T
        return integrand.sum(axis=1) * (TWO_PI / k)

    full = rule(n_points)
    coarse = rule(n_points // 2)
    return full, float(np.max(np.abs(full - coarse)))


# --------------------------------------------------------------------------
# io


def read_series_csv(path) -> np.ndarray:
    """Read a comma-separated series, one column per component.

    A header row is detected (and skipped) when its first field is not a
    number.
    """
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    skip = 0
    try:
        float(first.split(",")[0])
    except ValueError:
        skip = 1
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2, encoding="utf-8")
    return check_series(data)
