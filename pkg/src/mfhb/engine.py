"""
Multiple frequency hybrid bootstrap for spectral means and smooth functions.

Integrated periodograms
    Step I    pseudo periodograms ``I*`` drawn as complex Wishart matrices
              with scale ``f^`` at every Fourier frequency, giving ``V*``.
    Step II   frequency-domain residuals of all overlapping subsamples,
              convolved and rescaled by ``f^``, giving ``V+``.
    Step III  ``G° = G* + (G+ - C+)`` and ``V° = G°^{1/2} G*^{-1/2} V*``.

Smooth functions ``R = g(M)`` reuse Steps I to III and transport the
covariance through the Jacobian of ``g``.

``G*`` and ``G+`` are exact bootstrap moments computed in closed form.
Sums over the subsample grid run over ``G(b)``, so the zero frequency is
excluded. Subsample moments ``S_rsuw`` use the plain product without
conjugation.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._validation import check_series
from .complex_gaussian import (
    circular_factor,
    draw_circular,
    empirical_real_moments,
    real_to_complex,
    stack_real,
    to_real_rep,
)
from .exceptions import DegenerateMatrixError, StatisticUndefinedError
from .linalg import (
    clamp_eigenvalues,
    hermitian_eig,
    hermitize,
    matrix_inv_sqrt,
    matrix_sqrt,
    psd_project,
    spectral_floor,
)
from .rng import make_rng
from .spectral import (
    ComplexExponential,
    Constant,
    FrequencyGrid,
    KernelSpectralEstimate,
    SpectralField,
    SpectralMeanSpec,
    _outer,
    integrated_periodogram,
    periodogram,
    subsample_periodograms,
)

__all__ = [
    "BootstrapRun",
    "MergedMatrices",
    "MfhbConfig",
    "Residuals",
    "SmoothStatistic",
    "builtin_cross_correlation",
    "c_plus",
    "choose_b",
    "g_plus_exact",
    "g_star_exact",
    "merge_and_rescale",
    "run_integrated",
    "run_smooth",
    "step1_pseudo_periodograms",
    "step1_vstar",
    "step2_convolved_draw",
    "step2_residuals",
    "step2_vplus",
]

TWO_PI = 2.0 * np.pi
FLOOR_REL = 1e-10
PINV_REL = 1e-10


def choose_b(n: int) -> int:
    """Block length rule ``ceil(3 n^0.3)``."""
    n = int(n)
    if n < 16:
        raise ValueError("the block length rule needs n >= 16")
    return int(math.ceil(3.0 * n**0.3 - 1e-12))


@dataclass(frozen=True)
class MfhbConfig:
    """
    Bootstrap settings.

    Parameters
    ----------
    bandwidth : float
        Kernel bandwidth ``h`` of the spectral density estimate.
    block_length : int
        Subsample length ``b``.
    replicates : int
        Number of bootstrap replicates ``B``.
    seed : int
        Root seed; replicate ``i`` draws from ``make_rng(seed, "vstar", i)``.
    jacobian_mode : {"analytic", "finite_difference"}
        How the smooth path obtains the Jacobian of ``g``.
    step_rel : float
        Relative step of the central differences.
    threads : int
        Worker threads for replicate generation; results do not depend on it.
    """

    bandwidth: float
    block_length: int
    replicates: int = 300
    seed: int = 0
    jacobian_mode: str = "analytic"
    step_rel: float = 1e-6
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < float(self.bandwidth) < np.pi:
            raise ValueError("bandwidth must lie in (0, pi)")
        if int(self.block_length) < 4:
            raise ValueError("block length must be at least 4")
        if int(self.replicates) < 2:
            raise ValueError("need at least two replicates")
        if self.jacobian_mode not in ("analytic", "finite_difference"):
            raise ValueError("jacobian_mode must be 'analytic' or 'finite_difference'")
        if not self.step_rel > 0:
            raise ValueError("step_rel must be positive")
        if int(self.threads) < 1:
            raise ValueError("threads must be at least 1")

    def check_length(self, n: int) -> None:
        if int(self.block_length) > n:
            raise ValueError(f"block length {self.block_length} exceeds n={n}")
        if not TWO_PI / n < float(self.bandwidth):
            raise ValueError(f"bandwidth must exceed 2 pi / n = {TWO_PI / n:.4g}")

    def to_dict(self) -> dict:
        return {
            "bandwidth": float(self.bandwidth),
            "block_length": int(self.block_length),
            "replicates": int(self.replicates),
            "seed": self.seed,
            "jacobian_mode": self.jacobian_mode,
            "step_rel": float(self.step_rel),
        }


@dataclass(frozen=True, eq=False)
class MergedMatrices:
    """Real ``2J x 2J`` covariance matrices of Step III."""

    G_star: np.ndarray
    G_plus: np.ndarray
    C_plus: np.ndarray
    G_circ: np.ndarray
    clamp_report: int = 0


@dataclass(eq=False)
class BootstrapRun:
    """
    Replicates of ``V°`` (or ``W°``) with the matrices that produced them.

    ``first_stage`` keeps the Gaussian-only replicates ``V*`` (or ``W*``)
    before rescaling.
    """

    replicates: np.ndarray
    merged: MergedMatrices
    config: MfhbConfig
    point: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    first_stage: np.ndarray | None = None

    @property
    def n_replicates(self) -> int:
        return self.replicates.shape[0]

    def std(self, n: int | None = None) -> np.ndarray:
        """Replicate standard deviation of the real parts, divided by ``sqrt(n)`` if given."""
        sd = np.std(self.replicates.real, axis=0, ddof=1)
        return sd if n is None else sd / np.sqrt(n)


# --------------------------------------------------------------------------
# helpers


def _map_ordered(func: Callable, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def _weights_full(spec: SpectralMeanSpec, grid: FrequencyGrid):
    lam = grid.freqs
    return spec.weights(lam), spec.weights(-lam)


def _reflect(full: np.ndarray) -> np.ndarray:
    """Values at ``-lam`` for an array ordered as ``grid.indices``."""
    return full[..., ::-1, :, :]


def _field_as_evaluator(f_hat):
    if isinstance(f_hat, KernelSpectralEstimate):
        return f_hat.evaluate
    if callable(f_hat):
        return f_hat
    raise TypeError("f_hat must be a KernelSpectralEstimate or a callable")


# --------------------------------------------------------------------------
# Step I


def step1_pseudo_periodograms(
    f_hat: SpectralField, rng: np.random.Generator, count: int | None = None
) -> SpectralField:
    """
    Pseudo periodograms ``I*(lam_j) = d* d*^H`` with ``d* ~ N^c(0, f^(lam_j), 0)``.

    Draws are independent across the positive frequencies; negative ones are
    transposes. With ``count`` a batch of that many fields is returned.
    """
    factor = circular_factor(f_hat.values)
    shape = factor.shape[:-1] if count is None else (int(count),) + factor.shape[:-1]
    d = draw_circular(factor, rng.standard_normal(shape))
    return SpectralField(f_hat.grid, _outer(d))


def step1_vstar(I_star: SpectralField, f_hat: SpectralField, spec: SpectralMeanSpec) -> np.ndarray:
    """``V* = sqrt(n) (M(phi, I*) - M(phi, f^))``; batched input gives ``(..., J)``."""
    if I_star.grid.n != f_hat.grid.n:
        raise ValueError("I* and f^ live on different grids")
    n = f_hat.grid.n
    return np.sqrt(n) * (integrated_periodogram(I_star, spec) - integrated_periodogram(f_hat, spec))


def _sigma_gamma_pairs(spec, grid, a_same, a_cross, scale):
    """
    Combine per-frequency products into ``(Sigma, Gamma)``.

    ``a_same[j, k, l]`` multiplies ``phi_j(lam) conj(phi_k(lam))`` and
    ``a_cross[j, k, l]`` multiplies ``phi_j(lam) conj(phi_k(-lam))``.
    """
    wp, wm = _weights_full(spec, grid)
    wj = wp[:, None, :]
    sig = (wj * np.conj(wp)[None] * a_same + wj * np.conj(wm)[None] * a_cross).sum(-1)
    gam = (wj * wm[None] * a_same + wj * wp[None] * a_cross).sum(-1)
    return scale * sig, scale * gam


def g_star_exact(f_hat: SpectralField, spec: SpectralMeanSpec) -> np.ndarray:
    """Exact bootstrap covariance of ``(Re V*, Im V*)`` (complex Wishart identity)."""
    spec.check_dim(f_hat.dim)
    grid = f_hat.grid
    fp = f_hat.full()
    fm = _reflect(fp)
    r, s = spec.r, spec.s
    a_same = fp[:, r[:, None], r[None, :]] * fm[:, s[:, None], s[None, :]]
    a_cross = fp[:, r[:, None], s[None, :]] * fm[:, s[:, None], r[None, :]]
    sig, gam = _sigma_gamma_pairs(
        spec, grid, np.moveaxis(a_same, 0, -1), np.moveaxis(a_cross, 0, -1), TWO_PI**2 / grid.n
    )
    return to_real_rep(hermitize(sig), 0.5 * (gam + gam.T))


# --------------------------------------------------------------------------
# Step II


@dataclass(frozen=True, eq=False)
class Residuals:
    """
    Frequency-domain residuals of all ``n - b + 1`` subsamples.

    ``U`` holds ``f~^{-1/2} I_t f~^{-1/2}`` and ``I_tilde`` the rescaled
    matrices ``f^^{1/2} U_t f^^{1/2}``, both batched over ``t`` on ``G(b)``.
    """

    U: SpectralField
    I_tilde: SpectralField
    f_hat_b: SpectralField
    f_tilde: SpectralField
    n: int
    n_floored: int = 0

    @property
    def b(self) -> int:
        return self.U.grid.n

    @property
    def count(self) -> int:
        return len(self.U)

    @property
    def k(self) -> int:
        return self.n // self.b


def step2_residuals(x, b: int, f_hat) -> Residuals:
    """
    Residual matrices ``U_t`` and their rescaled versions on ``G(b)``.

    ``f_hat`` is a :class:`KernelSpectralEstimate` (or any callable returning
    matrices at given frequencies). The subsample mean ``f~`` is floored at
    ``1e-10 * trace / m`` before inversion; the number of floored
    frequencies is recorded.
    """
    x = check_series(x)
    subs = subsample_periodograms(x, b)
    grid = subs.grid
    f_tilde = hermitize(subs.values.mean(axis=0))
    f_tilde, n_fl = clamp_eigenvalues(f_tilde, spectral_floor(f_tilde, FLOOR_REL))
    inv_half = matrix_inv_sqrt(f_tilde, 0.0)
    u = hermitize(inv_half @ subs.values @ inv_half)
    fb = _field_as_evaluator(f_hat)(grid.positive_freqs)
    root = matrix_sqrt(fb)
    i_tilde = hermitize(root @ u @ root)
    return Residuals(
        U=SpectralField(grid, u),
        I_tilde=SpectralField(grid, i_tilde),
        f_hat_b=SpectralField(grid, fb),
        f_tilde=SpectralField(grid, f_tilde),
        n=x.shape[0],
        n_floored=int(n_fl),
    )


def step2_convolved_draw(res: Residuals, k: int, rng: np.random.Generator, indices=None) -> SpectralField:
    """
    ``I+ = k^-1 sum_l I~_{i_l}`` with ``i_1..i_k`` uniform over the subsamples.

    ``indices`` forces the draw (for testing).
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    idx = rng.integers(0, res.count, size=k) if indices is None else np.asarray(indices)
    return SpectralField(res.U.grid, res.I_tilde.values[idx].mean(axis=0))


def step2_vplus(I_plus: SpectralField, res: Residuals, spec: SpectralMeanSpec, k: int) -> np.ndarray:
    """``V+ = sqrt(k b) (M_{G(b)}(phi, I+) - M_{G(b)}(phi, f^))``."""
    b = res.b
    return np.sqrt(k * b) * (
        integrated_periodogram(I_plus, spec) - integrated_periodogram(res.f_hat_b, spec)
    )


def _centered_subsamples(res: Residuals) -> SpectralField:
    return SpectralField(res.U.grid, res.I_tilde.values - res.f_hat_b.values[None])


def g_plus_exact(res: Residuals, spec: SpectralMeanSpec) -> np.ndarray:
    """
    Exact bootstrap covariance of ``(Re V+, Im V+)``.

    ``b`` times the uncentered real second moments of the per-subsample
    vectors ``y_t = M_{G(b)}(phi, I~_t - f^)``; independent of ``k``.
    """
    if res.count < 2:
        raise ValueError("need at least two subsamples")
    spec.check_dim(res.U.dim)
    y = integrated_periodogram(_centered_subsamples(res), spec)
    return res.b * empirical_real_moments(y, centered=False)


def c_plus(res: Residuals, spec: SpectralMeanSpec) -> np.ndarray:
    """
    Same-frequency part ``C+`` of ``G+``, built from ``S_rsuw``.

    ``S_rsuw(lam) = mean_t D_rs(lam) D_uw(lam)`` with ``D_t = I~_t - f^``.
    """
    spec.check_dim(res.U.dim)
    grid = res.U.grid
    d = _centered_subsamples(res).full()  # (T, 2N, m, m)
    r, s = spec.r, spec.s
    d_rs = d[:, :, r, s]  # (T, L, J)
    a_same = np.einsum("tlj,tlk->jkl", d_rs, d[:, :, s, r]) / d.shape[0]
    a_cross = np.einsum("tlj,tlk->jkl", d_rs, d[:, :, r, s]) / d.shape[0]
    sig, gam = _sigma_gamma_pairs(spec, grid, a_same, a_cross, TWO_PI**2 / grid.n)
    return to_real_rep(sig, 0.5 * (gam + gam.T))


# --------------------------------------------------------------------------
# Step III


def merge_matrices(G_star, G_plus, C_plus) -> MergedMatrices:
    raw = G_star + G_plus - C_plus
    raw = 0.5 * (raw + raw.T)
    w, _ = hermitian_eig(raw)
    tol = 1e-13 * max(abs(w[0]), abs(w[-1]), np.finfo(float).tiny)
    clamped = int(np.sum(w < -tol))
    return MergedMatrices(G_star, G_plus, C_plus, psd_project(raw), clamped)


def _rescaler(target: np.ndarray, source: np.ndarray, what: str) -> np.ndarray:
    try:
        inv = matrix_inv_sqrt(source, PINV_REL)
    except DegenerateMatrixError:
        raise DegenerateMatrixError(f"degenerate {what} covariance") from None
    return matrix_sqrt(target) @ inv


def merge_and_rescale(v_star, G_star, G_plus, C_plus) -> tuple[np.ndarray, MergedMatrices]:
    """
    ``V° = G°^{1/2} G*^{-1/2} V*`` replicate by replicate.

    Returns the complex ``(B, J)`` replicates and the merged matrices.
    """
    v_star = np.atleast_2d(v_star)
    merged = merge_matrices(G_star, G_plus, C_plus)
    t = _rescaler(merged.G_circ, G_star, "first-stage")
    return real_to_complex(stack_real(v_star) @ t.T), merged


# --------------------------------------------------------------------------
# smooth statistics


class SmoothStatistic:
    """
    A function ``g: C^J -> C^L`` applied to spectral means.

    Parameters
    ----------
    func : callable
        Maps complex arrays ``(..., J)`` to ``(..., L)``.
    n_in, n_out : int
        ``J`` and ``L``.
    derivative : callable, optional
        Complex derivative ``dg/dm`` with shape ``(L, J)`` at a complex point,
        valid when ``g`` is holomorphic. Used for the analytic Jacobian.
    check : callable, optional
        Raises :class:`StatisticUndefinedError` where ``g`` is undefined.
    """

    def __init__(self, func, n_in: int, n_out: int, derivative=None, check=None, name="custom"):
        self.func = func
        self.n_in = int(n_in)
        self.n_out = int(n_out)
        self.derivative = derivative
        self.check = check
        self.name = name

    def __call__(self, m) -> np.ndarray:
        return np.asarray(self.func(np.asarray(m, dtype=complex)))

    def real(self, x) -> np.ndarray:
        """The accompanying real map ``R^{2J} -> R^{2L}``."""
        return stack_real(self(real_to_complex(x)))

    def jacobian(self, x, mode: str = "analytic", step_rel: float = 1e-6) -> np.ndarray:
        """Real ``2L x 2J`` Jacobian at the real point ``x``."""
        x = np.asarray(x, dtype=float)
        if self.check is not None:
            self.check(real_to_complex(x))
        if mode == "analytic" and self.derivative is not None:
            c = np.asarray(self.derivative(real_to_complex(x)), dtype=complex)
            return np.block([[c.real, -c.imag], [c.imag, c.real]])
        return finite_difference_jacobian(self.real, x, step_rel)


def finite_difference_jacobian(func, x, step_rel: float = 1e-6) -> np.ndarray:
    """Central differences with step ``step_rel * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        step = step_rel * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(func(x + e)) - np.asarray(func(x - e))) / (2 * step))
    return np.stack(cols, axis=-1)


def builtin_cross_correlation(h: int, r: int, s: int):
    """
    Spectral means and map for the lag-``h`` cross-correlation.

    ``M = (M(e^{ih.}, I_rs), M(1, I_rr), M(1, I_ss))`` and
    ``g(m) = m_1 / sqrt(m_2 m_3)``.
    """
    spec = SpectralMeanSpec(
        [(ComplexExponential(int(h)), r, s), (Constant(1.0), r, r), (Constant(1.0), s, s)]
    )

    def func(m):
        return (m[..., 0] / np.sqrt(m[..., 1] * m[..., 2]))[..., None]

    def derivative(m):
        q = m[1] * m[2]
        root = np.sqrt(q)
        g = m[0] / root
        return np.array([[1.0 / root, -0.5 * g / m[1], -0.5 * g / m[2]]])

    def check(m):
        if not np.real(m[1] * m[2]) > 0:
            raise StatisticUndefinedError("statistic undefined at M^: m2 * m3 must be positive")

    return spec, SmoothStatistic(func, 3, 1, derivative, check, f"cross_correlation({h},{r},{s})")


# --------------------------------------------------------------------------
# end to end


def _prepare(x, spec: SpectralMeanSpec, cfg: MfhbConfig):
    x = check_series(x)
    n = x.shape[0]
    cfg.check_length(n)
    spec.check_dim(x.shape[1])
    pgram = periodogram(x)
    est = KernelSpectralEstimate(pgram, cfg.bandwidth)
    f_field = est.on_grid(pgram.grid)
    return x, pgram, est, f_field


def _draw_vstar(f_field: SpectralField, spec: SpectralMeanSpec, cfg: MfhbConfig) -> np.ndarray:
    factor = circular_factor(f_field.values)
    shape = factor.shape[:-1]

    def one(i):
        return make_rng(cfg.seed, "vstar", i).standard_normal(shape)

    z = np.stack(_map_ordered(one, range(int(cfg.replicates)), int(cfg.threads)))
    i_star = SpectralField(f_field.grid, _outer(draw_circular(factor, z)))
    return step1_vstar(i_star, f_field, spec)


def _stages(x, spec, cfg):
    t0 = time.perf_counter()
    x, pgram, est, f_field = _prepare(x, spec, cfg)
    res = step2_residuals(x, int(cfg.block_length), est)
    g_star = g_star_exact(f_field, spec)
    g_plus = g_plus_exact(res, spec)
    cp = c_plus(res, spec)
    v_star = _draw_vstar(f_field, spec, cfg)
    diag = {
        "n": x.shape[0],
        "b": res.b,
        "k": res.k,
        "subsamples": res.count,
        "f_hat_floored": est.n_floored,
        "f_tilde_floored": res.n_floored,
    }
    return x, pgram, f_field, g_star, g_plus, cp, v_star, diag, t0


def run_integrated(x, spec: SpectralMeanSpec, cfg: MfhbConfig) -> BootstrapRun:
    """Bootstrap replicates of ``V_n = sqrt(n)(M_n - M)`` for a centered series."""
    x, pgram, f_field, g_star, g_plus, cp, v_star, diag, t0 = _stages(x, spec, cfg)
    v_circ, merged = merge_and_rescale(v_star, g_star, g_plus, cp)
    diag["clamped"] = merged.clamp_report
    diag["seconds"] = time.perf_counter() - t0
    point = integrated_periodogram(pgram, spec)
    return BootstrapRun(v_circ, merged, cfg, point, diag, v_star)


def run_smooth(x, spec: SpectralMeanSpec, g: SmoothStatistic, cfg: MfhbConfig) -> BootstrapRun:
    """Bootstrap replicates of ``W_n = sqrt(n)(g(M_n) - g(M))`` for a centered series."""
    if len(spec) != g.n_in:
        raise ValueError(f"statistic expects {g.n_in} spectral means, spec has {len(spec)}")
    x, pgram, f_field, g_star, g_plus, cp, v_star, diag, t0 = _stages(x, spec, cfg)
    n = x.shape[0]
    merged = merge_matrices(g_star, g_plus, cp)
    m_hat = integrated_periodogram(f_field, spec)
    jac = g.jacobian(stack_real(m_hat), cfg.jacobian_mode, cfg.step_rel)
    m_star = m_hat[None, :] + v_star / np.sqrt(n)
    w_star = np.sqrt(n) * (stack_real(g(m_star)) - stack_real(g(m_hat))[None, :])
    gt_star = empirical_real_moments(real_to_complex(w_star), centered=True)
    gt_circ = psd_project(jac @ merged.G_circ @ jac.T)
    t = _rescaler(gt_circ, gt_star, "bootstrap statistic")
    w_circ = real_to_complex(w_star @ t.T)
    diag["clamped"] = merged.clamp_report
    diag["seconds"] = time.perf_counter() - t0
    point = g(integrated_periodogram(pgram, spec))
    return BootstrapRun(w_circ, merged, cfg, point, diag, real_to_complex(w_star))
