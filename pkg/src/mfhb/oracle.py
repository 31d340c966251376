"""
Analytic ground truth for tests and acceptance checks.

Nothing here is used by the bootstrap itself. Spectra of VARMA models are
evaluated through the transfer function

    f(lam) = (2 pi)^-1 Psi(e^{-i lam}) S Psi(e^{-i lam})^H,
    Psi(z) = Phi(z)^-1 Theta(z),

with ``Phi(z) = I - sum Phi_i z^i`` and ``Theta(z) = I + sum Theta_j z^j``.
Cross-covariances follow ``gamma_rs(h) = Cov(X_r(t+h), X_s(t))`` and
fourth-order cumulants ``c_abcd(h1, h2, h3) = cum(X_a(t+h1), X_b(t+h2),
X_c(t+h3), X_d(t))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import MFHBError, UnstableModelError
from .models import GaussianInnovations, IIDScaledInnovations, VarmaSpec
from .spectral import SpectralMeanSpec

__all__ = [
    "AnalyticSpectrum",
    "autocovariance",
    "lemma21_covariance_gaussian",
    "ma_infinity_coefficients",
    "sigma1_gamma1",
    "tau_squared_general",
    "tau_squared_ma1",
    "varma_spectrum",
]

TWO_PI = 2.0 * np.pi


def _innovation_cov(model: VarmaSpec) -> np.ndarray:
    innov = model.innovation
    if isinstance(innov, (GaussianInnovations, IIDScaledInnovations)):
        return innov.cov
    raise MFHBError(
        f"{type(innov).__name__} has no closed-form second-order structure"
    )


def _companion_radius(model: VarmaSpec) -> float:
    p, m = len(model.ar), model.dim
    if p == 0:
        return 0.0
    comp = np.zeros((p * m, p * m))
    comp[:m] = np.hstack(model.ar)
    comp[m:, :-m] = np.eye((p - 1) * m)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


@dataclass(frozen=True, eq=False)
class AnalyticSpectrum:
    """Spectral density of a VARMA model with i.i.d. innovations."""

    model: VarmaSpec

    def __post_init__(self):
        if _companion_radius(self.model) >= 1.0:
            raise UnstableModelError("autoregressive part is not stable")
        _innovation_cov(self.model)

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def gaussian(self) -> bool:
        innov = self.model.innovation
        return isinstance(innov, GaussianInnovations) or (
            isinstance(innov, IIDScaledInnovations) and innov.marginal == "gaussian"
        )

    def transfer(self, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        m = self.dim
        z = np.exp(-1j * lam)[:, None, None]
        phi = np.broadcast_to(np.eye(m, dtype=complex), (lam.size, m, m)).copy()
        for i, a in enumerate(self.model.ar, start=1):
            phi = phi - a * z**i
        theta = np.broadcast_to(np.eye(m, dtype=complex), (lam.size, m, m)).copy()
        for j, a in enumerate(self.model.ma, start=1):
            theta = theta + a * z**j
        return np.linalg.solve(phi, theta)

    def __call__(self, lam) -> np.ndarray:
        """``f(lam)`` with shape ``(len(lam), m, m)``."""
        h = self.transfer(lam)
        cov = _innovation_cov(self.model)
        f = h @ cov @ np.conj(np.swapaxes(h, -1, -2)) / TWO_PI
        return 0.5 * (f + np.conj(np.swapaxes(f, -1, -2)))

    def to_dict(self) -> dict:
        return {"model": self.model.to_dict()}


def varma_spectrum(model: VarmaSpec) -> AnalyticSpectrum:
    return AnalyticSpectrum(model)


def ma_infinity_coefficients(model: VarmaSpec, tol: float = 1e-12, max_terms: int = 100_000):
    """
    Moving-average weights ``Psi_0 = I, Psi_1, ...`` of a stable VARMA model.

    The series is cut after the first index ``K`` beyond the MA order with
    ``max_{k >= K} ||Psi_k|| < tol`` checked over ``p`` consecutive terms.
    Returns an array of shape ``(K, m, m)``.
    """
    if _companion_radius(model) >= 1.0:
        raise UnstableModelError("autoregressive part is not stable")
    m, p, q = model.dim, len(model.ar), len(model.ma)
    psi = [np.eye(m)]
    quiet = 0
    for k in range(1, max_terms):
        nxt = model.ma[k - 1].copy() if k <= q else np.zeros((m, m))
        for i in range(1, min(p, k) + 1):
            nxt += model.ar[i - 1] @ psi[k - i]
        psi.append(nxt)
        if k > q:
            quiet = quiet + 1 if np.max(np.abs(nxt)) < tol else 0
            if quiet >= max(p, 1):
                return np.array(psi[: len(psi) - quiet])
    raise UnstableModelError("MA(infinity) weights did not decay")


def _weights_on(spec: SpectralMeanSpec, lam: np.ndarray):
    return spec.weights(lam), spec.weights(-lam)


def sigma1_gamma1(f, spec: SpectralMeanSpec, n_points: int = 8192):
    """
    Gaussian part ``(Sigma_1, Gamma_1)`` of the limiting law of ``V_n``.

    Computed with the periodic trapezoidal rule on ``n_points`` nodes.
    Returns ``(sigma1, gamma1, err)`` where ``err`` is the largest change
    relative to the rule with half the nodes.
    """

    def rule(k: int):
        lam = -np.pi + TWO_PI * np.arange(k) / k
        fp = f(lam)
        fm = f(-lam)
        spec.check_dim(fp.shape[-1])
        r, s = spec.r, spec.s
        wp, wm = _weights_on(spec, lam)
        # integrand arrays of shape (J, J, K)
        a1 = fp[:, r[:, None], r[None, :]] * fm[:, s[:, None], s[None, :]]
        a2 = fp[:, r[:, None], s[None, :]] * fm[:, s[:, None], r[None, :]]
        a1 = np.moveaxis(a1, 0, -1)
        a2 = np.moveaxis(a2, 0, -1)
        wj = wp[:, None, :]
        sig = wj * np.conj(wp)[None] * a1 + wj * np.conj(wm)[None] * a2
        gam = wj * wm[None] * a1 + wj * wp[None] * a2
        scale = TWO_PI * TWO_PI / k
        return scale * sig.sum(-1), scale * gam.sum(-1)

    sig, gam = rule(n_points)
    sig_c, gam_c = rule(n_points // 2)
    err = float(max(np.max(np.abs(sig - sig_c)), np.max(np.abs(gam - gam_c))))
    return sig, gam, err


def tau_squared_ma1(eta1: float, eta2: float) -> float:
    """Limiting variance of ``sqrt(n) rho_12(0)`` for the bivariate MA(1) example."""
    if eta1 < 1 or eta2 < 1:
        raise ValueError("kurtosis must be at least 1")
    return 1.0 + (eta1 - 3.0) / 9.0 + (eta2 - 3.0) / 9.0


class _LinearMoments:
    """Second and fourth-order structure of ``X = sum Psi_k L z(t-k)``."""

    def __init__(self, model: VarmaSpec, tol: float):
        innov = model.innovation
        cov = _innovation_cov(model)
        chol = np.linalg.cholesky(cov)
        psi = ma_infinity_coefficients(model, tol)
        self.w = psi @ chol  # (K, m, m), columns index the z components
        if isinstance(innov, IIDScaledInnovations):
            self.kappa = np.full(model.dim, innov.kurtosis - 3.0)
        else:
            self.kappa = np.zeros(model.dim)
        self.k = self.w.shape[0]

    def _shift(self, h: int) -> np.ndarray:
        """``W_{k+h}`` for ``k = 0..K-1`` (zeros outside the support)."""
        out = np.zeros_like(self.w)
        lo, hi = max(0, -h), min(self.k, self.k - h)
        if lo < hi:
            out[lo:hi] = self.w[lo + h : hi + h]
        return out

    def gamma(self, h: int) -> np.ndarray:
        return np.einsum("kap,kbp->ab", self._shift(h), self.w)

    def cum(self, a: int, b: int, c: int, d: int, h1: int, h2: int, h3: int) -> float:
        if not np.any(self.kappa):
            return 0.0
        w1, w2, w3 = self._shift(h1), self._shift(h2), self._shift(h3)
        prod = w1[:, a, :] * w2[:, b, :] * w3[:, c, :] * self.w[:, d, :]
        return float(np.sum(prod.sum(axis=0) * self.kappa))


def autocovariance(model: VarmaSpec, h: int, tol: float = 1e-12) -> np.ndarray:
    """``Gamma(h) = Cov(X(t+h), X(t))`` from the MA(infinity) weights."""
    return _LinearMoments(model, tol).gamma(int(h))


def tau_squared_general(
    model: VarmaSpec, h: int, r: int, s: int, truncation: int = 200, tol: float = 1e-12
) -> tuple[float, float]:
    """
    Limiting variance of ``sqrt(n)(rho_rs(h)^ - rho_rs(h))`` for a linear process.

    The innovations must be Gaussian or i.i.d. scaled (independent components
    with known kurtosis). The sum over lags runs over ``|j| <= truncation``.
    Returns ``(tau2, tail)`` where ``tail`` is the absolute contribution of
    the lags ``truncation < |j| <= 2 truncation``, an estimate of the
    truncation error.
    """
    lm = _LinearMoments(model, tol)
    m = model.dim
    if not (0 <= r < m and 0 <= s < m):
        raise ValueError("component index out of range")
    g0 = lm.gamma(0)
    grr, gss = g0[r, r], g0[s, s]
    norm = np.sqrt(grr * gss)
    cache: dict[int, np.ndarray] = {}

    def rho(a: int, b: int, lag: int) -> float:
        if lag not in cache:
            cache[lag] = lm.gamma(lag)
        return cache[lag][a, b] / np.sqrt(g0[a, a] * g0[b, b])

    rh = rho(r, s, h)

    def term(j: int) -> float:
        t = rho(r, r, j) * rho(s, s, j) + rho(r, s, j + h) * rho(s, r, j - h)
        t += lm.cum(r, s, r, s, j, j - h, h) / (grr * gss)
        t += 0.5 * rh**2 * (rho(r, r, j) ** 2 + rho(s, s, j) ** 2 + 2 * rho(r, s, j) ** 2)
        t -= 2 * rh * (rho(r, r, j) * rho(s, r, j - h) + rho(r, s, j) * rho(s, s, j - h))
        t += 0.25 * rh**2 * (
            lm.cum(r, r, r, r, j, j, 0) / grr**2
            + lm.cum(s, s, s, s, j, j, 0) / gss**2
            + 2 * lm.cum(r, r, s, s, j, j, 0) / (grr * gss)
        )
        t -= rh / norm * (
            lm.cum(r, s, r, r, j, j - h, 0) / grr + lm.cum(r, s, s, s, j, j - h, 0) / gss
        )
        return float(t)

    total = sum(term(j) for j in range(-truncation, truncation + 1))
    outer = range(truncation + 1, 2 * truncation + 1)
    tail = sum(abs(term(j)) + abs(term(-j)) for j in outer)
    if not np.isfinite(total):
        raise UnstableModelError("tau^2 series is not summable")
    return float(total), float(tail)


def lemma21_covariance_gaussian(
    f: AnalyticSpectrum, lam_j: float, lam_k: float, r: int, s: int, v: int, w: int
) -> complex:
    """
    Leading-order ``Cov(I_rs(lam_j), I_vw(lam_k))`` for a Gaussian process.

    ``f_rv(lam) f_sw(-lam)`` when the frequencies coincide, plus
    ``f_rw(lam) f_sv(lam)`` when they coincide at 0 or pi.
    """
    if not f.gaussian:
        raise MFHBError("S1 unavailable: the cumulant spectrum is only zero for Gaussian models")
    if not np.isclose(lam_j, lam_k, atol=1e-12):
        return 0.0 + 0.0j
    fp = f(np.array([lam_j]))[0]
    fm = f(np.array([-lam_j]))[0]
    out = fp[r, v] * fm[s, w]
    if np.isclose(lam_j, 0.0, atol=1e-12) or np.isclose(abs(lam_j), np.pi, atol=1e-12):
        out += fp[r, w] * fp[s, v]
    return complex(out)
