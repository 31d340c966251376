"""Fast in-process invariant checks behind ``mfhb selftest``."""
from __future__ import annotations

import traceback

import numpy as np

from .complex_gaussian import from_real_rep, to_real_rep
from .engine import (
    MfhbConfig,
    builtin_cross_correlation,
    c_plus,
    g_plus_exact,
    g_star_exact,
    run_integrated,
    step2_residuals,
)
from .linalg import matrix_sqrt
from .models import generate, model1
from .rng import make_rng
from .spectral import (
    Constant,
    KernelSpectralEstimate,
    SpectralMeanSpec,
    integrated_periodogram,
    periodogram,
)

__all__ = ["CHECKS", "run_selftest"]


def _series(n=101, seed=7):
    x = generate(model1(), n, seed)
    return x - x.mean(axis=0)


def check_reflection():
    p = periodogram(_series())
    full = p.full()
    assert np.allclose(full, np.conj(np.swapaxes(full, -1, -2)), atol=1e-14)
    assert np.array_equal(full[::-1], np.swapaxes(full, -1, -2))


def check_real_rep_roundtrip():
    rng = make_rng(0, "selftest")
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    sigma = a @ a.conj().T
    gamma = 0.3 * (a @ a.T)
    s2, g2 = from_real_rep(to_real_rep(sigma, gamma))
    assert np.max(np.abs(s2 - sigma)) <= 1e-14 * max(1.0, np.abs(sigma).max())
    assert np.max(np.abs(g2 - gamma)) <= 1e-14 * max(1.0, np.abs(gamma).max())


def check_sqrt():
    rng = make_rng(1, "selftest")
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = a @ a.conj().T
    r = matrix_sqrt(h)
    assert np.linalg.norm(r @ r - h) <= 1e-9 * np.linalg.norm(h)


def check_riemann_identity():
    for n in (101, 100):
        x = generate(model1(), n, 3)
        p = periodogram(x)
        spec = SpectralMeanSpec([(Constant(1.0), 0, 0)])
        m = integrated_periodogram(p, spec)[0].real
        target = np.mean(x[:, 0] ** 2) - x[:, 0].mean() ** 2
        if n % 2 == 0:
            target += 2 * np.pi / n * p.values[-1, 0, 0].real
        assert abs(m - target) <= 1e-10 * max(1.0, abs(target))


def check_residual_identities():
    x = _series()
    est = KernelSpectralEstimate(periodogram(x), 0.2)
    res = step2_residuals(x, 8, est)
    eye = np.eye(x.shape[1])
    assert np.max(np.abs(res.U.values.mean(axis=0) - eye)) <= 1e-8
    assert np.allclose(res.I_tilde.values.mean(axis=0), res.f_hat_b.values, atol=1e-12)


def check_merged_psd():
    x = _series()
    spec, _ = builtin_cross_correlation(0, 0, 1)
    p = periodogram(x)
    est = KernelSpectralEstimate(p, 0.2)
    res = step2_residuals(x, 8, est)
    gs = g_star_exact(est.on_grid(p.grid), spec)
    gp = g_plus_exact(res, spec)
    cp = c_plus(res, spec)
    for g in (gs, gp):
        assert np.linalg.eigvalsh(g)[0] >= -1e-10 * np.abs(g).max()
    assert np.allclose(cp, cp.T)


def check_determinism():
    x = _series()
    spec, _ = builtin_cross_correlation(1, 0, 1)
    cfg = MfhbConfig(0.2, 8, 20, seed=11)
    a = run_integrated(x, spec, cfg).replicates
    b = run_integrated(x, spec, cfg).replicates
    assert np.array_equal(a, b)


CHECKS = {
    "hermitian and reflection symmetry": check_reflection,
    "real representation round trip": check_real_rep_roundtrip,
    "matrix square root": check_sqrt,
    "Riemann sum identity": check_riemann_identity,
    "residual mean identities": check_residual_identities,
    "merged matrices PSD": check_merged_psd,
    "seed determinism": check_determinism,
}


def run_selftest(verbose: bool = True) -> list[str]:
    """Run every check; returns the names of the failing ones."""
    failures = []
    for name, check in CHECKS.items():
        try:
            check()
            status = "ok"
        except Exception:  # noqa: BLE001 - report every failure
            failures.append(name)
            status = "FAIL"
            if verbose:
                traceback.print_exc()
        if verbose:
            print(f"{status:4}  {name}")
    return failures
