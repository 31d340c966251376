import numpy as np
import pytest

from mfhb.engine import builtin_cross_correlation
from mfhb.exceptions import MFHBError, UnstableModelError
from mfhb.models import GaussianInnovations, VarmaSpec, generate_many, ma1_example, model1, model2
from mfhb.oracle import (
    autocovariance,
    lemma21_covariance_gaussian,
    ma_infinity_coefficients,
    sigma1_gamma1,
    tau_squared_general,
    tau_squared_ma1,
    varma_spectrum,
)
from mfhb.spectral import (
    Constant,
    SpectralMeanSpec,
    integrated_periodogram,
    periodogram,
    spectral_mean_true,
)


def test_tau_ma1_examples():
    assert tau_squared_ma1(3, 3) == 1
    assert np.isclose(tau_squared_ma1(6, 6), 5 / 3)
    assert np.isclose(tau_squared_ma1(3, 6), 4 / 3)
    with pytest.raises(ValueError):
        tau_squared_ma1(0.5, 3)


@pytest.mark.parametrize("kind,eta", [("gaussian", 3.0), ("laplace", 6.0), ("uniform", 1.8)])
def test_tau_general_reproduces_ma1(kind, eta):
    tau, tail = tau_squared_general(ma1_example(kind), 0, 0, 1, truncation=10)
    assert abs(tau - tau_squared_ma1(eta, eta)) < 1e-10
    assert tail == 0


def test_tau_general_white_noise():
    wn = VarmaSpec([], [], GaussianInnovations(np.array([[1.0, 0.0], [0.0, 4.0]])))
    tau, _ = tau_squared_general(wn, 0, 0, 1, truncation=5)
    assert np.isclose(tau, 1.0)


@pytest.mark.parametrize("h", [-1, 0, 1])
def test_tau_general_matches_delta_method_on_sigma1(h):
    m1 = model1()
    f = varma_spectrum(m1)
    spec, g = builtin_cross_correlation(h, 0, 1)
    sig, gam, _ = sigma1_gamma1(f, spec)
    mvec, _ = spectral_mean_true(f, spec)
    jac = g.jacobian(np.concatenate([mvec.real, mvec.imag]))[0, :3]
    delta = float(jac @ sig.real @ jac)
    tau, tail = tau_squared_general(m1, h, 0, 1, truncation=150)
    assert tail < 1e-10
    assert abs(tau - delta) < 1e-6 * tau


def test_sigma1_flat_univariate():
    sigma2 = 1.7
    wn = VarmaSpec([], [], GaussianInnovations([[sigma2]]))
    sig, gam, err = sigma1_gamma1(varma_spectrum(wn), SpectralMeanSpec([(Constant(1.0), 0, 0)]))
    assert np.isclose(sig[0, 0], 2 * sigma2**2)
    assert np.isclose(gam[0, 0], 2 * sigma2**2)
    assert err < 1e-12


def test_sigma1_real_case_and_structure():
    f = varma_spectrum(model1())
    spec, _ = builtin_cross_correlation(2, 0, 1)
    sig, gam, err = sigma1_gamma1(f, spec)
    assert np.allclose(sig, gam, atol=1e-10)
    assert np.allclose(sig, sig.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(sig)[0] > -1e-10
    sig2, _, _ = sigma1_gamma1(f, spec, n_points=16384)
    assert np.max(np.abs(sig2 - sig)) < 1e-8 * np.abs(sig).max()
    assert err < 1e-8 * np.abs(sig).max()


def test_sigma1_complex_weights_give_distinct_gamma():
    f = varma_spectrum(model1())
    spec = SpectralMeanSpec([(Constant(1j), 0, 1)])  # phi(-lam) != conj(phi(lam))
    sig, gam, _ = sigma1_gamma1(f, spec)
    assert not np.allclose(sig, gam)


def test_sigma1_against_monte_carlo():
    m1 = model1()
    f = varma_spectrum(m1)
    spec, _ = builtin_cross_correlation(0, 0, 1)
    sig, _, _ = sigma1_gamma1(f, spec)
    mtrue, _ = spectral_mean_true(f, spec)
    n, reps = 512, 2000
    xs = generate_many(m1, n, range(reps))
    mn = integrated_periodogram(periodogram(xs), spec).real
    v = np.sqrt(n) * (mn - mtrue.real)
    emp = np.cov(v, rowvar=False)
    assert np.allclose(emp, sig.real, rtol=0.15, atol=0.05 * np.abs(sig).max())


def test_ma_infinity_coefficients():
    m1 = model1()
    psi = ma_infinity_coefficients(m1)
    assert np.allclose(psi[3], np.linalg.matrix_power(m1.ar[0], 3))
    assert np.max(np.abs(psi[-1])) < 1e-10
    ma = ma1_example()
    psi = ma_infinity_coefficients(ma)
    assert len(psi) == 2 and np.array_equal(psi[1], ma.ma[0])
    bad = VarmaSpec([np.eye(2)], [], GaussianInnovations(np.eye(2)))
    with pytest.raises(UnstableModelError):
        ma_infinity_coefficients(bad)
    with pytest.raises(UnstableModelError):
        varma_spectrum(bad)


def test_spectrum_integrates_to_gamma0():
    m1 = model1()
    f = varma_spectrum(m1)
    lam = -np.pi + 2 * np.pi * np.arange(4096) / 4096
    g0 = f(lam).sum(0).real * 2 * np.pi / 4096
    assert np.allclose(g0, autocovariance(m1, 0), atol=1e-9)
    vals = f(np.array([0.4]))
    assert np.allclose(f(np.array([-0.4]))[0], vals[0].T)


def test_bekk_has_no_closed_form():
    with pytest.raises(MFHBError):
        varma_spectrum(model2())


def test_lemma21_examples():
    f = varma_spectrum(model1())
    assert lemma21_covariance_gaussian(f, 0.3, 0.5, 0, 1, 0, 1) == 0
    lam = 0.7
    fp, fm = f(np.array([lam]))[0], f(np.array([-lam]))[0]
    val = lemma21_covariance_gaussian(f, lam, lam, 0, 1, 1, 0)
    assert np.isclose(val, fp[0, 1] * fm[1, 0])
    at_pi = lemma21_covariance_gaussian(f, np.pi, np.pi, 0, 0, 0, 0)
    fpi = f(np.array([np.pi]))[0]
    assert np.isclose(at_pi, 2 * fpi[0, 0] ** 2)
    with pytest.raises(MFHBError, match="S1 unavailable"):
        lemma21_covariance_gaussian(varma_spectrum(ma1_example("laplace")), lam, lam, 0, 0, 0, 0)


def test_lemma21_against_periodogram_monte_carlo():
    m1 = model1()
    f = varma_spectrum(m1)
    n, reps, j = 256, 5000, 20
    lam = 2 * np.pi * j / n
    xs = generate_many(m1, n, range(100, 100 + reps))
    vals = periodogram(xs).values[:, j - 1]
    for r, s, v, w in [(0, 1, 0, 1), (0, 0, 1, 1), (0, 1, 1, 0)]:
        a = vals[:, r, s] - vals[:, r, s].mean()
        b = vals[:, v, w] - vals[:, v, w].mean()
        z = a * np.conj(b)
        emp, se = z.mean(), z.std() / np.sqrt(reps)
        pred = lemma21_covariance_gaussian(f, lam, lam, r, s, v, w)
        assert abs(emp - pred) <= 3 * se + 0.05 * abs(pred)
