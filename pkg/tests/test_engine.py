import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mfhb.complex_gaussian import empirical_real_moments, stack_real
from mfhb.engine import (
    MfhbConfig,
    Residuals,
    SmoothStatistic,
    builtin_cross_correlation,
    c_plus,
    choose_b,
    finite_difference_jacobian,
    g_plus_exact,
    g_star_exact,
    merge_and_rescale,
    merge_matrices,
    run_integrated,
    run_smooth,
    step1_pseudo_periodograms,
    step1_vstar,
    step2_convolved_draw,
    step2_residuals,
    step2_vplus,
)
from mfhb.exceptions import DegenerateMatrixError, StatisticUndefinedError
from mfhb.models import generate, model1
from mfhb.rng import make_rng
from mfhb.spectral import (
    Constant,
    FrequencyGrid,
    KernelSpectralEstimate,
    SpectralField,
    SpectralMeanSpec,
    integrated_periodogram,
    periodogram,
)


@pytest.fixture(scope="module")
def series():
    x = generate(model1(), 128, 5)
    return x - x.mean(axis=0)


@pytest.fixture(scope="module")
def fitted(series):
    p = periodogram(series)
    est = KernelSpectralEstimate(p, 0.2)
    return p, est, est.on_grid(p.grid)


@pytest.fixture(scope="module")
def residuals(series, fitted):
    return step2_residuals(series, 10, fitted[1])


# ---------------------------------------------------------------- block rule


def test_choose_b_examples():
    assert choose_b(100) == 12
    assert choose_b(1000) == 24
    assert choose_b(512) == 20
    with pytest.raises(ValueError):
        choose_b(10)


@given(st.integers(16, 100000), st.integers(0, 1000))
def test_choose_b_monotone(n, d):
    assert choose_b(n) <= choose_b(n + d)
    assert choose_b(n) <= n


def test_config_validation():
    with pytest.raises(ValueError):
        MfhbConfig(0.0, 8)
    with pytest.raises(ValueError):
        MfhbConfig(0.1, 2)
    with pytest.raises(ValueError):
        MfhbConfig(0.1, 8, jacobian_mode="other")
    cfg = MfhbConfig(0.1, 80)
    with pytest.raises(ValueError, match="exceeds"):
        cfg.check_length(50)
    with pytest.raises(ValueError, match="bandwidth"):
        MfhbConfig(0.05, 8).check_length(100)


# ---------------------------------------------------------------- step I


def test_pseudo_periodogram_wishart_moments(fitted):
    _, _, f = fitted
    small = SpectralField(FrequencyGrid(12), f.values[:6])
    draws = step1_pseudo_periodograms(small, make_rng(1, "t"), count=40000).values
    assert np.allclose(draws.mean(0), small.values, atol=0.03 * np.abs(small.values).max())
    var01 = np.mean(np.abs(draws[..., 0, 1] - small.values[None, :, 0, 1]) ** 2, axis=0)
    pred = (small.values[:, 0, 0] * small.values[:, 1, 1]).real
    assert np.allclose(var01, pred, rtol=0.05)
    assert np.allclose(draws, np.conj(np.swapaxes(draws, -1, -2)))


def test_vstar_zero_at_fhat_and_centered(fitted):
    _, _, f = fitted
    spec, _ = builtin_cross_correlation(1, 0, 1)
    assert np.allclose(step1_vstar(f, f, spec), 0, atol=1e-13)
    v = step1_vstar(step1_pseudo_periodograms(f, make_rng(2, "t"), 4000), f, spec)
    se = v.real.std(0) / np.sqrt(4000)
    assert np.all(np.abs(v.real.mean(0)) < 4 * se)
    assert np.max(np.abs(v.imag)) < 1e-12


@pytest.mark.parametrize("n", [64, 65])
def test_g_star_flat_univariate(n):
    sigma2 = 2.5
    grid = FrequencyGrid(n)
    f = SpectralField(grid, np.full((grid.half, 1, 1), sigma2 / (2 * np.pi), dtype=complex))
    g = g_star_exact(f, SpectralMeanSpec([(Constant(1.0), 0, 0)]))
    factor = 1.0 if n % 2 == 0 else (n - 1) / n
    assert np.isclose(g[0, 0], 2 * sigma2**2 * factor, rtol=1e-12)
    assert np.allclose(g[1:, :], 0, atol=1e-14) and np.allclose(g[:, 1:], 0, atol=1e-14)


def test_g_star_real_statistic_has_zero_imaginary_block(fitted):
    spec, _ = builtin_cross_correlation(2, 0, 1)
    g = g_star_exact(fitted[2], spec)
    assert np.max(np.abs(g[3:, :])) < 1e-12 * np.abs(g).max()
    assert np.allclose(g, g.T)


# ---------------------------------------------------------------- step II


def test_residual_identities(residuals):
    res = residuals
    eye = np.eye(2)
    assert np.allclose(res.U.values.mean(0), eye, atol=1e-8)
    assert np.allclose(res.I_tilde.values.mean(0), res.f_hat_b.values, atol=1e-12)
    assert res.count == 128 - 10 + 1
    assert res.k == 12 and res.b == 10


def test_forced_draw_and_vplus(residuals):
    res = residuals
    one = step2_convolved_draw(res, 1, make_rng(0, "t"), indices=[7])
    assert np.array_equal(one.values, res.I_tilde.values[7])
    all_idx = step2_convolved_draw(res, res.count, make_rng(0, "t"), indices=np.arange(res.count))
    assert np.allclose(all_idx.values, res.f_hat_b.values, atol=1e-12)
    spec, _ = builtin_cross_correlation(0, 0, 1)
    assert np.allclose(step2_vplus(all_idx, res, spec, 3), 0, atol=1e-10)
    with pytest.raises(ValueError):
        step2_convolved_draw(res, 0, make_rng(0, "t"))


def test_g_plus_zero_when_residuals_constant(residuals):
    res = residuals
    flat = Residuals(
        res.U, SpectralField(res.U.grid, np.broadcast_to(res.f_hat_b.values, res.I_tilde.values.shape)),
        res.f_hat_b, res.f_tilde, res.n,
    )
    spec, _ = builtin_cross_correlation(1, 0, 1)
    assert np.allclose(g_plus_exact(flat, spec), 0)
    assert np.allclose(c_plus(flat, spec), 0)


@pytest.mark.parametrize("k", [2, 8])
def test_g_plus_independent_of_k(residuals, k):
    res = residuals
    spec, _ = builtin_cross_correlation(1, 0, 1)
    rng = make_rng(k, "gplus")
    draws = np.stack(
        [step2_vplus(step2_convolved_draw(res, k, rng), res, spec, k) for _ in range(6000)]
    )
    emp = empirical_real_moments(draws, centered=False)[:3, :3]
    exact = g_plus_exact(res, spec)[:3, :3]
    assert np.allclose(emp, exact, rtol=0.1, atol=0.04 * np.abs(exact).max())


def test_c_plus_is_same_frequency_part(residuals):
    res = residuals
    spec = SpectralMeanSpec(
        [(Constant(1.0), 0, 1), (Constant(0.5 + 0.3j), 1, 0), (Constant(1.0), 1, 1)]
    )
    d = res.I_tilde.values - res.f_hat_b.values[None]
    total = np.zeros((6, 6))
    for l in range(res.U.grid.half):
        mask = np.zeros_like(d)
        mask[:, l] = d[:, l]
        p = integrated_periodogram(SpectralField(res.U.grid, mask), spec)
        total += res.b * empirical_real_moments(p, centered=False)
    assert np.allclose(c_plus(res, spec), total, atol=1e-12 * np.abs(total).max())
    # full G+ adds the cross-frequency terms to the same-frequency ones
    assert not np.allclose(g_plus_exact(res, spec), total)


# ---------------------------------------------------------------- step III


def test_merge_scalar_rescale():
    gs = np.diag([4.0, 1.0])
    gp = np.diag([9.0, 1.0])
    cp = np.diag([4.0, 1.0])
    v = np.array([[2.0 + 1.0j], [-1.0 + 0.5j]])
    out, merged = merge_and_rescale(v, gs, gp, cp)
    assert np.allclose(merged.G_circ, np.diag([9.0, 1.0]))
    assert np.allclose(out.real, 1.5 * v.real) and np.allclose(out.imag, v.imag)
    assert merged.clamp_report == 0


def test_merge_identity_when_g_plus_equals_c_plus(residuals, fitted):
    spec, _ = builtin_cross_correlation(0, 0, 1)
    gs = g_star_exact(fitted[2], spec)
    gs = gs + 0.1 * np.eye(6) * np.abs(gs).max()  # make it positive definite
    gp = g_plus_exact(residuals, spec)
    v = np.random.default_rng(0).standard_normal((5, 3)) + 0j
    out, _ = merge_and_rescale(v, gs, gp, gp)
    assert np.allclose(out, v, atol=1e-10)


def test_merge_clamps_negative_part():
    merged = merge_matrices(np.diag([1.0, 1.0]), np.diag([0.0, 0.0]), np.diag([3.0, 0.0]))
    assert merged.clamp_report == 1
    assert np.allclose(merged.G_circ, np.diag([0.0, 1.0]))


def test_merge_degenerate_first_stage():
    with pytest.raises(DegenerateMatrixError, match="first-stage"):
        merge_and_rescale(np.ones((2, 1)), np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)))


# ---------------------------------------------------------------- smooth path


def test_cross_correlation_value_and_jacobian():
    _, g = builtin_cross_correlation(0, 0, 1)
    m = np.array([0.5, 1.0, 1.0])
    assert np.allclose(g(m), [0.5])
    jac = g.jacobian(np.concatenate([m, np.zeros(3)]))
    assert np.allclose(jac[0], [1, -0.25, -0.25, 0, 0, 0])
    with pytest.raises(StatisticUndefinedError):
        g.jacobian(np.array([0.5, -1.0, 1.0, 0, 0, 0]))


@given(
    st.floats(-2, 2),
    st.floats(0.2, 3),
    st.floats(0.2, 3),
    st.floats(-0.5, 0.5),
)
def test_analytic_jacobian_matches_finite_differences(a, p, q, im):
    _, g = builtin_cross_correlation(1, 0, 1)
    x = np.array([a, p, q, im, 0.0, 0.0])
    ana = g.jacobian(x, "analytic")
    num = finite_difference_jacobian(g.real, x, 1e-6)
    assert np.allclose(ana, num, atol=1e-5)


def test_smooth_identity_statistic_reproduces_g_circ(series):
    spec, _ = builtin_cross_correlation(1, 0, 1)
    ident = SmoothStatistic(lambda m: m, 3, 3, derivative=lambda m: np.eye(3))
    cfg = MfhbConfig(0.2, 10, 200, seed=4)
    run = run_smooth(series, spec, ident, cfg)
    cov = empirical_real_moments(run.replicates, centered=True)
    g = run.merged.G_circ
    assert np.allclose(cov, g, atol=1e-8 * np.abs(g).max())


def test_smooth_covariance_equals_delta_method(series):
    spec, g = builtin_cross_correlation(0, 0, 1)
    cfg = MfhbConfig(0.2, 10, 200, seed=4)
    run = run_smooth(series, spec, g, cfg)
    f = KernelSpectralEstimate(periodogram(series), 0.2)
    m_hat = integrated_periodogram(f.on_grid(FrequencyGrid(128)), spec)
    jac = g.jacobian(stack_real(m_hat))
    target = jac @ run.merged.G_circ @ jac.T
    cov = empirical_real_moments(run.replicates, centered=True)
    assert np.allclose(cov, target, atol=1e-8 * np.abs(target).max())
    assert np.max(np.abs(run.replicates.imag)) < 1e-10


def test_smooth_scale_invariance(series):
    spec, g = builtin_cross_correlation(1, 0, 1)
    cfg = MfhbConfig(0.2, 10, 100, seed=9)
    a = run_smooth(series, spec, g, cfg).replicates
    b = run_smooth(3.0 * series, spec, g, cfg).replicates
    assert np.allclose(a, b, atol=1e-8)


def test_integrated_replicates_real_for_real_statistic(series):
    spec, _ = builtin_cross_correlation(2, 0, 1)
    run = run_integrated(series, spec, MfhbConfig(0.2, 10, 50, seed=1))
    assert np.max(np.abs(run.replicates.imag)) < 1e-10
    assert run.replicates.shape == (50, 3)
    assert run.diagnostics["k"] == 12


def test_determinism_and_threads(series):
    spec, g = builtin_cross_correlation(0, 0, 1)
    cfg = MfhbConfig(0.2, 10, 60, seed=3)
    a = run_smooth(series, spec, g, cfg).replicates
    b = run_smooth(series, spec, g, cfg).replicates
    c = run_smooth(series, spec, g, MfhbConfig(0.2, 10, 60, seed=3, threads=3)).replicates
    d = run_smooth(series, spec, g, MfhbConfig(0.2, 10, 60, seed=4)).replicates
    assert np.array_equal(a, b) and np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_statistic_length_mismatch(series):
    spec, _ = builtin_cross_correlation(0, 0, 1)
    bad = SmoothStatistic(lambda m: m[..., :1], 2, 1)
    with pytest.raises(ValueError, match="expects"):
        run_smooth(series, spec, bad, MfhbConfig(0.2, 10, 10))
