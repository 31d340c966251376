import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mfhb.exceptions import TooManySkipsError
from mfhb.mbb import MbbConfig, mbb_resample, mbb_statistic_sd
from mfhb.rng import make_rng
from mfhb.spectral import sample_cross_correlation


def _xcorr(p):
    return sample_cross_correlation(p, 1, 0, 1)


@given(st.integers(5, 60), st.integers(1, 60), st.integers(0, 10**6))
def test_pseudo_series_rows_are_original_rows(n, b, seed):
    b = min(b, n)
    x = np.column_stack([np.arange(n), -np.arange(n)]).astype(float)
    p = mbb_resample(x, b, make_rng(seed, "t"))
    assert p.shape == x.shape
    rows = p[:, 0].astype(int)
    assert np.array_equal(p[:, 1], -p[:, 0])
    # rows come in runs of consecutive indices of length b
    for start in range(0, n, b):
        run = rows[start:start + b]
        assert np.array_equal(run, run[0] + np.arange(len(run)))
        assert run[0] <= n - b


def test_full_block_gives_zero_sd():
    x = np.random.default_rng(0).standard_normal((40, 2))
    res = mbb_statistic_sd(x, _xcorr, MbbConfig(40, 20, 1))
    assert res.std < 1e-15
    assert np.allclose(res.replicates, _xcorr(x - x.mean(0)), atol=1e-15)
    assert res.skips == 0


def test_determinism_and_seed_dependence():
    x = np.random.default_rng(1).standard_normal((100, 2))
    a = mbb_statistic_sd(x, _xcorr, MbbConfig(6, 50, 7)).replicates
    b = mbb_statistic_sd(x, _xcorr, MbbConfig(6, 50, 7)).replicates
    c = mbb_statistic_sd(x, _xcorr, MbbConfig(6, 50, 8)).replicates
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_white_noise_sd_close_to_asymptotic():
    x = np.random.default_rng(2).standard_normal((400, 2))
    res = mbb_statistic_sd(x, _xcorr, MbbConfig(4, 800, 3))
    assert abs(res.std * np.sqrt(400) - 1.0) < 0.12


def test_skips_and_limit():
    x = np.random.default_rng(3).standard_normal((50, 2))
    calls = {}

    def few_nan(p):
        v = np.ones(p.shape[0])
        v[:2] = np.nan
        calls["n"] = p.shape[0]
        return v + np.arange(p.shape[0])

    res = mbb_statistic_sd(x, few_nan, MbbConfig(5, 40, 0))
    assert res.skips == 2 and res.replicates.size == 38
    with pytest.raises(TooManySkipsError):
        mbb_statistic_sd(x, lambda p: np.full(p.shape[0], np.nan), MbbConfig(5, 40, 0))


def test_pseudo_series_recentred():
    x = np.random.default_rng(4).standard_normal((30, 2)) + 5.0
    res = mbb_statistic_sd(x, lambda p: np.abs(p.mean(axis=1)).max(axis=1), MbbConfig(4, 10, 0))
    assert np.all(res.replicates < 1e-12)


def test_invalid_block_length():
    x = np.zeros((10, 2))
    with pytest.raises(ValueError):
        mbb_statistic_sd(x, _xcorr, MbbConfig(11, 10))
    with pytest.raises(ValueError):
        MbbConfig(0)
    with pytest.raises(ValueError):
        mbb_resample(x, 0, make_rng(0, "t"))
