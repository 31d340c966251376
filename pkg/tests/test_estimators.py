import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mfhb import KernelSpectralDensity, MFHBootstrap, MovingBlockBootstrap
from mfhb.models import generate, model1
from mfhb.spectral import sample_cross_correlation


@pytest.fixture(scope="module")
def x():
    return generate(model1(), 100, 21)


def test_kernel_spectral_density(x):
    est = KernelSpectralDensity(bandwidth=0.2).fit(x)
    assert est.spectral_density_.shape == (50, 2, 2)
    assert est.frequencies_.shape == (50,)
    assert est.n_features_in_ == 2
    vals = est.evaluate([0.3, -0.3])
    assert np.allclose(vals[1], vals[0].T)
    assert np.allclose(vals, np.conj(np.swapaxes(vals, -1, -2)))


def test_kernel_not_fitted():
    with pytest.raises(NotFittedError):
        KernelSpectralDensity().evaluate([0.1])


def test_get_params_and_clone():
    est = MFHBootstrap(lag=1, bandwidth=0.12, n_replicates=50, random_state=3)
    params = est.get_params()
    assert params["lag"] == 1 and params["bandwidth"] == 0.12
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(lag=-1)
    assert est.lag == -1
    assert clone(MovingBlockBootstrap(block_length=6)).block_length == 6


def test_mfhb_fit(x):
    est = MFHBootstrap(lag=0, bandwidth=0.1, block_length=6, n_replicates=60, random_state=1).fit(x)
    xc = x - x.mean(0)
    assert np.isclose(est.statistic_, sample_cross_correlation(xc, 0, 0, 1))
    assert est.replicates_.shape == (60, 1)
    assert 0.02 < est.std_ < 0.3
    assert est.block_length_ == 6
    again = MFHBootstrap(lag=0, bandwidth=0.1, block_length=6, n_replicates=60, random_state=1).fit(x)
    assert again.std_ == est.std_


def test_mfhb_default_block_and_integrated(x):
    est = MFHBootstrap(n_replicates=20, integrated=True).fit(x)
    assert est.block_length_ == 12
    assert est.replicates_.shape == (20, 3)
    assert est.std_.shape == (3,)


def test_mbb_fit(x):
    est = MovingBlockBootstrap(lag=1, block_length=6, n_replicates=80, random_state=2).fit(x)
    assert est.replicates_.shape == (80,)
    assert est.n_skipped_ == 0
    assert 0.02 < est.std_ < 0.3


@pytest.mark.parametrize("cls", [MFHBootstrap, MovingBlockBootstrap])
def test_validation(cls, x):
    bad = x.copy()
    bad[3, 0] = np.nan
    with pytest.raises(ValueError):
        cls(n_replicates=10).fit(bad)
    with pytest.raises(ValueError):
        cls(s=2, n_replicates=10).fit(x)
    with pytest.raises(ValueError):
        cls(random_state="seed", n_replicates=10).fit(x)
    with pytest.raises(ValueError):
        cls(n_replicates=10).fit(x[:2])
