"""
Estimator-style wrappers following scikit-learn conventions.

Hyperparameters are set in ``__init__`` and never modified; ``fit`` validates
the data and stores results in attributes with a trailing underscore.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import center, check_component, check_series
from .engine import MfhbConfig, builtin_cross_correlation, choose_b, run_integrated, run_smooth
from .mbb import MbbConfig, mbb_statistic_sd
from .spectral import KernelSpectralEstimate, periodogram, sample_cross_correlation

__all__ = ["KernelSpectralDensity", "MFHBootstrap", "MovingBlockBootstrap"]


def _seed(random_state) -> int:
    if random_state is None:
        return 0
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    raise ValueError("random_state must be an integer or None")


class KernelSpectralDensity(BaseEstimator):
    """
    Smoothed periodogram with the Bartlett-Priestley kernel.

    Parameters
    ----------
    bandwidth : float, default=0.1
        Kernel bandwidth; must exceed ``2 pi / n``.
    center : bool, default=True
        Subtract the sample mean before computing the periodogram.

    Attributes
    ----------
    spectral_density_ : ndarray of shape (n // 2, m, m)
        Estimate at the positive Fourier frequencies.
    frequencies_ : ndarray of shape (n // 2,)
    n_features_in_ : int
    """

    def __init__(self, bandwidth: float = 0.1, center: bool = True):
        self.bandwidth = bandwidth
        self.center = center

    def fit(self, X, y=None):
        x = check_series(X)
        if self.center:
            x = center(x)
        p = periodogram(x)
        self.estimator_ = KernelSpectralEstimate(p, float(self.bandwidth))
        fld = self.estimator_.on_grid(p.grid)
        self.spectral_density_ = fld.values
        self.frequencies_ = p.grid.positive_freqs
        self.n_features_in_ = x.shape[1]
        return self

    def evaluate(self, frequencies) -> np.ndarray:
        """Estimate at arbitrary frequencies, shape ``(len(frequencies), m, m)``."""
        check_is_fitted(self, "estimator_")
        return self.estimator_.evaluate(np.asarray(frequencies, dtype=float))


class MFHBootstrap(BaseEstimator):
    """
    Hybrid bootstrap for the sample cross-correlation ``rho_rs(lag)``.

    Parameters
    ----------
    lag, r, s : int
        Lag and zero-based components of the cross-correlation.
    bandwidth : float, default=0.1
        Bandwidth of the kernel spectral estimate.
    block_length : int or None, default=None
        Subsample length; ``None`` uses ``ceil(3 n^0.3)``.
    n_replicates : int, default=300
    random_state : int or None, default=None
    jacobian_mode : {"analytic", "finite_difference"}, default="analytic"
    integrated : bool, default=False
        Bootstrap the three spectral means instead of the correlation.

    Attributes
    ----------
    replicates_ : ndarray
        ``W°`` replicates of ``sqrt(n)(rho^ - rho)`` (or ``V°`` when
        ``integrated``).
    std_ : float or ndarray
        Bootstrap standard deviation of the statistic (replicate sd over
        ``sqrt(n)``).
    statistic_ : float or ndarray
        Sample cross-correlation of the centered data (the three spectral
        means when ``integrated``).
    run_ : BootstrapRun
    """

    def __init__(
        self,
        lag: int = 0,
        r: int = 0,
        s: int = 1,
        bandwidth: float = 0.1,
        block_length=None,
        n_replicates: int = 300,
        random_state=None,
        jacobian_mode: str = "analytic",
        integrated: bool = False,
    ):
        self.lag = lag
        self.r = r
        self.s = s
        self.bandwidth = bandwidth
        self.block_length = block_length
        self.n_replicates = n_replicates
        self.random_state = random_state
        self.jacobian_mode = jacobian_mode
        self.integrated = integrated

    def fit(self, X, y=None):
        x = center(check_series(X))
        n, m = x.shape
        check_component(self.r, m, "r")
        check_component(self.s, m, "s")
        b = choose_b(n) if self.block_length is None else int(self.block_length)
        cfg = MfhbConfig(
            float(self.bandwidth),
            b,
            int(self.n_replicates),
            _seed(self.random_state),
            self.jacobian_mode,
        )
        spec, g = builtin_cross_correlation(int(self.lag), self.r, self.s)
        if self.integrated:
            run = run_integrated(x, spec, cfg)
            self.statistic_ = run.point.real
            self.std_ = run.std(n)
        else:
            run = run_smooth(x, spec, g, cfg)
            self.statistic_ = float(sample_cross_correlation(x, int(self.lag), self.r, self.s))
            self.std_ = float(run.std(n)[0])
        self.run_ = run
        self.replicates_ = run.replicates
        self.block_length_ = b
        self.n_features_in_ = m
        return self


class MovingBlockBootstrap(BaseEstimator):
    """
    Moving block bootstrap for the sample cross-correlation ``rho_rs(lag)``.

    Attributes
    ----------
    replicates_ : ndarray
        Cross-correlations of the pseudo-series.
    std_ : float
    n_skipped_ : int
    statistic_ : float
    """

    def __init__(self, lag: int = 0, r: int = 0, s: int = 1, block_length=None,
                 n_replicates: int = 300, random_state=None):
        self.lag = lag
        self.r = r
        self.s = s
        self.block_length = block_length
        self.n_replicates = n_replicates
        self.random_state = random_state

    def fit(self, X, y=None):
        x = center(check_series(X))
        n, m = x.shape
        r = check_component(self.r, m, "r")
        s = check_component(self.s, m, "s")
        lag = int(self.lag)
        b = choose_b(n) if self.block_length is None else int(self.block_length)

        def stat(p):
            return sample_cross_correlation(p, lag, r, s)

        res = mbb_statistic_sd(x, stat, MbbConfig(b, int(self.n_replicates), _seed(self.random_state)))
        self.replicates_ = res.replicates
        self.std_ = res.std
        self.n_skipped_ = res.skips
        self.statistic_ = float(stat(x))
        self.block_length_ = b
        self.n_features_in_ = m
        return self
