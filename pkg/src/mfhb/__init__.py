"""Multiple frequency hybrid bootstrap for multivariate time series."""

from .engine import (
    BootstrapRun,
    MergedMatrices,
    MfhbConfig,
    SmoothStatistic,
    builtin_cross_correlation,
    choose_b,
    run_integrated,
    run_smooth,
)
from .estimators import KernelSpectralDensity, MFHBootstrap, MovingBlockBootstrap
from .exceptions import (
    DegenerateMatrixError,
    EigenDecompositionError,
    MFHBError,
    StatisticUndefinedError,
    TooManySkipsError,
    UnstableModelError,
)
from .models import VarmaSpec, generate, generate_many, model1, model2, preset
from .spectral import (
    ComplexExponential,
    Constant,
    SpectralMeanSpec,
    Tabulated,
    kernel_spectral_estimate,
    periodogram,
    sample_cross_correlation,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapRun",
    "ComplexExponential",
    "Constant",
    "DegenerateMatrixError",
    "EigenDecompositionError",
    "KernelSpectralDensity",
    "MFHBError",
    "MFHBootstrap",
    "MergedMatrices",
    "MfhbConfig",
    "MovingBlockBootstrap",
    "SmoothStatistic",
    "SpectralMeanSpec",
    "StatisticUndefinedError",
    "Tabulated",
    "TooManySkipsError",
    "UnstableModelError",
    "VarmaSpec",
    "builtin_cross_correlation",
    "choose_b",
    "generate",
    "generate_many",
    "kernel_spectral_estimate",
    "model1",
    "model2",
    "periodogram",
    "preset",
    "run_integrated",
    "run_smooth",
    "sample_cross_correlation",
]
