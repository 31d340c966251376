"""
Moving block bootstrap for multivariate series.

Pseudo-series concatenate ``ceil(n / b)`` blocks of ``b`` consecutive rows,
each starting at a uniformly drawn index in ``0..n-b``, and are truncated to
``n`` rows. Every pseudo-series is re-centered before the statistic is
computed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._validation import center, check_series
from .exceptions import TooManySkipsError
from .rng import make_rng

__all__ = ["MbbConfig", "MbbResult", "mbb_resample", "mbb_statistic_sd"]

MAX_SKIP_FRACTION = 0.10


@dataclass(frozen=True)
class MbbConfig:
    """Block length ``b``, replicates ``B`` and root seed."""

    block_length: int
    replicates: int = 300
    seed: int = 0

    def __post_init__(self):
        if int(self.block_length) < 1:
            raise ValueError("block length must be positive")
        if int(self.replicates) < 2:
            raise ValueError("need at least two replicates")


@dataclass(eq=False)
class MbbResult:
    replicates: np.ndarray
    skips: int

    @property
    def std(self) -> float:
        return float(np.std(self.replicates, ddof=1))


def _block_index(n: int, b: int, rng: np.random.Generator) -> np.ndarray:
    count = math.ceil(n / b)
    starts = rng.integers(0, n - b + 1, size=count)
    return (starts[:, None] + np.arange(b)[None, :]).ravel()[:n]


def mbb_resample(x, b: int, rng: np.random.Generator) -> np.ndarray:
    """One moving block bootstrap pseudo-series of the same shape as ``x``."""
    x = check_series(x, min_samples=1)
    n, b = x.shape[0], int(b)
    if not 1 <= b <= n:
        raise ValueError(f"block length must lie in 1..{n}, got {b}")
    return x[_block_index(n, b, rng)]


def mbb_statistic_sd(x, statistic: Callable[[np.ndarray], float], cfg: MbbConfig) -> MbbResult:
    """
    Bootstrap replicates of a real statistic and their standard deviation.

    ``statistic`` maps a stack of series ``(B, n, m)`` to ``B`` values.

    Replicate ``i`` uses ``make_rng(seed, "mbb", i)``. Non-finite replicates
    are skipped; more than 10% skips raises :class:`TooManySkipsError`.
    """
    x = check_series(x, min_samples=1)
    n, b = x.shape[0], int(cfg.block_length)
    if b > n:
        raise ValueError(f"block length {b} exceeds n={n}")
    B = int(cfg.replicates)
    idx = np.stack([_block_index(n, b, make_rng(cfg.seed, "mbb", i)) for i in range(B)])
    pseudo = center(x[idx])
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.asarray(statistic(pseudo), dtype=float).reshape(B)
    ok = np.isfinite(values)
    skips = int(B - ok.sum())
    if skips > MAX_SKIP_FRACTION * B or ok.sum() < 2:
        raise TooManySkipsError(f"{skips} of {B} bootstrap replicates were degenerate")
    return MbbResult(values[ok], skips)
