from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

MIN_SAMPLES = 4


def check_series(x, min_samples: int = MIN_SAMPLES) -> np.ndarray:
    """Validate a time series and return it as a float ``(n, m)`` array.

    One-dimensional input is treated as a single component.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return check_array(
        arr,
        dtype=np.float64,
        ensure_min_samples=min_samples,
        ensure_all_finite=True,
        copy=False,
    )


def check_component(index: int, m: int, name: str = "component") -> int:
    index = int(index)
    if not 0 <= index < m:
        raise ValueError(f"{name} index {index} out of range for m={m}")
    return index


def center(x: np.ndarray) -> np.ndarray:
    """Subtract each component's sample mean (works on stacked series too)."""
    return x - x.mean(axis=-2, keepdims=True)
