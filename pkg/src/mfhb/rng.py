"""
Deterministic random streams.

Every random quantity in the package is drawn from a generator whose seed is
derived from a root seed and a path of labels::

    seed = int(sha256("mfhb/v1" | repr(root) | repr(label_1) | ...)[:16])

The derivation depends only on the root and the labels (never on call order
or thread scheduling), so serial and parallel runs draw identical numbers.
The hash input format is frozen; changing it would change every result.
"""
from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_substream", "make_rng"]

_PREFIX = b"mfhb/v1"


def derive_substream(seed, *labels) -> int:
    """128-bit seed for the stream at ``labels`` below ``seed``."""
    h = hashlib.sha256(_PREFIX)
    for part in (seed,) + labels:
        if isinstance(part, (np.integer,)):
            part = int(part)
        if isinstance(part, float) and part.is_integer():
            # keep 6 and 6.0 on the same stream
            part = int(part)
        token = repr(part).encode("utf-8")
        h.update(len(token).to_bytes(4, "little"))
        h.update(token)
    return int.from_bytes(h.digest()[:16], "little")


def make_rng(seed, *labels) -> np.random.Generator:
    """Generator seeded from :func:`derive_substream`."""
    return np.random.Generator(np.random.PCG64(derive_substream(seed, *labels)))
