"""
Data-generating processes for the simulation study.

``X(t) = sum_i Phi_i X(t-i) + sum_j Theta_j u(t-j) + u(t)``

with innovations ``u`` that are Gaussian, i.i.d. with a chosen marginal, or
driven by a BEKK(1,1) conditional covariance. Recursions start from zeros
and the first ``burn_in`` rows are discarded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import UnstableModelError
from .linalg import matrix_sqrt
from .rng import make_rng

__all__ = [
    "MA1_COEF",
    "MODEL1_COV",
    "MODEL1_PHI",
    "MODEL2_A0",
    "MODEL2_A1",
    "MODEL2_B1",
    "MODEL2_PHI1",
    "MODEL2_PHI2",
    "MODEL2_THETA",
    "BekkInnovations",
    "GaussianInnovations",
    "IIDScaledInnovations",
    "VarmaSpec",
    "bekk_recursion",
    "generate",
    "generate_many",
    "generate_ma1_example",
    "ma1_example",
    "model1",
    "model2",
    "preset",
]

EXPLOSION_LIMIT = 1e12


def _square(a, name: str, m: int | None = None) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if m is not None and a.shape[0] != m:
        raise ValueError(f"{name} must be {m}x{m}")
    return a


def _check_spd(cov: np.ndarray) -> None:
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    if np.linalg.eigvalsh(cov)[0] <= 0:
        raise ValueError("covariance must be positive definite")


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(seed, "series")


@dataclass(frozen=True, eq=False)
class GaussianInnovations:
    """i.i.d. ``N(0, cov)`` innovations via the lower Cholesky factor."""

    cov: np.ndarray

    def __post_init__(self):
        cov = _square(self.cov, "cov")
        _check_spd(cov)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    def draw_raw(self, rng: np.random.Generator, length: int) -> np.ndarray:
        return rng.standard_normal((length, self.dim))

    def transform(self, raw: np.ndarray) -> np.ndarray:
        chol = np.linalg.cholesky(self.cov)
        return np.einsum("ij,btj->bti", chol, raw)

    def to_dict(self) -> dict:
        return {"kind": "gaussian", "cov": self.cov.tolist()}


_MARGINALS = ("gaussian", "laplace", "uniform")


@dataclass(frozen=True, eq=False)
class IIDScaledInnovations:
    """
    i.i.d. innovations ``L z`` with ``L L^T = cov`` and ``z`` having
    independent unit-variance components of the given marginal.

    Kurtosis of the marginals: gaussian 3, laplace 6, uniform 1.8.
    """

    marginal: str
    cov: np.ndarray

    def __post_init__(self):
        if self.marginal not in _MARGINALS:
            raise ValueError(f"marginal must be one of {_MARGINALS}")
        cov = _square(self.cov, "cov")
        _check_spd(cov)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    @property
    def kurtosis(self) -> float:
        return {"gaussian": 3.0, "laplace": 6.0, "uniform": 1.8}[self.marginal]

    def draw_raw(self, rng: np.random.Generator, length: int) -> np.ndarray:
        size = (length, self.dim)
        if self.marginal == "gaussian":
            return rng.standard_normal(size)
        if self.marginal == "laplace":
            return rng.laplace(0.0, 1.0, size) / np.sqrt(2.0)
        return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size)

    def transform(self, raw: np.ndarray) -> np.ndarray:
        chol = np.linalg.cholesky(self.cov)
        return np.einsum("ij,btj->bti", chol, raw)

    def to_dict(self) -> dict:
        return {"kind": "iid_scaled", "marginal": self.marginal, "cov": self.cov.tolist()}


def bekk_recursion(a0, a1, b1, u_prev, s_prev) -> np.ndarray:
    """One BEKK(1,1) step: ``A0 A0^T + A1 u u^T A1^T + B1 S B1^T``.

    ``u_prev`` may be stacked ``(..., m)`` with ``s_prev`` ``(..., m, m)``.
    """
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    au = np.einsum("ij,...j->...i", a1, np.asarray(u_prev, dtype=float))
    bsb = np.einsum("ij,...jk,lk->...il", b1, np.asarray(s_prev, dtype=float), b1)
    out = a0 @ a0.T + au[..., :, None] * au[..., None, :] + bsb
    return 0.5 * (out + np.swapaxes(out, -1, -2))


@dataclass(frozen=True, eq=False)
class BekkInnovations:
    """
    ``u(t) = S_t^{1/2} e(t)`` with ``e(t)`` i.i.d. ``N(0, I)`` and ``S_t`` a
    BEKK(1,1) recursion started at ``S_1 = A0 A0^T``, ``u(0) = 0``.
    """

    a0: np.ndarray
    a1: np.ndarray
    b1: np.ndarray

    def __post_init__(self):
        a0 = _square(self.a0, "A0")
        m = a0.shape[0]
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", _square(self.a1, "A1", m))
        object.__setattr__(self, "b1", _square(self.b1, "B1", m))

    @property
    def dim(self) -> int:
        return self.a0.shape[0]

    def draw_raw(self, rng: np.random.Generator, length: int) -> np.ndarray:
        return rng.standard_normal((length, self.dim))

    def transform(self, raw: np.ndarray) -> np.ndarray:
        batch, length, m = raw.shape
        u = np.empty_like(raw)
        s = np.broadcast_to(self.a0 @ self.a0.T, (batch, m, m)).copy()
        for t in range(length):
            if t > 0:
                s = bekk_recursion(self.a0, self.a1, self.b1, u[:, t - 1], s)
            root = matrix_sqrt(s)
            u[:, t] = np.einsum("bij,bj->bi", root, raw[:, t])
            if not np.all(np.abs(u[:, t]) < EXPLOSION_LIMIT):
                raise UnstableModelError("unstable model: BEKK recursion exploded")
        return u

    def to_dict(self) -> dict:
        return {
            "kind": "bekk",
            "A0": self.a0.tolist(),
            "A1": self.a1.tolist(),
            "B1": self.b1.tolist(),
        }


def innovation_from_dict(d: dict):
    kind = d["kind"]
    if kind == "gaussian":
        return GaussianInnovations(np.asarray(d["cov"]))
    if kind == "iid_scaled":
        return IIDScaledInnovations(d["marginal"], np.asarray(d["cov"]))
    if kind == "bekk":
        return BekkInnovations(np.asarray(d["A0"]), np.asarray(d["A1"]), np.asarray(d["B1"]))
    raise ValueError(f"unknown innovation kind {kind!r}")


@dataclass(frozen=True, eq=False)
class VarmaSpec:
    """VARMA(p, q) recursion driven by an innovation source."""

    ar: Sequence[np.ndarray]
    ma: Sequence[np.ndarray]
    innovation: object
    burn_in: int = 500
    name: str = field(default="custom")

    def __post_init__(self):
        m = self.innovation.dim
        object.__setattr__(self, "ar", tuple(_square(a, "AR coefficient", m) for a in self.ar))
        object.__setattr__(self, "ma", tuple(_square(a, "MA coefficient", m) for a in self.ma))
        if int(self.burn_in) < 0:
            raise ValueError("burn_in must be nonnegative")
        object.__setattr__(self, "burn_in", int(self.burn_in))

    @property
    def dim(self) -> int:
        return self.innovation.dim

    def to_dict(self) -> dict:
        return {
            "ar": [a.tolist() for a in self.ar],
            "ma": [a.tolist() for a in self.ma],
            "innovation": self.innovation.to_dict(),
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VarmaSpec":
        return cls(
            ar=[np.asarray(a) for a in d.get("ar", [])],
            ma=[np.asarray(a) for a in d.get("ma", [])],
            innovation=innovation_from_dict(d["innovation"]),
            burn_in=d.get("burn_in", 500),
            name=d.get("name", "custom"),
        )


def _recurse(spec: VarmaSpec, u: np.ndarray) -> np.ndarray:
    batch, length, m = u.shape
    x = np.zeros_like(u)
    for t in range(length):
        acc = u[:, t].copy()
        for i, phi in enumerate(spec.ar, start=1):
            if t - i >= 0:
                acc += np.einsum("ij,bj->bi", phi, x[:, t - i])
        for j, theta in enumerate(spec.ma, start=1):
            if t - j >= 0:
                acc += np.einsum("ij,bj->bi", theta, u[:, t - j])
        if not np.all(np.abs(acc) < EXPLOSION_LIMIT):
            raise UnstableModelError("unstable model: recursion exceeded 1e12")
        x[:, t] = acc
    return x


def generate_many(spec: VarmaSpec, n: int, seeds: Sequence) -> np.ndarray:
    """
    Simulate one series per seed; returns shape ``(len(seeds), n, m)``.

    Row ``i`` is exactly ``generate(spec, n, seeds[i])``: each series draws
    its raw innovations from its own stream and the recursion treats the
    batch elementwise.
    """
    n = int(n)
    if n < 4:
        raise ValueError("n must be at least 4")
    length = spec.burn_in + n
    raw = np.stack([spec.innovation.draw_raw(_as_rng(s), length) for s in seeds])
    u = spec.innovation.transform(raw)
    x = _recurse(spec, u)
    return x[:, spec.burn_in :]


def generate(spec: VarmaSpec, n: int, seed) -> np.ndarray:
    """Simulate an ``(n, m)`` series; deterministic in ``(spec, n, seed)``."""
    return generate_many(spec, n, [seed])[0]


# --------------------------------------------------------------------------
# presets

MODEL1_PHI = np.array([[0.8, 0.4], [-0.3, 0.6]])
MODEL1_COV = np.array([[2.0, 0.5], [0.5, 1.0]])

MODEL2_PHI1 = np.array([[0.816, -0.623], [-1.116, 1.074]])
MODEL2_PHI2 = np.array([[-0.643, 0.592], [0.615, -0.133]])
MODEL2_THETA = np.array([[0.0, -1.248], [-0.801, 0.0]])
MODEL2_A0 = np.array([[0.01, 0.0], [0.0, 0.01]])
MODEL2_A1 = np.array([[0.15, 0.20], [0.06, 0.40]])
MODEL2_B1 = np.array([[0.9, 0.0], [0.0, 0.9]])

MA1_COEF = np.array([[1.0, 1.0], [1.0, -1.0]])


def model1(burn_in: int = 500) -> VarmaSpec:
    """Gaussian VAR(1) ("Model I")."""
    return VarmaSpec([MODEL1_PHI], [], GaussianInnovations(MODEL1_COV), burn_in, "model1")


def model2(burn_in: int = 500, ma_sign: float = -1.0) -> VarmaSpec:
    """VARMA(2,1) with BEKK(1,1) innovations ("Model II").

    The default ``ma_sign=-1`` enters the moving-average matrix as
    ``u(t) - Theta u(t-1)``, the convention under which the published
    simulation results for this coefficient table are reproduced.
    ``ma_sign=+1`` adds it instead.
    """
    if ma_sign not in (1, -1):
        raise ValueError("ma_sign must be +1 or -1")
    innov = BekkInnovations(MODEL2_A0, MODEL2_A1, MODEL2_B1)
    theta = float(ma_sign) * MODEL2_THETA
    return VarmaSpec([MODEL2_PHI1, MODEL2_PHI2], [theta], innov, burn_in, "model2")


def ma1_example(kind: str = "gaussian", burn_in: int = 1) -> VarmaSpec:
    """``X(t) = e(t) + [[1, 1], [1, -1]] e(t-1)`` with independent unit-variance e."""
    innov = IIDScaledInnovations(kind, np.eye(2))
    return VarmaSpec([], [MA1_COEF], innov, burn_in, f"ma1_{kind}")


_PRESETS = {"model1": model1, "model2": model2, "ma1_example": ma1_example}


def preset(name: str, **kwargs) -> VarmaSpec:
    try:
        return _PRESETS[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown model preset {name!r}; known: {sorted(_PRESETS)}") from None


def generate_ma1_example(kurtosis_kind: str, n: int, seed) -> np.ndarray:
    return generate(ma1_example(kurtosis_kind), n, seed)
