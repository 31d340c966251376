"""
Simulation study runner.

An experiment is described by one JSON document::

    {
      "model": "model1",                 # or {"preset": "model2", ...} or a full spec
      "n": 100,
      "statistics": [{"kind": "cross_correlation", "h": 0, "r": 0, "s": 1}],
      "methods": {
        "mfhb": {"bandwidths": [0.10], "block_lengths": [6]},
        "mbb": {"block_lengths": [6]}
      },
      "repetitions": 100,
      "replicates": 300,
      "seed": 1,
      "exact": {"reps": 10000},          # or {"values": {"rho01(0)": 0.0992}}
      "output": "results.csv",
      "threads": 1,
      "timings": false
    }

Every series is centered before any statistic is computed. Reported
values are bootstrap standard deviations of the statistic multiplied by
``scale`` (10 by default); ``raw_mean`` is the unscaled mean.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import center
from .engine import MfhbConfig, builtin_cross_correlation, run_smooth
from .exceptions import MFHBError
from .mbb import MbbConfig, mbb_statistic_sd
from .models import VarmaSpec, generate_many, preset
from .rng import derive_substream
from .spectral import sample_cross_correlation

__all__ = [
    "COLUMNS",
    "CrossCorrelation",
    "ExperimentConfig",
    "ResultTable",
    "load_config",
    "monte_carlo_exact",
    "run_experiment",
]

COLUMNS = (
    "model",
    "statistic",
    "method",
    "h",
    "b",
    "exact",
    "mean",
    "std",
    "mse_x10",
    "raw_mean",
    "skips",
    "seconds",
    "flagged",
)
SKIP_FLAG_FRACTION = 0.10


@dataclass(frozen=True)
class CrossCorrelation:
    """Sample cross-correlation ``rho_rs(h)`` of a centered series."""

    h: int
    r: int = 0
    s: int = 1

    @property
    def label(self) -> str:
        return f"rho{self.r}{self.s}({self.h})"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return sample_cross_correlation(x, self.h, self.r, self.s)

    def spectral(self):
        return builtin_cross_correlation(self.h, self.r, self.s)

    def to_dict(self) -> dict:
        return {"kind": "cross_correlation", "h": self.h, "r": self.r, "s": self.s}


def _statistic_from_dict(d: dict) -> CrossCorrelation:
    kind = d.get("kind", "cross_correlation")
    if kind != "cross_correlation":
        raise ValueError(f"unknown statistic kind {kind!r}")
    return CrossCorrelation(int(d["h"]), int(d.get("r", 0)), int(d.get("s", 1)))


def _model_from_config(value) -> tuple[str, VarmaSpec]:
    if isinstance(value, str):
        return value, preset(value)
    if isinstance(value, dict) and "preset" in value:
        kw = {k: v for k, v in value.items() if k != "preset"}
        return value["preset"], preset(value["preset"], **kw)
    if isinstance(value, dict):
        spec = VarmaSpec.from_dict(value)
        return value.get("name", "custom"), spec
    raise ValueError("model must be a preset name or a mapping")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    model_name: str
    model: VarmaSpec
    n: int
    statistics: tuple
    mfhb_bandwidths: tuple = ()
    mfhb_block_lengths: tuple = ()
    mbb_block_lengths: tuple = ()
    repetitions: int = 100
    replicates: int = 300
    seed: int = 0
    exact_reps: int = 10000
    exact_values: dict = field(default_factory=dict)
    output: str = "results.csv"
    threads: int = 1
    timings: bool = False
    scale: float = 10.0
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.replicates < 2:
            raise ValueError("replicates must be at least 2")
        if not self.statistics:
            raise ValueError("at least one statistic is required")
        has_mfhb = bool(self.mfhb_bandwidths) and bool(self.mfhb_block_lengths)
        if bool(self.mfhb_bandwidths) != bool(self.mfhb_block_lengths):
            raise ValueError("mfhb needs nonempty bandwidth and block length grids")
        if not has_mfhb and not self.mbb_block_lengths:
            raise ValueError("at least one method with a nonempty grid is required")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        name, model = _model_from_config(d["model"])
        methods = d.get("methods", {})
        mfhb = methods.get("mfhb", {})
        mbb = methods.get("mbb", {})
        exact = d.get("exact", {})
        return cls(
            model_name=name,
            model=model,
            n=int(d["n"]),
            statistics=tuple(_statistic_from_dict(s) for s in d["statistics"]),
            mfhb_bandwidths=tuple(float(h) for h in mfhb.get("bandwidths", ())),
            mfhb_block_lengths=tuple(int(b) for b in mfhb.get("block_lengths", ())),
            mbb_block_lengths=tuple(int(b) for b in mbb.get("block_lengths", ())),
            repetitions=int(d.get("repetitions", 100)),
            replicates=int(d.get("replicates", 300)),
            seed=int(d.get("seed", 0)),
            exact_reps=int(exact.get("reps", 10000)),
            exact_values={k: float(v) for k, v in exact.get("values", {}).items()},
            output=str(d.get("output", "results.csv")),
            threads=int(d.get("threads", 1)),
            timings=bool(d.get("timings", False)),
            scale=float(d.get("scale", 10.0)),
            source=dict(d),
        )

    def with_overrides(self, **kw) -> "ExperimentConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(kw)
        return ExperimentConfig(**fields)


def load_config(path) -> ExperimentConfig:
    """Read a JSON config; the ``MFHB_SEED`` environment variable overrides ``seed``."""
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    env = os.environ.get("MFHB_SEED")
    if env is not None and env.strip():
        d["seed"] = int(env)
    return ExperimentConfig.from_dict(d)


def _simulate(model: VarmaSpec, n: int, seeds) -> np.ndarray:
    return center(generate_many(model, n, seeds))


def monte_carlo_exact(
    model: VarmaSpec, n: int, statistic, reps: int, seed, chunk: int = 2000
) -> tuple[float, np.ndarray]:
    """
    Monte Carlo standard deviation of ``statistic`` over ``reps`` series.

    Series ``i`` uses the stream ``derive_substream(seed, "exact", i)``.
    Returns ``(sd, values)`` where ``sd`` uses ``ddof=1``.
    """
    reps = int(reps)
    if reps < 2:
        raise ValueError("reps must be at least 2")
    vals = []
    for start in range(0, reps, chunk):
        seeds = [derive_substream(seed, "exact", i) for i in range(start, min(reps, start + chunk))]
        x = _simulate(model, n, seeds)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals.append(np.asarray(statistic(x), dtype=float))
    values = np.concatenate(vals)
    values = np.where(np.isfinite(values), values, 0.0)
    return float(np.std(values, ddof=1)), values


@dataclass(eq=False)
class ResultTable:
    """Rows keyed by ``(model, statistic, method, h, b)`` plus per-repetition estimates."""

    rows: list
    estimates: dict
    scale: float = 10.0

    @property
    def flagged(self) -> bool:
        return any(r["flagged"] for r in self.rows)

    def row(self, statistic: str, method: str, b: int, h: float | None = None) -> dict:
        for r in self.rows:
            if r["statistic"] == statistic and r["method"] == method and r["b"] == b:
                if h is None or r["h"] == h:
                    return r
        raise KeyError((statistic, method, h, b))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in COLUMNS])
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _cells(cfg: ExperimentConfig):
    for stat in cfg.statistics:
        for h in cfg.mfhb_bandwidths:
            for b in cfg.mfhb_block_lengths:
                yield stat, "mfhb", h, b
        for b in cfg.mbb_block_lengths:
            yield stat, "mbb", None, b


def _one_repetition(cfg: ExperimentConfig, i: int):
    x = _simulate(cfg.model, cfg.n, [derive_substream(cfg.seed, "data", i)])[0]
    out = []
    for stat, method, h, b in _cells(cfg):
        t0 = time.perf_counter()
        seed = derive_substream(cfg.seed, "boot", i, stat.label, method, h, b)
        try:
            if method == "mfhb":
                spec, g = stat.spectral()
                run = run_smooth(x, spec, g, MfhbConfig(h, b, cfg.replicates, seed))
                value = float(run.std(cfg.n)[0])
            else:
                res = mbb_statistic_sd(x, stat, MbbConfig(b, cfg.replicates, seed))
                value = res.std
            if not np.isfinite(value):
                value = None
        except (MFHBError, np.linalg.LinAlgError):
            value = None
        out.append((value, time.perf_counter() - t0))
    return out


def run_experiment(cfg: ExperimentConfig, exact: dict | None = None) -> ResultTable:
    """
    Run every repetition and aggregate one row per cell.

    ``exact`` maps statistic labels to the true standard deviation (raw
    scale); missing entries come from ``cfg.exact_values`` and otherwise
    from :func:`monte_carlo_exact`. Failed cells are counted as skips; a
    cell with more than 10% skips is flagged.
    """
    exact = dict(exact or {})
    for stat in cfg.statistics:
        if stat.label not in exact:
            if stat.label in cfg.exact_values:
                exact[stat.label] = cfg.exact_values[stat.label]
            else:
                exact[stat.label] = monte_carlo_exact(
                    cfg.model, cfg.n, stat, cfg.exact_reps, derive_substream(cfg.seed, "exact")
                )[0]

    reps = range(cfg.repetitions)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda i: _one_repetition(cfg, i), reps))
    else:
        results = [_one_repetition(cfg, i) for i in reps]

    rows, estimates = [], {}
    for c, (stat, method, h, b) in enumerate(_cells(cfg)):
        vals = [r[c][0] for r in results]
        secs = sum(r[c][1] for r in results)
        ok = np.array([v for v in vals if v is not None], dtype=float)
        skips = len(vals) - ok.size
        key = (cfg.model_name, stat.label, method, h, b)
        estimates[key] = ok
        ex = exact[stat.label]
        scaled = cfg.scale * ok
        row = {
            "model": cfg.model_name,
            "statistic": stat.label,
            "method": method,
            "h": h,
            "b": b,
            "exact": cfg.scale * ex,
            "mean": float(scaled.mean()) if ok.size else float("nan"),
            "std": _spread(scaled),
            "mse_x10": mse_x10(ok, ex, cfg.scale),
            "raw_mean": float(ok.mean()) if ok.size else float("nan"),
            "skips": skips,
            "seconds": round(secs, 3) if cfg.timings else None,
            "flagged": skips > SKIP_FLAG_FRACTION * len(vals),
        }
        rows.append(row)
    return ResultTable(rows, estimates, cfg.scale)


def _spread(values: np.ndarray) -> float:
    # a single repetition has no spread; report 0 rather than NaN
    if values.size == 0:
        return float("nan")
    return float(values.std(ddof=1)) if values.size > 1 else 0.0


def mse_x10(estimates, exact: float, scale: float = 10.0) -> float:
    """``10 * mean((scale * estimate - scale * exact)^2)``."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        return float("nan")
    return float(10.0 * np.mean((scale * est - scale * exact) ** 2))


def exact_report(cfg: ExperimentConfig) -> list[dict]:
    """Monte Carlo standard deviations of every configured statistic."""
    out = []
    for stat in cfg.statistics:
        sd, _ = monte_carlo_exact(
            cfg.model, cfg.n, stat, cfg.exact_reps, derive_substream(cfg.seed, "exact")
        )
        out.append({"statistic": stat.label, "sd": sd, "scaled": cfg.scale * sd})
    return out


def write_metadata(cfg: ExperimentConfig, table: ResultTable, path) -> Path:
    """Config echo and scaling convention next to the CSV."""
    meta = {
        "config": cfg.source,
        "seed": cfg.seed,
        "scale": cfg.scale,
        "columns": list(COLUMNS),
        "notes": "mean, std, exact are bootstrap sd estimates times scale; "
        "mse_x10 = 10 * mean((scale*estimate - scale*exact)^2)",
    }
    path = Path(path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
