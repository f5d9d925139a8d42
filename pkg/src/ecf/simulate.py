"""Seeded Monte Carlo experiments for the cross-over limit theory.

Each experiment draws ``replicates`` independent samples of size ``n``
from a model, computes the scaled estimation error

    t_r = sqrt(n) * (g_n(p) - crossover(p))

for replicate ``r`` on its own counter-based stream ``(seed, r)``, and
summarizes.  Three experiment kinds are supported:

* ``tn_summary``: mean and variance of the ``t_r`` against the limit
  variance,
* ``ks_normality``: the same draw plus a Kolmogorov test of the ``t_r``
  against the centered normal limit,
* ``cov_grid``: errors at several levels jointly, with the empirical
  covariance matrix compared to the limit covariance.

Results are deterministic functions of the configuration.  The worker
pool size is read from the ``ECF_THREADS`` environment variable and never
affects the numbers, only the wall time.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .asymptotics import CovSpec, asymptotic_variance, covariance_grid
from .empirical import SortedSample, ecf_eval
from .errors import DomainError
from .models import Distribution, Normal, parse_model
from .rng import substream, uniforms_open

__all__ = [
    "EXPERIMENTS",
    "SimConfig",
    "SimReport",
    "CovGridResult",
    "sample_iid",
    "ks_test",
    "kolmogorov_pvalue",
    "simulate_tn",
    "simulate_cov_grid",
    "run_experiment",
]

EXPERIMENTS = ("tn_summary", "ks_normality", "cov_grid")

THREADS_ENV = "ECF_THREADS"


def sample_iid(model: Distribution, n: int, stream) -> SortedSample:
    """Draw ``n`` observations by inverse transform and sort them."""
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    u = uniforms_open(stream, n)
    w = np.sort(np.asarray(model.quantile(u), dtype=float))
    return SortedSample(w, assume_sorted=True)


def kolmogorov_pvalue(x: float) -> float:
    """Two-sided tail of the Kolmogorov distribution at ``x >= 0``.

    Alternating series ``2 sum (-1)^(k-1) exp(-2 k^2 x^2)``, truncated
    once terms drop below 1e-12 and clamped to [0, 1].
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("statistic must not be NaN")
    if x < 0.0:
        raise DomainError(f"statistic must be nonnegative, got {x!r}")
    # Up to 0.17 the CDF is below 5e-18, under half an ulp of 1.0, so the
    # tail rounds to exactly 1; the alternating series there would only
    # add cancellation noise (and needs millions of terms near zero).
    if x <= 0.17:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 100000):
        term = math.exp(-2.0 * (k * x) * (k * x))
        if term < 1e-12:
            break
        total += sign * term
        sign = -sign
    return min(max(2.0 * total, 0.0), 1.0)


def ks_test(values, variance: float) -> tuple[float, float]:
    """Kolmogorov test of ``values`` against a centered normal.

    ``variance`` is the variance of the null normal law.  Returns the
    statistic ``D`` and the p-value of ``sqrt(m) * D``.
    """
    arr = np.sort(np.asarray(values, dtype=float))
    m = arr.size
    if m < 1:
        raise DomainError("ks_test needs at least one value")
    if not np.all(np.isfinite(arr)):
        raise DomainError("ks_test values must be finite")
    if not variance > 0.0:
        raise DomainError(f"variance must be positive, got {variance!r}")
    cdf = Normal(0.0, math.sqrt(variance)).cdf(arr)
    steps = np.arange(1.0, m + 1.0)
    d_plus = float(np.max(steps / m - cdf))
    d_minus = float(np.max(cdf - (steps - 1.0) / m))
    d = max(d_plus, d_minus)
    return d, kolmogorov_pvalue(math.sqrt(m) * d)


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one Monte Carlo experiment.

    ``p`` is required for the scalar experiments, ``grid`` for
    ``cov_grid``.  Everything is validated on construction.
    """

    model: str
    n: int
    replicates: int
    seed: int
    experiment: str = "tn_summary"
    p: float | None = None
    grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(
                f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}"
            )
        parse_model(self.model)
        if self.n < 10:
            raise DomainError(f"n must be at least 10, got {self.n}")
        if self.replicates < 10:
            raise DomainError(f"replicates must be at least 10, got {self.replicates}")
        if not 0 <= int(self.seed) < (1 << 64):
            raise DomainError(f"seed must fit in an unsigned 64-bit word, got {self.seed}")
        if self.experiment == "cov_grid":
            if self.grid is None or len(self.grid) == 0:
                raise DomainError("cov_grid needs a nonempty grid of levels")
            levels = tuple(float(v) for v in self.grid)
            if any(not 0.0 < v < 1.0 for v in levels):
                raise DomainError("grid levels must lie in (0, 1)")
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise DomainError("grid levels must be strictly increasing")
            if self.replicates < 100:
                raise DomainError("cov_grid needs at least 100 replicates")
            object.__setattr__(self, "grid", levels)
        else:
            if self.p is None:
                raise DomainError(f"{self.experiment} needs a level p")
            if not 0.0 < float(self.p) < 1.0:
                raise DomainError(f"p must lie in (0, 1), got {self.p!r}")
            object.__setattr__(self, "p", float(self.p))

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        if not isinstance(data, dict):
            raise DomainError("config must be a JSON object")
        known = {"model", "n", "replicates", "seed", "experiment", "p", "grid"}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        missing = {"model", "n", "replicates", "seed"} - set(data)
        if missing:
            raise DomainError(f"missing config keys: {sorted(missing)}")
        kwargs = dict(data)
        if "grid" in kwargs and kwargs["grid"] is not None:
            kwargs["grid"] = tuple(float(v) for v in kwargs["grid"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str) -> "SimConfig":
        with open(path, "r", encoding="utf-8") as handle:
            try:
                data = json.load(handle)
            except json.JSONDecodeError as exc:
                raise DomainError(f"config file is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "n": self.n,
            "replicates": self.replicates,
            "seed": self.seed,
            "experiment": self.experiment,
        }
        if self.p is not None:
            out["p"] = self.p
        if self.grid is not None:
            out["grid"] = list(self.grid)
        return out


def _thread_count(jobs: int) -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        return 1
    return max(1, min(threads, jobs))


def _map_replicates(fn: Callable[[int], object], count: int) -> list:
    """Apply ``fn`` to 0..count-1, in a pool when ECF_THREADS asks for one.

    Results land in a list indexed by replicate, so the reduction order
    (and therefore every reported number) is independent of scheduling.
    """
    threads = _thread_count(count)
    if threads == 1:
        return [fn(r) for r in range(count)]
    out = [None] * count
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for r, value in enumerate(pool.map(fn, range(count))):
            out[r] = value
    return out


@dataclass(frozen=True)
class SimReport:
    """Summary of a scalar-level Monte Carlo run."""

    config: SimConfig
    tn_values: np.ndarray
    mean: float
    variance: float
    theoretical_sigma: float
    ks_statistic: float | None
    ks_pvalue: float | None
    wall_time: float

    def to_dict(self, include_values: bool = True) -> dict:
        out = {
            **self.config.to_dict(),
            "mean": self.mean,
            "variance": self.variance,
            "theoretical_sigma": self.theoretical_sigma,
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "wall_time": self.wall_time,
        }
        if include_values:
            out["tn_values"] = self.tn_values.tolist()
        return out

    def to_json(self, include_values: bool = True) -> str:
        return json.dumps(self.to_dict(include_values=include_values), indent=2) + "\n"

    def to_csv(self) -> str:
        # The model spec itself contains commas ("normal:0,1"), so rows go
        # through a real CSV writer for correct quoting.
        fields = [
            self.config.model,
            self.config.experiment,
            format(self.config.p, ".9g"),
            str(self.config.n),
            str(self.config.replicates),
            str(self.config.seed),
            format(self.mean, ".9g"),
            format(self.variance, ".9g"),
            format(self.theoretical_sigma, ".9g"),
            "" if self.ks_statistic is None else format(self.ks_statistic, ".9g"),
            "" if self.ks_pvalue is None else format(self.ks_pvalue, ".9g"),
        ]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            "model,experiment,p,n,replicates,seed,"
            "mean,variance,theoretical_sigma,ks_statistic,ks_pvalue".split(",")
        )
        writer.writerow(fields)
        return buffer.getvalue()


def simulate_tn(config: SimConfig) -> SimReport:
    """Run a ``tn_summary`` or ``ks_normality`` experiment."""
    if config.experiment not in ("tn_summary", "ks_normality"):
        raise DomainError(f"simulate_tn cannot run {config.experiment!r}")
    model = parse_model(config.model)
    p = float(config.p)
    target = model.crossover(p)
    sigma = asymptotic_variance(model, p)
    root_n = math.sqrt(config.n)

    def one(r: int) -> float:
        sample = sample_iid(model, config.n, substream(config.seed, r))
        return root_n * (ecf_eval(sample, p) - target)

    start = time.perf_counter()
    tn = np.array(_map_replicates(one, config.replicates), dtype=float)
    ks_stat = ks_p = None
    if config.experiment == "ks_normality":
        ks_stat, ks_p = ks_test(tn, sigma)
    wall = time.perf_counter() - start

    return SimReport(
        config=config,
        tn_values=tn,
        mean=float(np.mean(tn)),
        variance=float(np.var(tn, ddof=1)),
        theoretical_sigma=sigma,
        ks_statistic=ks_stat,
        ks_pvalue=ks_p,
        wall_time=wall,
    )


@dataclass(frozen=True)
class CovGridResult:
    """Empirical versus limit covariance of the scaled errors on a grid."""

    config: SimConfig
    grid: np.ndarray
    empirical: np.ndarray
    theoretical: CovSpec
    max_abs_error: float
    wall_time: float

    def to_dict(self) -> dict:
        return {
            **self.config.to_dict(),
            "empirical": self.empirical.tolist(),
            "theoretical": self.theoretical.matrix.tolist(),
            "max_abs_error": self.max_abs_error,
            "min_eigenvalue": self.theoretical.min_eigenvalue(),
            "wall_time": self.wall_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        """Levels, then the empirical matrix, then the limit matrix."""
        lines = [",".join(format(p, ".9g") for p in self.grid)]
        for row in self.empirical:
            lines.append(",".join(format(v, ".9g") for v in row))
        for row in self.theoretical.matrix:
            lines.append(",".join(format(v, ".9g") for v in row))
        return "\n".join(lines) + "\n"


def simulate_cov_grid(config: SimConfig) -> CovGridResult:
    """Run a ``cov_grid`` experiment."""
    if config.experiment != "cov_grid":
        raise DomainError(f"simulate_cov_grid cannot run {config.experiment!r}")
    model = parse_model(config.model)
    levels = np.asarray(config.grid, dtype=float)
    targets = np.array([model.crossover(float(p)) for p in levels])
    theoretical = covariance_grid(model, levels)
    root_n = math.sqrt(config.n)

    def one(r: int) -> np.ndarray:
        sample = sample_iid(model, config.n, substream(config.seed, r))
        return np.array(
            [root_n * (ecf_eval(sample, float(p)) - t) for p, t in zip(levels, targets)]
        )

    start = time.perf_counter()
    rows = np.array(_map_replicates(one, config.replicates), dtype=float)
    centered = rows - rows.mean(axis=0)
    empirical = centered.T @ centered / (config.replicates - 1)
    empirical = 0.5 * (empirical + empirical.T)
    wall = time.perf_counter() - start

    return CovGridResult(
        config=config,
        grid=levels,
        empirical=empirical,
        theoretical=theoretical,
        max_abs_error=float(np.max(np.abs(empirical - theoretical.matrix))),
        wall_time=wall,
    )


def run_experiment(config: SimConfig):
    """Dispatch a configuration to the matching experiment runner."""
    if config.experiment == "cov_grid":
        return simulate_cov_grid(config)
    return simulate_tn(config)
