"""Gaussian-process populations and the rejection-count simulation harness.

Six reference populations are defined on ``[0, 1]``:

====== ===================== ===== ======= =======
sample mean                  shift sigma   theta
====== ===================== ===== ======= =======
0      30 t^1.5 (1 - t)      0     0.3     0.3
1      30 t^1.5 (1 - t)      1     0.3     0.3
2      30 t^1.5 (1 - t)      0.5   0.3     0.3
3      30 t (1 - t)^2        0     0.3     0.3
4      30 t (1 - t)^2        0     0.5     0.2
5      30 t^1.5 (1 - t)      0     0.5     0.2
====== ===================== ===== ======= =======

with covariance ``sigma * exp(-|s - t| / theta)``.

Every replication ``r`` of a cell draws its two samples and its bootstrap
seed from ``SeedSequence(master, spawn_key=(r,))``, so results do not depend
on the number of worker processes or on which other cells are computed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .curves import FunctionalSample, Grid
from .depth import DepthKind, DepthSpec
from .errors import ContractError, NumericError
from .homogeneity import StatisticKind, TestConfig, bootstrap_test_many

__all__ = [
    "GpPopulation",
    "SAMPLES",
    "SimConfig",
    "mean_function",
    "cov_matrix",
    "cholesky_factor",
    "draw_sample",
    "run_rejection_count",
    "run_rejection_counts",
    "reproduce_table1",
    "reproduce_null_power",
    "power_sweep",
    "MAX_JITTER",
]

MAX_JITTER = 1e-10


@dataclass(frozen=True)
class GpPopulation:
    """Gaussian process ``mean(t) + shift + e(t)`` with exponential covariance."""

    mean_kind: str = "M0"
    shift: float = 0.0
    cov_scale: float = 0.3
    cov_range: float = 0.3

    def __post_init__(self):
        if self.mean_kind not in ("M0", "M3"):
            raise ContractError("mean_kind must be 'M0' or 'M3'")
        if self.cov_scale <= 0 or self.cov_range <= 0:
            raise ContractError("covariance scale and range must be positive")

    def with_shift(self, eta: float) -> "GpPopulation":
        return replace(self, shift=float(eta))

    def to_dict(self) -> dict:
        return {
            "mean_kind": self.mean_kind,
            "shift": self.shift,
            "cov_scale": self.cov_scale,
            "cov_range": self.cov_range,
        }


SAMPLES = {
    0: GpPopulation("M0", 0.0, 0.3, 0.3),
    1: GpPopulation("M0", 1.0, 0.3, 0.3),
    2: GpPopulation("M0", 0.5, 0.3, 0.3),
    3: GpPopulation("M3", 0.0, 0.3, 0.3),
    4: GpPopulation("M3", 0.0, 0.5, 0.2),
    5: GpPopulation("M0", 0.0, 0.5, 0.2),
}


@dataclass(frozen=True)
class SimConfig:
    """Simulation sizes plus the test configuration applied in every replication.

    ``test.rng_seed`` is the master seed.  ``swap_roles`` uses the perturbed
    population as the first (reference) sample.  ``n_jobs`` only changes
    wall-clock time.
    """

    grid_size: int = 30
    curves_per_sample: int = 50
    replications: int = 100
    test: TestConfig = field(default_factory=TestConfig)
    swap_roles: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        if min(self.grid_size - 1, self.curves_per_sample - 1, self.replications) < 1:
            raise ContractError("grid_size and curves_per_sample must be >= 2, replications >= 1")
        if self.n_jobs < 1:
            raise ContractError("n_jobs must be positive")

    @classmethod
    def full_scale(cls, seed: int = 0, **kw) -> "SimConfig":
        """Full scale: 100 replications of 1000 bootstrap samples."""
        return cls(replications=100, test=TestConfig(bootstrap=1000, rng_seed=seed), **kw)

    @classmethod
    def desk(cls, replications: int = 25, seed: int = 0, **kw) -> "SimConfig":
        """Reduced scale: 500 bootstrap samples and 25 to 40 replications."""
        return cls(replications=replications, test=TestConfig(bootstrap=500, rng_seed=seed), **kw)

    @property
    def grid(self) -> Grid:
        return Grid.uniform(self.grid_size)

    def to_dict(self) -> dict:
        return {
            "grid_size": self.grid_size,
            "curves_per_sample": self.curves_per_sample,
            "replications": self.replications,
            "swap_roles": self.swap_roles,
            "test": self.test.to_dict(),
        }


def mean_function(kind: str, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if kind == "M0":
        return 30.0 * t**1.5 * (1.0 - t)
    if kind == "M3":
        return 30.0 * t * (1.0 - t) ** 2
    raise ContractError(f"unknown mean function {kind!r}")


def cov_matrix(pop: GpPopulation, grid: Grid) -> np.ndarray:
    t = grid.points
    return pop.cov_scale * np.exp(-np.abs(t[:, None] - t[None, :]) / pop.cov_range)


def cholesky_factor(pop: GpPopulation, grid: Grid):
    """Lower Cholesky factor of the covariance and the diagonal jitter that was needed."""
    cov = cov_matrix(pop, grid)
    for jitter in (0.0, 1e-12, MAX_JITTER):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(len(grid))), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericError(f"covariance is not positive definite even with jitter {MAX_JITTER}")


def draw_sample(pop: GpPopulation, cfg: SimConfig, seed) -> FunctionalSample:
    """Draw ``cfg.curves_per_sample`` independent curves from ``pop``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    grid = cfg.grid
    chol, _ = cholesky_factor(pop, grid)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((cfg.curves_per_sample, len(grid)))
    mean = mean_function(pop.mean_kind, grid.points) + pop.shift
    return FunctionalSample(grid, mean + z @ chol.T)


def _replication(args):
    pop_a, pop_b, sim, kinds, master, r = args
    ss = np.random.SeedSequence(master, spawn_key=(r,))
    seq_a, seq_b, seq_test = ss.spawn(3)
    first = draw_sample(pop_a, sim, seq_a)
    second = draw_sample(pop_b, sim, seq_b)
    if sim.swap_roles:
        first, second = second, first
    test_seed = int(seq_test.generate_state(1)[0])
    test = replace(sim.test, rng_seed=test_seed, depth=sim.test.depth.with_seed(test_seed))
    res = bootstrap_test_many(first, second, test, kinds)
    return {k: res[k].reject for k in kinds}


def run_rejection_counts(
    pop_a: GpPopulation,
    pop_b: GpPopulation,
    sim: SimConfig,
    kinds: Sequence[StatisticKind] | None = None,
    master_seed: int | Sequence[int] | None = None,
) -> dict:
    """Count rejections over ``sim.replications`` fresh pairs of samples.

    All statistics in ``kinds`` are evaluated on the same samples and bootstrap
    draws; each count equals the one obtained by requesting that statistic
    alone.
    """
    kinds = [StatisticKind(k) for k in (kinds or [sim.test.statistic])]
    master = sim.test.rng_seed if master_seed is None else master_seed
    jobs = [(pop_a, pop_b, sim, kinds, master, r) for r in range(sim.replications)]
    if sim.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=sim.n_jobs) as ex:
            results = list(ex.map(_replication, jobs))
    else:
        results = [_replication(j) for j in jobs]
    return {k: int(sum(res[k] for res in results)) for k in kinds}


def run_rejection_count(
    pop_a: GpPopulation,
    pop_b: GpPopulation,
    cfg: TestConfig,
    replications: int,
    curves_per_sample: int = 50,
    grid_size: int = 30,
) -> int:
    """Number of rejections of ``cfg.statistic`` in ``replications`` simulated tests."""
    sim = SimConfig(grid_size, curves_per_sample, replications, cfg)
    return run_rejection_counts(pop_a, pop_b, sim)[cfg.statistic]


def _cell_seed(master: int, *key: int):
    """Entropy for one table cell, independent of which other cells are run."""
    return [int(master), *key]


def _depth_sim(sim, depth):
    return replace(sim, test=replace(sim.test, depth=depth))


def reproduce_table1(
    depths: Sequence[DepthSpec],
    stats: Sequence[StatisticKind],
    sim: SimConfig,
    samples: Sequence[int] = (1, 2, 3, 4, 5),
) -> list:
    """Rejection counts of sample 0 against samples 1 to 5.

    Returns rows ``{"depth", "sample", "statistic", "rejections", "replications"}``.
    Samples for a given perturbed population are shared across depths.
    """
    rows = []
    for depth in depths:
        for i in samples:
            counts = run_rejection_counts(
                SAMPLES[0], SAMPLES[i], _depth_sim(sim, depth), stats, _cell_seed(sim.test.rng_seed, 1, i)
            )
            for k in stats:
                k = StatisticKind(k)
                rows.append(
                    {
                        "depth": depth.kind.value,
                        "sample": i,
                        "statistic": k.value,
                        "rejections": counts[k],
                        "replications": sim.replications,
                    }
                )
    return rows


def reproduce_null_power(
    depths: Sequence[DepthSpec], stats: Sequence[StatisticKind], sim: SimConfig
) -> list:
    """Rejection proportions of sample 0 tested against an independent sample 0."""
    rows = []
    for depth in depths:
        counts = run_rejection_counts(
            SAMPLES[0], SAMPLES[0], _depth_sim(sim, depth), stats, _cell_seed(sim.test.rng_seed, 0)
        )
        for k in stats:
            k = StatisticKind(k)
            rows.append(
                {
                    "depth": depth.kind.value,
                    "statistic": k.value,
                    "rejections": counts[k],
                    "replications": sim.replications,
                    "rate": counts[k] / sim.replications,
                }
            )
    return rows


def _eta_key(eta: float) -> int:
    return int(round(eta * 1_000_000))


def power_sweep(
    etas: Sequence[float], depth: DepthSpec, stat: StatisticKind, sim: SimConfig
) -> list:
    """Rejection counts of sample 0 against sample 0 shifted by each ``eta``."""
    stat = StatisticKind(stat)
    sim = _depth_sim(sim, depth)
    out = []
    for eta in etas:
        if eta < 0:
            raise ContractError("eta must be non-negative")
        counts = run_rejection_counts(
            SAMPLES[0], SAMPLES[0].with_shift(eta), sim, [stat],
            _cell_seed(sim.test.rng_seed, 2, _eta_key(eta)),
        )
        out.append(counts[stat])
    return out


def binomial_se(rate: float, n: int) -> float:
    return math.sqrt(max(rate * (1 - rate), 0.0) / n)
