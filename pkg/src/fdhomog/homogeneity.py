"""Depth-based distances between two functional samples and the bootstrap test.

Notation: ``d_F(g)`` is the depth of ``g`` in ``F + [g]`` and ``D_F(G)`` the
curve of ``G`` maximizing it.  The four statistics are

* ``P1(F, G) = d_F(D_G(G))``
* ``P2(F, G) = |P1(F, G) - P1(F, F)|``
* ``P3(F, G) = d_F(D_F(G)) = max_g d_F(g)``
* ``P4(F, G) = |P3(F, G) - P1(F, F)| * |P3(F, G) - P1(G, G)|``

``P1`` and ``P3`` reject homogeneity for small values, ``P2`` and ``P4`` for
large ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .curves import FunctionalSample, check_same_grid, order_statistic_rank
from .depth import DepthKind, DepthSpec, depth_wrt_many
from .errors import ContractError, DegenerateInputError

__all__ = [
    "Tail",
    "StatisticKind",
    "TestConfig",
    "TestResult",
    "evaluate_statistics",
    "stat_p1",
    "stat_p2",
    "stat_p3",
    "stat_p4",
    "critical_value",
    "bootstrap_statistics",
    "bootstrap_test",
    "bootstrap_test_many",
]


class Tail(str, enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


class StatisticKind(str, enum.Enum):
    P1 = "p1"
    P2 = "p2"
    P3 = "p3"
    P4 = "p4"

    @property
    def tail(self) -> Tail:
        return Tail.LOWER if self in (StatisticKind.P1, StatisticKind.P3) else Tail.UPPER


@dataclass(frozen=True)
class TestConfig:
    """Bootstrap size, level, seed, depth and statistic of one homogeneity test."""

    __test__ = False  # not a pytest class

    bootstrap: int = 1000
    alpha: float = 0.05
    rng_seed: int = 0
    depth: DepthSpec = field(default_factory=DepthSpec)
    statistic: StatisticKind = StatisticKind.P1

    def __post_init__(self):
        object.__setattr__(self, "statistic", StatisticKind(self.statistic))
        if self.bootstrap < 1:
            raise ContractError("bootstrap count must be positive")
        if not 0 < self.alpha < 1:
            raise ContractError("alpha must lie in (0, 1)")
        if self.bootstrap * self.alpha < 1 - 1e-9:
            raise ContractError("bootstrap * alpha must be at least 1")
        if self.rng_seed < 0:
            raise ContractError("rng_seed must be non-negative")

    def to_dict(self) -> dict:
        return {
            "bootstrap": self.bootstrap,
            "alpha": self.alpha,
            "rng_seed": self.rng_seed,
            "depth": self.depth.to_dict(),
            "statistic": self.statistic.value,
        }


@dataclass(frozen=True, eq=False)
class TestResult:
    __test__ = False

    statistic: StatisticKind
    observed: float
    bootstrap_values: np.ndarray
    critical_value: float
    reject: bool
    tail: Tail

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic.value,
            "observed": self.observed,
            "critical_value": self.critical_value,
            "reject": self.reject,
            "tail": self.tail.value,
            "bootstrap_values": [float(v) for v in self.bootstrap_values],
        }


def evaluate_statistics(
    F: FunctionalSample,
    G: FunctionalSample,
    depth: DepthSpec,
    kinds: Iterable[StatisticKind] = tuple(StatisticKind),
) -> dict:
    """Evaluate several statistics sharing the intermediate depth computations.

    The same depth batches are computed whichever statistics are requested,
    so a value never depends on the selection.
    """
    check_same_grid(F, G)
    kinds = [StatisticKind(k) for k in kinds]
    # d_G over G picks D_G(G); one d_F batch over F then G serves P1(F,F), P1(F,G) and P3.
    gg = depth_wrt_many(G, G.values, depth)
    g_star = int(np.argmax(gg))
    p1_gg = float(gg[g_star])
    wrt_f = depth_wrt_many(F, np.vstack([F.values, G.values]), depth)
    p1_ff = float(np.max(wrt_f[: F.n]))
    p1_fg = float(wrt_f[F.n + g_star])
    p3_fg = float(np.max(wrt_f[F.n:]))

    out = {}
    for k in kinds:
        if k is StatisticKind.P1:
            out[k] = p1_fg
        elif k is StatisticKind.P2:
            out[k] = abs(p1_fg - p1_ff)
        elif k is StatisticKind.P3:
            out[k] = p3_fg
        else:
            out[k] = abs(p3_fg - p1_ff) * abs(p3_fg - p1_gg)
    return out


def stat_p1(F, G, depth: DepthSpec) -> float:
    """Depth in ``F`` of the deepest curve of ``G`` within ``G``."""
    return evaluate_statistics(F, G, depth, [StatisticKind.P1])[StatisticKind.P1]


def stat_p2(F, G, depth: DepthSpec) -> float:
    return evaluate_statistics(F, G, depth, [StatisticKind.P2])[StatisticKind.P2]


def stat_p3(F, G, depth: DepthSpec) -> float:
    """Largest depth in ``F`` reached by a curve of ``G``."""
    return evaluate_statistics(F, G, depth, [StatisticKind.P3])[StatisticKind.P3]


def stat_p4(F, G, depth: DepthSpec) -> float:
    return evaluate_statistics(F, G, depth, [StatisticKind.P4])[StatisticKind.P4]


def critical_value(values, alpha: float, tail: Tail) -> float:
    """One-sided bootstrap critical value.

    The ``ceil(alpha N)``-th smallest value for a lower tail, the
    ``ceil((1 - alpha) N)``-th smallest for an upper tail.
    """
    v = np.asarray(values, dtype=float)
    q = alpha if Tail(tail) is Tail.LOWER else 1.0 - alpha
    r = order_statistic_rank(q, v.size)
    return float(np.partition(v, r - 1)[r - 1])


def _iteration_rng(seed: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))


def bootstrap_statistics(
    F: FunctionalSample,
    G: FunctionalSample,
    depth: DepthSpec,
    kinds: Sequence[StatisticKind],
    n_boot: int,
    seed: int,
) -> dict:
    """Bootstrap distribution of each statistic under the pooled sample.

    Iteration ``j`` resamples ``|F| + |G|`` indices with replacement from ``F``
    followed by ``G`` using a generator derived from ``(seed, j)``; the first
    ``|F|`` draws form the first sample.  Random projection directions are
    redrawn per iteration from the same generator.
    """
    check_same_grid(F, G)
    kinds = [StatisticKind(k) for k in kinds]
    pooled = np.vstack([F.values, G.values])
    n_f, n_h = F.n, pooled.shape[0]
    out = {k: np.empty(n_boot) for k in kinds}
    for j in range(n_boot):
        rng = _iteration_rng(seed, j)
        idx = rng.integers(0, n_h, size=n_h)
        d = depth
        if depth.kind is DepthKind.RPD:
            d = depth.with_seed(int(rng.integers(2**32)))
        s1 = FunctionalSample(F.grid, pooled[idx[:n_f]])
        s2 = FunctionalSample(F.grid, pooled[idx[n_f:]])
        vals = evaluate_statistics(s1, s2, d, kinds)
        for k in kinds:
            out[k][j] = vals[k]
    return out


def _finish(kind, observed, boot, alpha):
    tail = kind.tail
    cv = critical_value(boot, alpha, tail)
    reject = observed < cv if tail is Tail.LOWER else observed > cv
    return TestResult(kind, float(observed), boot, cv, bool(reject), tail)


def bootstrap_test_many(
    F: FunctionalSample,
    G: FunctionalSample,
    cfg: TestConfig,
    kinds: Sequence[StatisticKind] | None = None,
) -> dict:
    """Run the test for several statistics on the same bootstrap draws.

    Each entry equals what :func:`bootstrap_test` returns for that statistic
    alone.  Degenerate h-modal bandwidths are clamped rather than raised.
    """
    if F.n < 2 or G.n < 2:
        raise DegenerateInputError("each sample needs at least two curves")
    kinds = [StatisticKind(k) for k in (kinds or [cfg.statistic])]
    depth = replace(cfg.depth, on_degenerate="floor")
    observed = evaluate_statistics(F, G, depth, kinds)
    boot = bootstrap_statistics(F, G, depth, kinds, cfg.bootstrap, cfg.rng_seed)
    return {k: _finish(k, observed[k], boot[k], cfg.alpha) for k in kinds}


def bootstrap_test(F: FunctionalSample, G: FunctionalSample, cfg: TestConfig) -> TestResult:
    """Bootstrap homogeneity test of ``F`` against ``G`` with one statistic."""
    return bootstrap_test_many(F, G, cfg, [cfg.statistic])[cfg.statistic]
