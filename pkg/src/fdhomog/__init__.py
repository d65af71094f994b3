"""Depth-based two-sample homogeneity tests for functional data."""

__version__ = "0.1.0"

from .curves import (  # noqa: E402
    FunctionalSample,
    Grid,
    finite_difference,
    l2_distance,
    pointwise_ranks,
    trapezoid_integral,
)
from .depth import (  # noqa: E402
    DepthKind,
    DepthSpec,
    DepthVector,
    compute_depth,
    deepest,
    depth_bd,
    depth_fm,
    depth_hmodal,
    depth_mbd,
    depth_rpd,
    depth_wrt,
    depth_wrt_many,
)
from .homogeneity import (  # noqa: E402
    StatisticKind,
    Tail,
    TestConfig,
    TestResult,
    bootstrap_test,
    bootstrap_test_many,
    evaluate_statistics,
    stat_p1,
    stat_p2,
    stat_p3,
    stat_p4,
)
