"""Functional depth measures.

Five depths are available: Fraiman-Muniz (``FM``), h-modal (``HMODAL``),
random projection (``RPD``), band depth (``BD``) and modified band depth
(``MBD``), the latter two with bands formed by pairs of curves.  Larger values
mean more central curves.

Besides the depth of every member of a sample, the module computes the depth
of a curve ``g`` with respect to a reference sample ``F``: ``g`` is appended to
``F`` (even when it duplicates a member) and the depth of the appended curve is
returned.  :func:`depth_wrt_many` evaluates that quantity for a whole batch of
candidate curves without materializing the augmented samples.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .curves import (
    FunctionalSample,
    as_curve,
    check_same_grid,
    order_statistic_rank,
    trapezoid_integral,
    trapezoid_weights,
)
from .errors import ContractError, DegenerateInputError, DegenerateSampleError

__all__ = [
    "DepthKind",
    "DepthSpec",
    "DepthVector",
    "BANDWIDTH_FLOOR",
    "truncated_gaussian",
    "draw_directions",
    "depth_fm",
    "depth_hmodal",
    "depth_rpd",
    "depth_bd",
    "depth_mbd",
    "compute_depth",
    "depth_wrt",
    "depth_wrt_many",
    "deepest",
]

BANDWIDTH_FLOOR = 1e-12
_K0 = 2.0 / math.sqrt(2.0 * math.pi)
# Upper bound on temporary boolean/float tensors built by the vectorized paths.
_CHUNK = 2_000_000


class DepthKind(str, enum.Enum):
    FM = "fm"
    HMODAL = "hmodal"
    RPD = "rpd"
    BD = "bd"
    MBD = "mbd"


@dataclass(frozen=True)
class DepthSpec:
    """Which depth to compute and its tuning constants.

    ``on_degenerate`` controls h-modal depth when the bandwidth collapses
    below ``BANDWIDTH_FLOOR``: ``"raise"`` raises
    :class:`~fdhomog.errors.DegenerateSampleError`, ``"floor"`` clamps the
    bandwidth to the floor.  Random projection depth always clamps per
    projection.
    """

    kind: DepthKind = DepthKind.FM
    bandwidth_percentile: float = 15.0
    projections: int = 50
    band_order: int = 2
    rng_seed: int = 0
    on_degenerate: str = "raise"

    def __post_init__(self):
        object.__setattr__(self, "kind", DepthKind(self.kind))
        if not 0 < self.bandwidth_percentile < 100:
            raise ContractError("bandwidth_percentile must lie in (0, 100)")
        if self.projections < 1:
            raise ContractError("projections must be a positive integer")
        if self.band_order != 2:
            raise ContractError("only bands formed by pairs of curves (J=2) are supported")
        if self.rng_seed < 0:
            raise ContractError("rng_seed must be a non-negative integer")
        if self.on_degenerate not in ("raise", "floor"):
            raise ContractError("on_degenerate must be 'raise' or 'floor'")

    def with_seed(self, seed: int) -> "DepthSpec":
        return replace(self, rng_seed=int(seed))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "bandwidth_percentile": self.bandwidth_percentile,
            "projections": self.projections,
            "band_order": self.band_order,
            "rng_seed": self.rng_seed,
            "on_degenerate": self.on_degenerate,
        }


@dataclass(frozen=True, eq=False)
class DepthVector:
    """Depth of every curve of a sample, in sample order."""

    values: np.ndarray
    spec: DepthSpec

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def argmax(self) -> int:
        return int(np.argmax(self.values))


def truncated_gaussian(t):
    """Gaussian kernel restricted to ``t >= 0`` and renormalized: ``2 phi(t)``."""
    t = np.asarray(t, dtype=float)
    return _K0 * np.exp(-0.5 * t * t)


def draw_directions(grid, count: int, seed: int) -> np.ndarray:
    """``count`` random direction curves with unit L2 norm on ``grid``.

    Grid values are iid standard normal; each row is rescaled by its
    trapezoid L2 norm.
    """
    rng = np.random.default_rng(seed)
    nu = rng.standard_normal((count, len(grid)))
    norms = np.sqrt(trapezoid_integral(nu * nu, grid))
    return nu / norms[:, None]


def _project(values, directions, grid):
    """Matrix ``T[i, p]`` of trapezoid inner products of curve ``i`` with direction ``p``.

    Summed row by row rather than through BLAS so identical curves always get
    bit-identical projections.
    """
    w = trapezoid_weights(grid)
    return (values[:, None, :] * (directions * w)[None, :, :]).sum(axis=2)


def _bandwidth_q(spec):
    return spec.bandwidth_percentile / 100.0


def _check_bandwidth(h, spec, floor):
    if floor:
        return np.maximum(h, BANDWIDTH_FLOOR)
    if np.any(h < BANDWIDTH_FLOOR):
        raise DegenerateSampleError(
            "bandwidth collapsed to zero: the curves are (nearly) identical"
        )
    return h


def _count_below(ref, cand, strict=True):
    """Per-column counts of reference values ``<=`` (and ``<``) each candidate value.

    ``ref`` is ``(n, m)``, ``cand`` is ``(c, m)``; counts are ``(c, m)``.
    Returns ``(lt, le)``, with ``lt`` None when ``strict`` is false.
    """
    m = ref.shape[1]
    srt = np.sort(ref, axis=0)
    le = np.empty(cand.shape, dtype=np.intp)
    lt = np.empty(cand.shape, dtype=np.intp) if strict else None
    for k in range(m):
        col = srt[:, k]
        le[:, k] = np.searchsorted(col, cand[:, k], side="right")
        if strict:
            lt[:, k] = np.searchsorted(col, cand[:, k], side="left")
    return lt, le


def _pairs2(k):
    return k * (k - 1) / 2.0


def _kth_of_union(a_sorted, b_sorted, k):
    """k-th smallest (1-based) of ``a`` union ``b`` for a batch of ``b`` sets.

    ``a_sorted`` has shape ``(..., 1, na)`` and ``b_sorted`` ``(..., c, nb)``,
    both sorted on the last axis.  Uses
    ``kth = min_j max(a[k-j-1], b[j-1])`` over admissible splits ``j``.
    """
    na = a_sorted.shape[-1]
    nb = b_sorted.shape[-1]
    j = np.arange(max(0, k - na), min(k, nb) + 1)
    ia = k - j - 1
    ib = j - 1
    av = np.where(ia >= 0, a_sorted[..., np.clip(ia, 0, None)] if na else -np.inf, -np.inf)
    bv = np.where(ib >= 0, b_sorted[..., np.clip(ib, 0, None)], -np.inf)
    return np.min(np.maximum(av, bv), axis=-1)


def _pack_bits(mask):
    """Pack a boolean ``(..., m)`` array into ``(..., W)`` uint64 words."""
    packed = np.packbits(mask, axis=-1)
    pad = (-packed.shape[-1]) % 8
    if pad:
        widths = [(0, 0)] * (packed.ndim - 1) + [(0, pad)]
        packed = np.pad(packed, widths)
    return np.ascontiguousarray(packed).view(np.uint64)


def _band_counts(ref, targets):
    """Number of pairs ``a < b`` of ``ref`` whose band contains each target at every grid point.

    A pair fails to contain ``g`` exactly when both curves lie strictly below
    ``g`` at some common grid point, or both strictly above.  Those events are
    tested with bitwise AND on packed per-curve masks.
    """
    n, m = ref.shape
    c = targets.shape[0]
    counts = np.zeros(c, dtype=np.int64)
    if n < 2:
        return counts
    iu = np.triu_indices(n, 1)
    words = (m + 63) // 64
    step = max(1, _CHUNK // (n * n * words))
    for s in range(0, c, step):
        tg = targets[s:s + step, None, :]
        below = _pack_bits(ref[None] < tg)  # (c, n, W)
        above = _pack_bits(ref[None] > tg)
        clash = ((below[:, :, None, :] & below[:, None, :, :]) != 0).any(axis=-1)
        clash |= ((above[:, :, None, :] & above[:, None, :, :]) != 0).any(axis=-1)
        counts[s:s + step] = (~clash[:, iu[0], iu[1]]).sum(axis=1)
    return counts


# -- whole-sample depths ----------------------------------------------------


def depth_fm(sample: FunctionalSample) -> DepthVector:
    """Fraiman-Muniz depth, normalized by the length of the grid interval."""
    x = sample.values
    n = x.shape[0]
    srt = np.sort(x, axis=0)
    le = np.empty(x.shape, dtype=float)
    for k in range(x.shape[1]):
        le[:, k] = np.searchsorted(srt[:, k], x[:, k], side="right")
    d = 1.0 - np.abs(0.5 - le / n)
    vals = trapezoid_integral(d, sample.grid) / sample.grid.length
    return DepthVector(np.atleast_1d(vals), DepthSpec(DepthKind.FM))


def depth_hmodal(sample: FunctionalSample, spec: DepthSpec | None = None) -> DepthVector:
    """h-modal depth with the truncated Gaussian kernel and L2 distance.

    The bandwidth is the ``bandwidth_percentile`` order statistic of the
    ``n(n-1)/2`` pairwise distances; the self term ``K(0)`` is included.
    """
    spec = spec or DepthSpec(DepthKind.HMODAL)
    n = sample.n
    if n < 2:
        raise DegenerateInputError("h-modal depth needs at least two curves")
    x = sample.values
    d2 = trapezoid_integral((x[:, None, :] - x[None, :, :]) ** 2, sample.grid)
    dist = np.sqrt(np.maximum(d2, 0.0))
    iu = np.triu_indices(n, 1)
    pair = dist[iu]
    r = order_statistic_rank(_bandwidth_q(spec), pair.size)
    h = np.partition(pair, r - 1)[r - 1]
    h = float(_check_bandwidth(h, spec, spec.on_degenerate == "floor"))
    vals = truncated_gaussian(dist / h).sum(axis=1)
    return DepthVector(vals, spec)


def depth_rpd(sample: FunctionalSample, spec: DepthSpec | None = None) -> DepthVector:
    """Random projection depth using univariate h-modal depth of the projections."""
    spec = spec or DepthSpec(DepthKind.RPD)
    n = sample.n
    if n < 2:
        raise DegenerateInputError("random projection depth needs at least two curves")
    nu = draw_directions(sample.grid, spec.projections, spec.rng_seed)
    t = _project(sample.values, nu, sample.grid).T  # (P, n)
    diff = np.abs(t[:, :, None] - t[:, None, :])  # (P, n, n)
    iu = np.triu_indices(n, 1)
    pair = diff[:, iu[0], iu[1]]
    r = order_statistic_rank(_bandwidth_q(spec), pair.shape[1])
    h = np.partition(pair, r - 1, axis=1)[:, r - 1]
    h = np.maximum(h, BANDWIDTH_FLOOR)
    vals = truncated_gaussian(diff / h[:, None, None]).sum(axis=2).mean(axis=0)
    return DepthVector(vals, spec)


def depth_bd(sample: FunctionalSample) -> DepthVector:
    """Band depth over pairs of curves, inclusive band boundaries."""
    n = sample.n
    if n < 2:
        raise DegenerateInputError("band depth needs at least two curves")
    x = sample.values
    vals = _band_counts(x, x) / _pairs2(n)
    return DepthVector(vals, DepthSpec(DepthKind.BD))


def depth_mbd(sample: FunctionalSample) -> DepthVector:
    """Modified band depth: trapezoid-weighted fraction of time inside each pair's band."""
    n = sample.n
    if n < 2:
        raise DegenerateInputError("modified band depth needs at least two curves")
    x = sample.values
    lt, le = _count_below(x, x)
    gt = n - le
    inside = _pairs2(n) - _pairs2(lt) - _pairs2(gt)
    frac = trapezoid_integral(inside, sample.grid) / sample.grid.length
    return DepthVector(np.atleast_1d(frac / _pairs2(n)), DepthSpec(DepthKind.MBD))


def compute_depth(sample: FunctionalSample, spec: DepthSpec) -> DepthVector:
    """Depth of every curve of ``sample`` according to ``spec``."""
    kind = spec.kind
    if kind is DepthKind.FM:
        out = depth_fm(sample)
    elif kind is DepthKind.HMODAL:
        return depth_hmodal(sample, spec)
    elif kind is DepthKind.RPD:
        return depth_rpd(sample, spec)
    elif kind is DepthKind.BD:
        out = depth_bd(sample)
    else:
        out = depth_mbd(sample)
    return DepthVector(out.values, spec)


# -- depth with respect to a reference sample ------------------------------


def _wrt_fm(ref, cand, grid):
    n = ref.shape[0]
    _, le = _count_below(ref, cand, strict=False)
    d = 1.0 - np.abs(0.5 - (le + 1) / (n + 1))
    return trapezoid_integral(d, grid) / grid.length


def _wrt_hmodal(ref, cand, grid, spec):
    n = ref.shape[0]
    w = trapezoid_weights(grid)
    dr = np.sqrt(np.maximum(((ref[:, None, :] - ref[None, :, :]) ** 2) @ w, 0.0))
    a = np.sort(dr[np.triu_indices(n, 1)])[None, :]
    b = np.sqrt(np.maximum(((cand[:, None, :] - ref[None, :, :]) ** 2) @ w, 0.0))
    k = order_statistic_rank(_bandwidth_q(spec), n * (n + 1) // 2)
    h = _kth_of_union(a, np.sort(b, axis=1), k)
    h = _check_bandwidth(h, spec, spec.on_degenerate == "floor")
    return _K0 + truncated_gaussian(b / h[:, None]).sum(axis=1)


def _wrt_rpd(ref, cand, grid, spec):
    n = ref.shape[0]
    nu = draw_directions(grid, spec.projections, spec.rng_seed)
    tr = _project(ref, nu, grid).T  # (P, n)
    tc = _project(cand, nu, grid).T  # (P, c)
    iu = np.triu_indices(n, 1)
    a = np.sort(np.abs(tr[:, iu[0]] - tr[:, iu[1]]), axis=1)[:, None, :]
    b = np.abs(tc[:, :, None] - tr[:, None, :])  # (P, c, n)
    k = order_statistic_rank(_bandwidth_q(spec), n * (n + 1) // 2)
    h = np.maximum(_kth_of_union(a, np.sort(b, axis=2), k), BANDWIDTH_FLOOR)
    per_proj = _K0 + truncated_gaussian(b / h[:, :, None]).sum(axis=2)
    return per_proj.mean(axis=0)


def _wrt_bd(ref, cand):
    n = ref.shape[0]
    return (n + _band_counts(ref, cand)) / _pairs2(n + 1)


def _wrt_mbd(ref, cand, grid):
    n = ref.shape[0]
    lt, le = _count_below(ref, cand)
    gt = n - le
    inside = _pairs2(n) - _pairs2(lt) - _pairs2(gt)
    frac = trapezoid_integral(inside, grid) / grid.length
    return (n + frac) / _pairs2(n + 1)


def depth_wrt_many(ref: FunctionalSample, candidates, spec: DepthSpec) -> np.ndarray:
    """Depth of each candidate curve within ``ref`` plus that candidate.

    Parameters
    ----------
    ref : FunctionalSample
        Reference sample ``F``.
    candidates : FunctionalSample or array_like, shape (c, m)
        Curves ``g``; each one is evaluated independently in ``F + [g]``.
    spec : DepthSpec

    Returns
    -------
    numpy.ndarray, shape (c,)
    """
    if isinstance(candidates, FunctionalSample):
        check_same_grid(ref, candidates)
        cand = candidates.values
    else:
        cand = np.atleast_2d(np.asarray(candidates, dtype=float))
        if cand.shape[1] != ref.m:
            raise ContractError("candidate curves do not conform to the reference grid")
        if not np.all(np.isfinite(cand)):
            raise ContractError("curve values must be finite")
    x = ref.values
    grid = ref.grid
    kind = spec.kind
    if kind is DepthKind.FM:
        return np.atleast_1d(_wrt_fm(x, cand, grid))
    if kind is DepthKind.HMODAL:
        return _wrt_hmodal(x, cand, grid, spec)
    if kind is DepthKind.RPD:
        return _wrt_rpd(x, cand, grid, spec)
    if kind is DepthKind.BD:
        return _wrt_bd(x, cand)
    return np.atleast_1d(_wrt_mbd(x, cand, grid))


def depth_wrt(ref: FunctionalSample, g, spec: DepthSpec) -> float:
    """Depth of curve ``g`` with respect to the sample ``ref + [g]``."""
    g = as_curve(g, ref.grid)
    return float(depth_wrt_many(ref, g[None, :], spec)[0])


def deepest(ref: FunctionalSample, sample: FunctionalSample, spec: DepthSpec):
    """Index and depth of the curve of ``sample`` deepest with respect to ``ref``.

    Ties go to the lowest index.
    """
    check_same_grid(ref, sample)
    vals = depth_wrt_many(ref, sample.values, spec)
    i = int(np.argmax(vals))
    return i, float(vals[i])
