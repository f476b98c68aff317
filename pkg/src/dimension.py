from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import stats

from .cell_list import adaptive_pair_count
from .errors import DegenerateGridError, EstimationError, ParameterError

MIN_SCALES = 4
FALLBACK_R_SQUARED = 0.9
MIN_CORRELATION_SAMPLES = 1000
MIN_POINTWISE_SAMPLES = 10_000
DIVERGENCE_GROWTH = 1.2
MIN_POTENTIAL_BLOCKS = 30
MIN_POTENTIAL_BLOCK = 100

TRANSFORMS = ("box", "information", "correlation", "pointwise", "renyi", "mean-log")


@dataclass
class PointCloud:
    """
    finite sample of points with where it came from

    Attributes:
        points: (n, d) float array
        provenance: free-form record (sampler, seed, parameters)
    """
    points: np.ndarray
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if len(self.points) < 2:
            raise ParameterError(f"a point cloud needs at least 2 points, got {len(self.points)}")
        if not np.all(np.isfinite(self.points)):
            raise ParameterError("point cloud contains non-finite coordinates")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


Cloud = Union[PointCloud, np.ndarray]


def _as_points(cloud: Cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    points = np.atleast_2d(np.asarray(cloud, dtype=float))
    if len(points) == 0:
        raise ParameterError("empty point set")
    return points


@dataclass(frozen=True)
class ScaleStatistic:
    """
    one raw statistic at one scale

    Attributes:
        epsilon: scale
        statistic: occupied boxes, entropy sum, correlation sum, ball mass, ...
        count: raw count behind the statistic (boxes or pairs)
        support: points the statistic was computed on
    """
    epsilon: float
    statistic: float
    count: int = 0
    support: int = 0


@dataclass
class DimensionEstimate:
    """
    slope fit over a window of scales

    Attributes:
        value: dimension estimate
        scale_window: (smallest, largest) epsilon used in the fit
        slope_stderr: standard error of the slope
        r_squared: goodness of the fit
        counts: every statistic passed in, fitted or not
        dropped: scales excluded for non-finite statistics
        method: "ols" or "theil-sen"
        intercept: fitted intercept
    """
    value: float
    scale_window: Tuple[float, float]
    slope_stderr: float
    r_squared: float
    counts: List[ScaleStatistic]
    dropped: List[float] = field(default_factory=list)
    method: str = "ols"
    intercept: float = 0.0


@dataclass(frozen=True)
class BoxCount:
    """
    occupied grid cells at one scale

    Attributes:
        epsilon: grid side
        occupied: number of nonempty cells
        masses: fraction of the cloud per nonempty cell
    """
    epsilon: float
    occupied: int
    masses: np.ndarray


@dataclass
class PotentialEstimate:
    """
    partial means of |x - x_i|^-s over growing sample prefixes

    Attributes:
        s: potential exponent
        sample_sizes: prefix lengths
        partial_means: mean of the kernel over each prefix
        divergence_flag: "divergent", "convergent" or "undetermined"
        block_sizes: decade block lengths the flag is decided on
        block_medians: median over disjoint blocks of the block mean, per block length
    """
    s: float
    sample_sizes: List[int]
    partial_means: List[float]
    divergence_flag: str
    block_sizes: List[int] = field(default_factory=list)
    block_medians: List[float] = field(default_factory=list)


def default_window(dim: int) -> List[float]:
    """dyadic scales 2^-3 .. 2^-10 for 4-D clouds, 2^-3 .. 2^-14 otherwise"""
    k_max = 10 if dim >= 4 else 14
    return dyadic_window(3, k_max)


def dyadic_window(k_min: int, k_max: int) -> List[float]:
    """scales 2^-k for k = k_min .. k_max, coarsest first"""
    if k_max < k_min:
        raise ParameterError(f"empty dyadic window {k_min}..{k_max}")
    return [2.0 ** -k for k in range(k_min, k_max + 1)]


def _cell_keys(points: np.ndarray, epsilon: float, offset: Optional[np.ndarray]) -> np.ndarray:
    shifted = points if offset is None else points - offset
    coords = np.floor(shifted / epsilon).astype(np.int64)
    lo = coords.min(axis=0)
    span = coords.max(axis=0) - lo + 1
    if math.prod(float(s) for s in span) < float(1 << 62):
        strides = np.ones(points.shape[1], dtype=np.int64)
        for k in range(points.shape[1] - 2, -1, -1):
            strides[k] = strides[k + 1] * span[k + 1]
        return (coords - lo) @ strides
    _, inverse = np.unique(coords, axis=0, return_inverse=True)
    return inverse.reshape(-1)


def box_count(cloud: Cloud, epsilon: float, offset: Optional[Sequence[float]] = None) -> BoxCount:
    """
    occupied cells of the grid of side epsilon anchored at the origin (or at offset)

    Raises:
        ParameterError: if epsilon is not positive
        DegenerateGridError: if epsilon is below 1e-12 times the cloud diameter
    """
    points = _as_points(cloud)
    if not epsilon > 0.0:
        raise ParameterError(f"epsilon must be positive, got {epsilon!r}")
    diameter = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
    if diameter > 0.0 and epsilon < 1e-12 * diameter:
        raise DegenerateGridError(f"epsilon {epsilon!r} is below 1e-12 of the diameter {diameter!r}")

    shift = None if offset is None else np.asarray(offset, dtype=float)
    _, counts = np.unique(_cell_keys(points, epsilon, shift), return_counts=True)
    return BoxCount(epsilon, len(counts), counts / len(points))


def _window_filter(stats_in: Sequence[ScaleStatistic], window: Optional[Tuple[float, float]]):
    if window is None:
        return list(stats_in)
    lo, hi = min(window), max(window)
    return [s for s in stats_in if lo <= s.epsilon <= hi]


def _response(transform: str, statistic: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        if transform in ("box", "correlation", "pointwise"):
            return np.log(statistic)
    return statistic


def fit_dimension(scale_stats: Sequence[ScaleStatistic], transform: str,
                  window: Optional[Tuple[float, float]] = None, method: str = "auto",
                  fallback_r_squared: float = FALLBACK_R_SQUARED) -> DimensionEstimate:
    """
    least-squares slope of the transformed statistic against log epsilon

    box fits log N against log epsilon and reports the negated slope; information,
    renyi and mean-log fit the statistic itself; correlation and pointwise fit its log.
    method "auto" uses ordinary least squares and switches to the Theil-Sen slope when
    r^2 falls below fallback_r_squared

    Raises:
        EstimationError: with fewer than MIN_SCALES usable scales
    """
    if transform not in TRANSFORMS:
        raise ParameterError(f"unknown transform {transform!r}, expected one of {TRANSFORMS}")
    if method not in ("auto", "ols", "theil-sen"):
        raise ParameterError(f"unknown fit method {method!r}")

    chosen = _window_filter(scale_stats, window)
    eps = np.array([s.epsilon for s in chosen], dtype=float)
    y = _response(transform, np.array([s.statistic for s in chosen], dtype=float))
    finite = np.isfinite(y) & (eps > 0.0)
    dropped = [float(e) for e in eps[~finite]]
    if dropped:
        logger.debug(f"[fit] dropping {len(dropped)} scales with non-finite statistics: {dropped}")
    eps, y = eps[finite], y[finite]
    if len(eps) < MIN_SCALES:
        raise EstimationError(f"only {len(eps)} usable scales, need at least {MIN_SCALES}")

    log_eps = np.log(eps)
    sign = -1.0 if transform == "box" else 1.0
    if np.ptp(y) == 0.0:
        # constant statistic: zero slope, perfect fit
        return DimensionEstimate(0.0, (float(eps.min()), float(eps.max())), 0.0, 1.0, list(scale_stats),
                                 dropped, "ols", float(y[0]))

    fit = stats.linregress(log_eps, y)
    slope, intercept, stderr = float(fit.slope), float(fit.intercept), float(fit.stderr)
    r_squared = float(fit.rvalue ** 2)
    used = "ols"
    if method == "theil-sen" or (method == "auto" and r_squared < fallback_r_squared):
        slope, intercept, low, high = (float(v) for v in stats.theilslopes(y, log_eps))
        residual = y - (intercept + slope * log_eps)
        r_squared = max(0.0, 1.0 - float(np.sum(residual ** 2)) / float(np.sum((y - y.mean()) ** 2)))
        stderr = (high - low) / (2.0 * 1.96)
        used = "theil-sen"
        logger.debug(f"[fit] {transform} fit switched to theil-sen, r^2 {r_squared:.3f}")

    return DimensionEstimate(sign * slope, (float(eps.min()), float(eps.max())), stderr, r_squared,
                             list(scale_stats), dropped, used, intercept)


def box_dimension(cloud: Cloud, window: Optional[Sequence[float]] = None,
                  offset: Optional[Sequence[float]] = None) -> DimensionEstimate:
    """box-counting dimension from occupied cells over a list of scales"""
    points = _as_points(cloud)
    scales = sorted(window if window is not None else default_window(points.shape[1]), reverse=True)
    counts = [box_count(points, e, offset) for e in scales]
    occupied = [c.occupied for c in counts]
    if any(a > b for a, b in zip(occupied, occupied[1:])):
        logger.warning("[box] occupied cell count decreased at a finer scale")
    stats_out = [ScaleStatistic(c.epsilon, float(c.occupied), c.occupied, len(points)) for c in counts]
    return fit_dimension(stats_out, "box")


def information_dimension_grid(cloud: Cloud, window: Optional[Sequence[float]] = None,
                               offset: Optional[Sequence[float]] = None) -> DimensionEstimate:
    """slope of sum p log p over grid cells against log epsilon"""
    points = _as_points(cloud)
    scales = sorted(window if window is not None else default_window(points.shape[1]), reverse=True)
    stats_out = []
    for e in scales:
        counted = box_count(points, e, offset)
        p = counted.masses
        stats_out.append(ScaleStatistic(e, float(np.sum(p * np.log(p))), counted.occupied, len(points)))
    return fit_dimension(stats_out, "information")


def renyi_dimension_grid(cloud: Cloud, q: float, window: Optional[Sequence[float]] = None,
                         offset: Optional[Sequence[float]] = None) -> DimensionEstimate:
    """
    generalized dimension D_q from log(sum p^q) / (q - 1) over grid cells

    Raises:
        ParameterError: for q = 1 (use information_dimension_grid) or q outside [0, 2]
    """
    if q == 1.0 or not 0.0 <= q <= 2.0:
        raise ParameterError(f"q must lie in [0, 2] and differ from 1, got {q!r}")
    points = _as_points(cloud)
    scales = sorted(window if window is not None else default_window(points.shape[1]), reverse=True)
    stats_out = []
    for e in scales:
        counted = box_count(points, e, offset)
        value = math.log(float(np.sum(counted.masses ** q))) / (q - 1.0)
        stats_out.append(ScaleStatistic(e, value, counted.occupied, len(points)))
    return fit_dimension(stats_out, "renyi")


def correlation_dimension(cloud: Cloud, window: Optional[Sequence[float]] = None,
                          target_pairs: int = 100_000) -> DimensionEstimate:
    """
    slope of log C(epsilon) against log epsilon, C the fraction of pairs closer than epsilon

    each scale is counted on the shortest sample prefix holding target_pairs close pairs,
    so large clouds only pay for the fine scales

    Raises:
        EstimationError: with fewer than MIN_CORRELATION_SAMPLES points
    """
    points = _as_points(cloud)
    if len(points) < MIN_CORRELATION_SAMPLES:
        raise EstimationError(f"correlation dimension needs at least {MIN_CORRELATION_SAMPLES} points, "
                              f"got {len(points)}")
    scales = sorted(window if window is not None else default_window(points.shape[1]), reverse=True)
    stats_out = []
    for e in scales:
        pairs, used = adaptive_pair_count(points, e, target_pairs)
        fraction = pairs / (used * (used - 1) / 2.0)
        stats_out.append(ScaleStatistic(e, fraction, pairs, used))
        logger.debug(f"[correlation] epsilon {e:.3g}: {pairs} pairs on {used} points")
    return fit_dimension(stats_out, "correlation")


def _ball_masses(points: np.ndarray, center: np.ndarray, scales: Sequence[float],
                 exclude_index: Optional[int]) -> Tuple[np.ndarray, int]:
    d = np.sqrt(np.sum((points - center) ** 2, axis=1))
    if exclude_index is not None:
        d = np.delete(d, exclude_index)
    d.sort()
    inside = np.searchsorted(d, np.asarray(scales, dtype=float), side="left")
    return inside / len(d), len(d)


def pointwise_dimension(cloud: Cloud, x: Sequence[float], window: Optional[Sequence[float]] = None,
                        exclude_index: Optional[int] = None,
                        min_samples: int = MIN_POINTWISE_SAMPLES) -> DimensionEstimate:
    """
    local dimension at x from the mass of balls B(x, epsilon)

    Args:
        cloud: samples of the measure
        x: center
        window: scales
        exclude_index: index of x in the cloud, removed from the masses
        min_samples: smallest admissible cloud

    Raises:
        EstimationError: if the cloud is too small
    """
    points = _as_points(cloud)
    if len(points) < min_samples:
        raise EstimationError(f"pointwise dimension needs at least {min_samples} points, got {len(points)}")
    scales = sorted(window if window is not None else default_window(points.shape[1]), reverse=True)
    masses, support = _ball_masses(points, np.asarray(x, dtype=float), scales, exclude_index)
    stats_out = [ScaleStatistic(e, float(m), int(round(m * support)), support) for e, m in zip(scales, masses)]
    return fit_dimension(stats_out, "pointwise")


def averaged_pointwise_dimension(cloud: Cloud, rng: np.random.Generator, window: Optional[Sequence[float]] = None,
                                 n_centers: int = 50,
                                 min_samples: int = MIN_POINTWISE_SAMPLES) -> DimensionEstimate:
    """
    slope of the log ball mass averaged over random sample centers

    scales where some center's ball holds no other point are dropped

    Raises:
        ParameterError: with fewer than 50 centers
        EstimationError: if the cloud is too small
    """
    if n_centers < 50:
        raise ParameterError(f"averaging needs at least 50 centers, got {n_centers}")
    points = _as_points(cloud)
    if len(points) < min_samples:
        raise EstimationError(f"pointwise dimension needs at least {min_samples} points, got {len(points)}")
    scales = sorted(window if window is not None else default_window(points.shape[1]), reverse=True)
    centers = rng.choice(len(points), size=min(n_centers, len(points)), replace=False)

    logs = np.empty((len(centers), len(scales)))
    for row, index in enumerate(centers):
        masses, _ = _ball_masses(points, points[index], scales, int(index))
        with np.errstate(divide="ignore"):
            logs[row] = np.log(masses)
    mean_log = logs.mean(axis=0)
    stats_out = [ScaleStatistic(e, float(v), len(centers), len(points) - 1) for e, v in zip(scales, mean_log)]
    return fit_dimension(stats_out, "mean-log")


def s_potential(cloud: Cloud, x: Sequence[float], s: float,
                sample_sizes: Optional[Sequence[int]] = None) -> PotentialEstimate:
    """
    partial means of |x - x_i|^-s over nested sample prefixes

    coincident points are skipped. the flag is decided on block lengths 100, 1000, ... that fit at
    least MIN_POTENTIAL_BLOCKS times into the cloud: at each length the cloud is cut into disjoint
    blocks and the median of the block means is taken. divergent when that median grows by more
    than 20% per decade over each of the last two steps

    Raises:
        ParameterError: if s is negative
    """
    if s < 0.0:
        raise ParameterError(f"s must be nonnegative, got {s!r}")
    points = _as_points(cloud)
    d = np.sqrt(np.sum((points - np.asarray(x, dtype=float)) ** 2, axis=1))
    kernel = np.where(d > 0.0, 0.0, np.nan)
    np.power(d, -s, out=kernel, where=d > 0.0)

    if sample_sizes is None:
        sizes = [10 ** k for k in range(3, 12) if 10 ** k <= len(points)]
        if not sizes or sizes[-1] != len(points):
            sizes.append(len(points))
    else:
        sizes = sorted(int(n) for n in sample_sizes if 0 < n <= len(points))

    means = []
    for n in sizes:
        prefix = kernel[:n]
        means.append(float(np.nanmean(prefix)) if np.any(np.isfinite(prefix)) else math.nan)

    block_sizes = []
    n = MIN_POTENTIAL_BLOCK
    while n * MIN_POTENTIAL_BLOCKS <= len(points):
        block_sizes.append(n)
        n *= 10
    medians = []
    for n in block_sizes:
        n_blocks = len(points) // n
        blocks = kernel[:n * n_blocks].reshape(n_blocks, n)
        finite = np.isfinite(blocks)
        counts = finite.sum(axis=1)
        sums = np.where(finite, blocks, 0.0).sum(axis=1)
        block_means = sums[counts > 0] / counts[counts > 0]
        medians.append(float(np.median(block_means)) if len(block_means) else math.nan)

    flag = "undetermined"
    if len(block_sizes) >= 3 and all(math.isfinite(m) and m > 0.0 for m in medians[-3:]):
        # consecutive block lengths are one decade apart
        growth = [m1 / m0 for m0, m1 in zip(medians[-3:-1], medians[-2:])]
        flag = "divergent" if all(rate > DIVERGENCE_GROWTH for rate in growth) else "convergent"
    return PotentialEstimate(s, list(sizes), means, flag, block_sizes, medians)
