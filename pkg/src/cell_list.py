from __future__ import annotations

import itertools
import math
from typing import List, Tuple

import numpy as np
from loguru import logger

from .errors import DegenerateGridError, ParameterError

# cell-pair expansions are evaluated this many point pairs at a time
MAX_CHUNK = 1 << 22

# cells slightly wider than the radius keep rounding in the cell index from splitting a close pair
_CELL_SLACK = 1.0 + 1e-9

_KEY_LIMIT = float(1 << 62)


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """row-wise |a - b|^2, summed coordinate by coordinate in a fixed order"""
    diff = a - b
    total = diff[..., 0] * diff[..., 0]
    for k in range(1, diff.shape[-1]):
        total = total + diff[..., k] * diff[..., k]
    return total


def half_shell_offsets(dim: int) -> np.ndarray:
    """neighbour offsets in {-1, 0, 1}^dim whose first nonzero entry is positive"""
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=dim)
               if any(o) and next(v for v in o if v != 0) > 0]
    return np.array(offsets, dtype=np.int64)


def _count_rectangle(points: np.ndarray, rows: np.ndarray, cols: np.ndarray, r2: float, same: bool) -> int:
    # all pairs between two index ranges, broadcast in row slices
    count = 0
    step = max(1, MAX_CHUNK // max(len(cols), 1))
    b = points[cols]
    for start in range(0, len(rows), step):
        a = points[rows[start:start + step]]
        d2 = squared_distances(a[:, None, :], b[None, :, :])
        if same:
            i = np.arange(start, start + len(a))[:, None]
            j = np.arange(len(cols))[None, :]
            d2 = np.where(j > i, d2, np.inf)
        count += int(np.count_nonzero(d2 < r2))
    return count


class CellList:
    """
    spatial hash of a point cloud over a grid of side cell_size anchored at the origin

    cells are addressed by a mixed-radix int64 key with a one-cell margin, so neighbour keys
    are found by adding a fixed offset and searching the sorted key array

    Attributes:
        points: the cloud sorted by cell key
        cell_size: grid side
        keys: sorted unique cell keys
        starts: index of the first point of each cell in points
        counts: number of points per cell
        strides: mixed-radix strides per axis
    """

    def __init__(self, points: np.ndarray, cell_size: float) -> None:
        """
        Raises:
            ParameterError: on an empty cloud or a nonpositive cell size
            DegenerateGridError: if the grid has too many cells to key in 62 bits
        """
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or len(points) == 0:
            raise ParameterError(f"need a nonempty (n, d) cloud, got shape {points.shape}")
        if not cell_size > 0.0:
            raise ParameterError(f"cell size must be positive, got {cell_size!r}")

        coords = np.floor(points / cell_size).astype(np.int64)
        lo = coords.min(axis=0) - 1
        span = coords.max(axis=0) - lo + 2
        if math.prod(float(s) for s in span) >= _KEY_LIMIT:
            raise DegenerateGridError(f"grid of side {cell_size!r} has too many cells for this cloud")

        strides = np.ones(points.shape[1], dtype=np.int64)
        for k in range(points.shape[1] - 2, -1, -1):
            strides[k] = strides[k + 1] * span[k + 1]
        keys = (coords - lo) @ strides

        order = np.argsort(keys, kind="stable")
        self.points: np.ndarray = points[order]
        self.cell_size = cell_size
        self.strides = strides
        self.keys, self.starts, self.counts = np.unique(keys[order], return_index=True, return_counts=True)

    def __len__(self) -> int:
        return len(self.points)

    def neighbour_cell_pairs(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(cell a, cell b) index arrays for every occupied half-shell neighbour pair"""
        pairs = []
        for offset in half_shell_offsets(self.points.shape[1]):
            target = self.keys + int(offset @ self.strides)
            idx = np.searchsorted(self.keys, target)
            idx_clipped = np.minimum(idx, len(self.keys) - 1)
            found = (idx < len(self.keys)) & (self.keys[idx_clipped] == target)
            if found.any():
                pairs.append((np.nonzero(found)[0], idx_clipped[found]))
        return pairs

    def pair_count(self, radius: float) -> int:
        """
        number of unordered pairs at distance strictly below radius

        Raises:
            ParameterError: if radius exceeds the cell size
        """
        if radius > self.cell_size:
            raise ParameterError(f"radius {radius!r} exceeds cell size {self.cell_size!r}")
        r2 = radius * radius
        total = self._count_cells(np.arange(len(self.keys)), np.arange(len(self.keys)), r2, same=True)
        for cells_a, cells_b in self.neighbour_cell_pairs():
            total += self._count_cells(cells_a, cells_b, r2, same=False)
        return total

    def _count_cells(self, cells_a: np.ndarray, cells_b: np.ndarray, r2: float, same: bool) -> int:
        starts_a, counts_a = self.starts[cells_a], self.counts[cells_a]
        starts_b, counts_b = self.starts[cells_b], self.counts[cells_b]
        sizes = counts_a * counts_b
        if same:
            keep = counts_a > 1
            starts_a, counts_a, starts_b, counts_b, sizes = (v[keep] for v in (starts_a, counts_a, starts_b,
                                                                                 counts_b, sizes))

        count = 0
        big = sizes > MAX_CHUNK
        for i in np.nonzero(big)[0]:
            rows = np.arange(starts_a[i], starts_a[i] + counts_a[i])
            cols = np.arange(starts_b[i], starts_b[i] + counts_b[i])
            count += _count_rectangle(self.points, rows, cols, r2, same)

        small = np.nonzero(~big)[0]
        bounds = np.cumsum(sizes[small])
        begin = 0
        while begin < len(small):
            base = bounds[begin - 1] if begin else 0
            end = int(np.searchsorted(bounds, base + MAX_CHUNK, side="right"))
            end = max(end, begin + 1)
            sel = small[begin:end]
            count += self._count_expanded(starts_a[sel], counts_a[sel], starts_b[sel], counts_b[sel], r2, same)
            begin = end
        return count

    def _count_expanded(self, starts_a, counts_a, starts_b, counts_b, r2: float, same: bool) -> int:
        sizes = counts_a * counts_b
        total = int(sizes.sum())
        if total == 0:
            return 0
        offsets = np.repeat(np.cumsum(sizes) - sizes, sizes)
        local = np.arange(total, dtype=np.int64) - offsets
        width = np.repeat(counts_b, sizes)
        i = np.repeat(starts_a, sizes) + local // width
        j = np.repeat(starts_b, sizes) + local % width
        if same:
            keep = i < j
            i, j = i[keep], j[keep]
        return int(np.count_nonzero(squared_distances(self.points[i], self.points[j]) < r2))


def brute_force_pair_count(points: np.ndarray, radius: float) -> int:
    """reference O(n^2) count using the same squared-distance arithmetic as CellList"""
    points = np.asarray(points, dtype=float)
    i, j = np.triu_indices(len(points), k=1)
    return int(np.count_nonzero(squared_distances(points[i], points[j]) < radius * radius))


def pair_count(points: np.ndarray, radius: float) -> int:
    """pairs closer than radius, counted with a cell list of side just above radius"""
    return CellList(points, radius * _CELL_SLACK).pair_count(radius)


def adaptive_pair_count(points: np.ndarray, radius: float, target_pairs: int = 100_000,
                        min_points: int = 2000) -> Tuple[int, int]:
    """
    counts close pairs on the shortest sample prefix that reaches target_pairs

    the prefix grows until the target is met or the whole cloud is used

    Returns:
        (pair count, prefix length used)
    """
    n_total = len(points)
    n = min(n_total, max(min_points, 2))
    while True:
        count = pair_count(points[:n], radius)
        if count >= target_pairs or n == n_total:
            return count, n
        growth = math.sqrt(target_pairs / max(count, 1)) * 1.1
        n_next = min(n_total, max(2 * n, int(n * growth)))
        logger.trace(f"[cells] radius {radius:.3g}: {count} pairs on {n} points, growing to {n_next}")
        n = n_next
