from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from pointhop.errors import DimensionMismatch, KTooLarge
from pointhop.metrics import Metrics

logger = logging.getLogger("pointhop")

# Extra tree candidates fetched per query so distance ties at the k-th
# neighbor can usually be resolved without a radius fallback.
_CANDIDATE_SLACK = 8
_BOUND_RTOL = 1e-9


class SpatialIndex:
    """Exact KNN over one cloud's coordinates.

    Backed by ``cKDTree``; candidate distances are recomputed and ordered by
    (squared distance, point index) so results match a brute-force sort.
    """

    def __init__(self, points: np.ndarray):
        pts = np.array(points, dtype=np.float64, order="C")
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise DimensionMismatch(f"points must have shape (N, 3), got {pts.shape}")
        pts.flags.writeable = False
        self.points = pts
        self._tree = cKDTree(pts)

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class LocalRegion:
    center_index: int
    neighbor_indices: np.ndarray  # ascending


def _sq_dists(points: np.ndarray, centers: np.ndarray, cand: np.ndarray) -> np.ndarray:
    sel = points[cand]
    dx = sel[..., 0] - centers[:, None, 0]
    dy = sel[..., 1] - centers[:, None, 1]
    dz = sel[..., 2] - centers[:, None, 2]
    return dx * dx + dy * dy + dz * dz


def _rank(d: np.ndarray, cand: np.ndarray, center_indices: np.ndarray) -> np.ndarray:
    # The center always ranks first: self-inclusion beats exact duplicates.
    d = np.where(cand == center_indices[:, None], -1.0, d)
    order = np.lexsort((cand, d), axis=-1)
    return order


def _fallback(index: SpatialIndex, center: int, k: int, radius_sq: float) -> np.ndarray:
    radius = float(np.sqrt(max(radius_sq, 0.0)))
    radius = radius * (1.0 + _BOUND_RTOL) + 1e-300
    cand = np.asarray(index._tree.query_ball_point(index.points[center], radius), dtype=np.int64)
    if center not in cand:
        cand = np.append(cand, center)
    cand = cand[None, :]
    centers = index.points[[center]]
    d = _sq_dists(index.points, centers, cand)
    order = _rank(d, cand, np.asarray([center]))
    return np.take_along_axis(cand, order, axis=-1)[0, :k]


def knn_batch(
    index: SpatialIndex,
    center_indices: np.ndarray,
    k: int,
    metrics: Metrics | None = None,
) -> np.ndarray:
    """K nearest neighbors (self included) of indexed points; rows ascending."""
    n = len(index)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the {n} indexed points")
    centers_idx = np.asarray(center_indices, dtype=np.int64)
    if centers_idx.size and (centers_idx.min() < 0 or centers_idx.max() >= n):
        raise DimensionMismatch("center index outside the indexed cloud")
    centers = index.points[centers_idx]

    k_extra = min(n, k + _CANDIDATE_SLACK)
    tree_d, cand = index._tree.query(centers, k=list(range(1, k_extra + 1)))
    cand = np.asarray(cand, dtype=np.int64).reshape(len(centers_idx), k_extra)
    tree_d = np.asarray(tree_d).reshape(len(centers_idx), k_extra)

    d = _sq_dists(index.points, centers, cand)
    order = _rank(d, cand, centers_idx)
    cand_sorted = np.take_along_axis(cand, order, axis=-1)
    d_sorted = np.take_along_axis(d, order, axis=-1)
    result = cand_sorted[:, :k].copy()

    if k_extra < n:
        kth = d_sorted[:, k - 1]
        bound = tree_d[:, -1] ** 2
        unsafe = np.flatnonzero(~(kth < bound * (1.0 - _BOUND_RTOL)))
        for row in unsafe:
            result[row] = _fallback(index, int(centers_idx[row]), k, float(kth[row]))
        if len(unsafe) and metrics:
            metrics.inc("knn_fallback_total", len(unsafe))

    result.sort(axis=1)
    return result


def knn(index: SpatialIndex, center_index: int, k: int) -> LocalRegion:
    """Local region of ``k`` points around an indexed point, itself included.

    Distance ties are broken by lowest point index.
    """
    neighbors = knn_batch(index, np.asarray([center_index]), k)[0]
    return LocalRegion(center_index=int(center_index), neighbor_indices=neighbors)
