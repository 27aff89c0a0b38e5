from __future__ import annotations

import numpy as np

from pointhop.errors import TooManyRequested
from pointhop.geometry._kernels import fps_kernel
from pointhop.pcio.cloud import PointCloud
from pointhop.rng import make_rng


def canonical_order(points: np.ndarray) -> np.ndarray:
    """Indices sorting points lexicographically by (x, y, z)."""
    return np.lexsort((points[:, 2], points[:, 1], points[:, 0]))


def canonicalize(pc: PointCloud) -> PointCloud:
    return pc.take(canonical_order(pc.points))


def _check_count(n: int, total: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > total:
        raise TooManyRequested(f"requested {n} points from a cloud of {total}")


def random_subsample_indices(count: int, n: int, seed: int) -> np.ndarray:
    """``n`` distinct indices of ``range(count)``, ascending."""
    _check_count(n, count)
    rng = make_rng(seed)
    return np.sort(rng.choice(count, size=n, replace=False)).astype(np.int64)


def random_dropout(pc: PointCloud, n: int, seed: int) -> PointCloud:
    """Uniform subset of ``n`` points, returned in canonical order.

    Selection runs on the canonical ordering, so the file order of the input
    never changes which points survive.
    """
    _check_count(n, len(pc))
    canon = canonicalize(pc)
    return canon.take(random_subsample_indices(len(canon), n, seed))


def fps_indices(points: np.ndarray, n: int) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    _check_count(n, pts.shape[0])
    centroid = pts.mean(axis=0)
    diff = pts - centroid
    start = int(np.argmin(diff[:, 0] ** 2 + diff[:, 1] ** 2 + diff[:, 2] ** 2))
    return fps_kernel(pts, int(n), start)


def farthest_point_sample(pc: PointCloud, n: int) -> np.ndarray:
    """Greedy farthest point sampling seeded at the point nearest the centroid.

    Ties go to the lowest point index. Returns indices in selection order.
    """
    return fps_indices(pc.points, n)
