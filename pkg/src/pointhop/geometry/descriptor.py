from __future__ import annotations

import numpy as np

from pointhop.errors import DimensionMismatch
from pointhop.geometry._kernels import octant_kernel
from pointhop.geometry.knn import LocalRegion

N_OCTANTS = 8


def octant_descriptors(
    points: np.ndarray,
    attrs: np.ndarray,
    centers: np.ndarray,
    neighbors: np.ndarray,
) -> np.ndarray:
    """Batched octant descriptors, shape ``(M, 8 * D)``.

    Block ``j`` holds the mean attribute vector of the neighbors in quadrant
    ``j`` around the matching center, or zeros when that quadrant is empty.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    attrs = np.ascontiguousarray(attrs, dtype=np.float64)
    centers = np.ascontiguousarray(np.atleast_2d(centers), dtype=np.float64)
    neighbors = np.sort(np.atleast_2d(np.asarray(neighbors, dtype=np.int64)), axis=1)
    if attrs.ndim != 2 or attrs.shape[0] != points.shape[0]:
        raise DimensionMismatch(
            f"attributes have {attrs.shape[0]} rows for {points.shape[0]} points"
        )
    if centers.shape[1] != 3 or centers.shape[0] != neighbors.shape[0]:
        raise DimensionMismatch("need one 3D center per neighbor row")
    if neighbors.size and (neighbors.min() < 0 or neighbors.max() >= points.shape[0]):
        raise DimensionMismatch("neighbor index without an attribute row")
    return octant_kernel(points, attrs, centers, np.ascontiguousarray(neighbors))


def octant_descriptor(
    center: np.ndarray,
    region: LocalRegion,
    points: np.ndarray,
    attrs: np.ndarray,
) -> np.ndarray:
    return octant_descriptors(
        points, attrs, np.asarray(center, dtype=np.float64)[None, :], region.neighbor_indices
    )[0]
