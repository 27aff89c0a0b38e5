from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pointhop.errors import DataError


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    colors: np.ndarray | None = None
    label: int | None = None

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise DataError(f"points must have shape (N, 3), got {points.shape}")
        if points.shape[0] < 1:
            raise DataError("point cloud must contain at least one point")
        if not np.all(np.isfinite(points)):
            raise DataError("point coordinates must be finite")
        object.__setattr__(self, "points", points)
        if self.colors is not None:
            colors = np.asarray(self.colors, dtype=np.float64)
            if colors.shape != points.shape:
                raise DataError(
                    f"colors must have shape {points.shape}, got {colors.shape}"
                )
            if not np.all((colors >= 0.0) & (colors <= 1.0)):
                raise DataError("colors must lie in [0, 1]")
            object.__setattr__(self, "colors", colors)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def take(self, indices: np.ndarray) -> PointCloud:
        colors = self.colors[indices] if self.colors is not None else None
        return PointCloud(self.points[indices], colors, self.label)

    def with_points(self, points: np.ndarray) -> PointCloud:
        return PointCloud(points, self.colors, self.label)


def normalize_cloud(pc: PointCloud) -> PointCloud:
    """Center on the centroid and scale into the unit sphere."""
    centered = pc.points - pc.points.mean(axis=0)
    # Second pass removes the residual mean left by rounding.
    centered = centered - centered.mean(axis=0)
    radius = float(np.sqrt((centered * centered).sum(axis=1)).max())
    if radius <= np.finfo(np.float64).tiny:
        return pc.with_points(np.zeros_like(centered))
    return pc.with_points(centered / radius)
