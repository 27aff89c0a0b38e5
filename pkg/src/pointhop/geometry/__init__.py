from pointhop.geometry.descriptor import N_OCTANTS, octant_descriptor, octant_descriptors
from pointhop.geometry.knn import LocalRegion, SpatialIndex, knn, knn_batch
from pointhop.geometry.sampling import (
    canonical_order,
    canonicalize,
    farthest_point_sample,
    fps_indices,
    random_dropout,
    random_subsample_indices,
)

__all__ = [
    "N_OCTANTS",
    "LocalRegion",
    "SpatialIndex",
    "canonical_order",
    "canonicalize",
    "farthest_point_sample",
    "fps_indices",
    "knn",
    "knn_batch",
    "octant_descriptor",
    "octant_descriptors",
    "random_dropout",
    "random_subsample_indices",
]
