from pointhop.pcio.cloud import PointCloud, normalize_cloud
from pointhop.pcio.manifest import DatasetManifest, load_manifest, write_manifest
from pointhop.pcio.mesh import Mesh, parse_off, sample_mesh_surface
from pointhop.pcio.pointset import read_cloud_file, read_point_set, write_point_set

__all__ = [
    "DatasetManifest",
    "Mesh",
    "PointCloud",
    "load_manifest",
    "normalize_cloud",
    "parse_off",
    "read_cloud_file",
    "read_point_set",
    "sample_mesh_surface",
    "write_manifest",
    "write_point_set",
]
