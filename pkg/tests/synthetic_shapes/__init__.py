from .fixtures import ShapeDataset, write_dataset
from .shapes import SHAPES, make_shape, make_split

__all__ = [
    "SHAPES",
    "ShapeDataset",
    "make_shape",
    "make_split",
    "write_dataset",
]
