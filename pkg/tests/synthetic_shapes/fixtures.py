from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from pointhop.pcio import DatasetManifest, PointCloud, write_manifest, write_point_set

from .shapes import SHAPES, make_split


@dataclass
class ShapeDataset:
    train: list[PointCloud]
    train_labels: np.ndarray
    test: list[PointCloud]
    test_labels: np.ndarray
    class_names: tuple[str, ...]


def write_dataset(root: Path, dataset: ShapeDataset) -> Path:
    """Packed point sets plus ``train.tsv`` / ``test.tsv`` / ``classes.txt``."""
    for split, clouds, labels in (
        ("train", dataset.train, dataset.train_labels),
        ("test", dataset.test, dataset.test_labels),
    ):
        entries = []
        for i, (cloud, label) in enumerate(zip(clouds, labels)):
            path = root / dataset.class_names[label] / split / f"{i:04d}.php"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(write_point_set(cloud, "php"))
            entries.append((path, int(label)))
        write_manifest(
            DatasetManifest(entries=entries, class_names=list(dataset.class_names), split=split),
            root,
        )
    return root


@pytest.fixture(scope="session")
def shape_dataset() -> ShapeDataset:
    """150 train / 50 test clouds of 256 points per class."""
    train, train_labels = make_split(150, 256, seed=1)
    test, test_labels = make_split(50, 256, seed=2)
    return ShapeDataset(train, train_labels, test, test_labels, SHAPES)


@pytest.fixture
def small_shape_root(tmp_path) -> Path:
    """Two classes, 10 train / 4 test clouds of 128 points, written to disk."""
    shapes = ("sphere", "box")
    train, train_labels = make_split(10, 128, seed=3, shapes=shapes)
    test, test_labels = make_split(4, 128, seed=4, shapes=shapes)
    root = tmp_path / "shapes"
    return write_dataset(root, ShapeDataset(train, train_labels, test, test_labels, shapes))
