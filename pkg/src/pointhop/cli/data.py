from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from pointhop.config import ExperimentConfig
from pointhop.pcio import DatasetManifest, PointCloud, load_manifest, read_cloud_file
from pointhop.rng import seed_for_name
from pointhop.workers import ordered_map

logger = logging.getLogger("pointhop")


@dataclass(frozen=True)
class LoadedSplit:
    clouds: list[PointCloud]
    labels: np.ndarray
    class_names: tuple[str, ...]
    manifest: DatasetManifest


def relative_name(path: Path, root: Path) -> str:
    """Dataset-relative posix path; keys per-file sampling seeds."""
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return path.as_posix()


def converted_name(path: Path, root: Path, class_name: str, split: str) -> Path:
    """Output path of a converted file, always relative to the output root.

    Files under ``root`` keep their layout; anything else lands in
    ``<class>/<split>/<stem>.php``.
    """
    try:
        rel = path.relative_to(root)
    except ValueError:
        rel = None
    if rel is None or ".." in rel.parts:
        return Path(class_name) / split / f"{path.stem}.php"
    return rel.with_suffix(".php")


def read_entry(path: Path, root: Path, *, points: int, seed: int) -> PointCloud:
    return read_cloud_file(path, points=points, seed=seed_for_name(seed, relative_name(path, root)))


def load_split(cfg: ExperimentConfig, split: str) -> LoadedSplit:
    if not cfg.data_root:
        raise ValueError("data_root is required (--data-root or data.root)")
    root = Path(cfg.data_root)
    manifest = load_manifest(root, split)
    clouds = ordered_map(
        lambda path: read_entry(path, root, points=cfg.cloud_points, seed=cfg.seed),
        manifest.paths,
        cfg.workers,
    )
    logger.info(
        "LOAD %s %s clouds=%d classes=%d", root, split, len(clouds), len(manifest.class_names)
    )
    return LoadedSplit(
        clouds=clouds,
        labels=np.asarray(manifest.labels, dtype=np.int64),
        class_names=tuple(manifest.class_names),
        manifest=manifest,
    )
