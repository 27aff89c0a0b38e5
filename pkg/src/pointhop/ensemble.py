"""Ensembles of PointHop pipelines.

Branches differ by a rotation of the input about the up (z) axis and/or by their
PointHop configuration. Each branch fits its own banks; nothing is shared. The
branches are fused either by concatenating their feature vectors (one classifier
on top) or by concatenating their per-branch class probabilities (a second-stage
classifier on top).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from pointhop.classify import Classifier, predict_proba
from pointhop.metrics import Metrics
from pointhop.pcio.cloud import PointCloud
from pointhop.pipeline import (
    PointHopConfig,
    PointHopModel,
    extract_features,
    extract_features_batch,
    fit_pointhop,
    validate_pointhop_config,
)
from pointhop.rng import make_rng, splitmix64

logger = logging.getLogger("pointhop")

FUSIONS = ("feature", "decision")

HP_ANGLES = (0.0, 45.0, 90.0, 135.0, 180.0)
HP_FILTERS = (
    (15, 25, 40, 80),
    (15, 25, 35, 50),
    (18, 30, 50, 90),
    (20, 40, 60, 100),
    (20, 40, 70, 120),
)
HP_NEIGHBORS = (
    (64, 64, 64, 64),
    (32, 32, 32, 32),
    (32, 32, 64, 64),
    (96, 96, 96, 96),
    (128, 128, 128, 128),
)
HP_UNIT_POINTS = (
    (512, 128, 128, 64),
    (512, 256, 128, 64),
    (512, 256, 256, 128),
    (512, 256, 256, 256),
    (512, 128, 128, 128),
)
HP_PRESETS = ("HP-A", "HP-B", "HP-C", "HP-D", "all")


@dataclass(frozen=True)
class Branch:
    config: PointHopConfig
    angle: float = 0.0


@dataclass(frozen=True)
class EnsembleSpec:
    branches: tuple[Branch, ...]
    fusion: Literal["feature", "decision"] = "feature"

    @classmethod
    def single(cls, config: PointHopConfig) -> EnsembleSpec:
        return cls(branches=(Branch(config),))

    @property
    def angles(self) -> tuple[float, ...]:
        return tuple(b.angle for b in self.branches)


@dataclass(frozen=True)
class FittedBranch:
    model: PointHopModel
    angle: float = 0.0


def validate_ensemble_spec(spec: EnsembleSpec) -> None:
    if not spec.branches:
        raise ValueError("ensemble must have at least one branch")
    if spec.fusion not in FUSIONS:
        raise ValueError("fusion must be 'feature' or 'decision'")
    for i, branch in enumerate(spec.branches):
        if not math.isfinite(branch.angle) or not 0.0 <= branch.angle < 360.0:
            raise ValueError(f"branches[{i}].angle must be in [0, 360)")
        try:
            validate_pointhop_config(branch.config)
        except ValueError as exc:
            raise ValueError(f"branches[{i}]: {exc}") from exc


def rotate_cloud(pc: PointCloud, angle_degrees: float) -> PointCloud:
    """Rotate about the z axis through the origin."""
    if not math.isfinite(angle_degrees):
        raise ValueError("angle must be finite")
    theta = math.radians(angle_degrees)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return pc.with_points(pc.points @ rot.T)


def _rotated(clouds: Sequence[PointCloud], angle: float) -> list[PointCloud]:
    if angle == 0.0:
        return list(clouds)
    return [rotate_cloud(c, angle) for c in clouds]


def fit_ensemble(
    clouds: Sequence[PointCloud],
    spec: EnsembleSpec,
    *,
    workers: int = 1,
    metrics: Metrics | None = None,
) -> tuple[FittedBranch, ...]:
    validate_ensemble_spec(spec)
    fitted = []
    for i, branch in enumerate(spec.branches):
        logger.info("BRANCH %d FIT angle=%g units=%d", i, branch.angle, branch.config.n_units)
        model = fit_pointhop(
            _rotated(clouds, branch.angle), branch.config, workers=workers, metrics=metrics
        )
        fitted.append(FittedBranch(model, branch.angle))
    return tuple(fitted)


def branch_features(
    branch: FittedBranch,
    clouds: Sequence[PointCloud],
    *,
    workers: int = 1,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> np.ndarray:
    return extract_features_batch(
        branch.model,
        _rotated(clouds, branch.angle),
        workers=workers,
        input_points=input_points,
        metrics=metrics,
    )


def feature_ensemble(
    branches: Sequence[FittedBranch],
    cloud: PointCloud,
    *,
    input_points: int | None = None,
) -> np.ndarray:
    """Branch feature vectors concatenated in branch order."""
    return np.concatenate(
        [
            extract_features(b.model, _rotated([cloud], b.angle)[0], input_points=input_points)
            for b in branches
        ]
    )


def feature_ensemble_batch(
    branches: Sequence[FittedBranch],
    clouds: Sequence[PointCloud],
    *,
    workers: int = 1,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> np.ndarray:
    return np.hstack(
        [
            branch_features(b, clouds, workers=workers, input_points=input_points, metrics=metrics)
            for b in branches
        ]
    )


def decision_vectors(
    branch_classifiers: Sequence[Classifier], branch_feature_blocks: Sequence[np.ndarray]
) -> np.ndarray:
    """Per-branch class probabilities concatenated in branch order."""
    if len(branch_classifiers) != len(branch_feature_blocks):
        raise ValueError("one classifier per branch is required")
    return np.hstack(
        [predict_proba(clf, X) for clf, X in zip(branch_classifiers, branch_feature_blocks)]
    )


def fold_assignment(labels: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Stratified fold index per sample: each class is shuffled and dealt round robin."""
    labels = np.asarray(labels)
    rng = make_rng(seed)
    assignment = np.empty(labels.shape[0], dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        assignment[idx] = (np.arange(idx.size) + offset) % folds
        offset += idx.size
    return assignment


def out_of_fold_decisions(
    fit: Callable[[np.ndarray, np.ndarray, int], Classifier],
    features: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    *,
    folds: int = 5,
    seed: int = 0,
) -> np.ndarray:
    """Class probabilities of every training sample from a classifier that never saw it.

    Fold ``j`` is scored by ``fit(X_rest, y_rest, splitmix64(seed, j + 1))``.
    These rows train the second stage of decision fusion.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    folds = max(2, min(folds, y.shape[0]))
    assignment = fold_assignment(y, folds, seed)
    proba = np.zeros((y.shape[0], n_classes))
    for j in range(folds):
        held = assignment == j
        if not held.any():
            continue
        clf = fit(X[~held], y[~held], splitmix64(seed, j + 1))
        proba[held] = predict_proba(clf, X[held])
    return proba


def decision_ensemble(
    branches: Sequence[FittedBranch],
    branch_classifiers: Sequence[Classifier],
    cloud: PointCloud,
    *,
    input_points: int | None = None,
) -> np.ndarray:
    blocks = [
        extract_features(b.model, _rotated([cloud], b.angle)[0], input_points=input_points)
        for b in branches
    ]
    return decision_vectors(branch_classifiers, blocks)[0]


def hp_preset(name: str, base: PointHopConfig | None = None) -> EnsembleSpec:
    """Five-branch hyper-parameter ensembles; ``"all"`` chains the four presets."""
    base = base or PointHopConfig()
    if name == "HP-A":
        branches = [Branch(base, angle) for angle in HP_ANGLES]
    elif name == "HP-B":
        branches = [Branch(base.replace(n_ac=n_ac)) for n_ac in HP_FILTERS]
    elif name == "HP-C":
        branches = [Branch(base.replace(k_values=k)) for k in HP_NEIGHBORS]
    elif name == "HP-D":
        branches = [
            Branch(base.replace(input_points=pts[0], unit_points=pts)) for pts in HP_UNIT_POINTS
        ]
    elif name == "all":
        branches = [
            b for preset in HP_PRESETS[:-1] for b in hp_preset(preset, base).branches
        ]
    else:
        raise ValueError(f"unknown preset {name!r} (expected one of {', '.join(HP_PRESETS)})")
    return EnsembleSpec(branches=tuple(branches))
