"""Fitting and applying the cascade of PointHop units.

Unit ``i`` takes the point set and attributes produced by unit ``i - 1`` (the
dropout-sampled input cloud and its raw coordinates for the first unit),
retains ``unit_points[i]`` centers by farthest point sampling, builds each
center's octant descriptor from its K nearest neighbors in that point set and
reduces it with the unit's Saab bank.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np

from pointhop.errors import DataError, InsufficientPoints, NonFiniteAttributes
from pointhop.geometry.descriptor import octant_descriptors
from pointhop.geometry.knn import SpatialIndex, knn_batch
from pointhop.geometry.sampling import fps_indices, random_dropout, random_subsample_indices
from pointhop.metrics import Metrics
from pointhop.pcio.cloud import PointCloud
from pointhop.pipeline.model import (
    FeatureLayout,
    PointHopConfig,
    PointHopModel,
    check_dimension_chain,
    validate_pointhop_config,
)
from pointhop.pipeline.pooling import pool
from pointhop.rng import splitmix64
from pointhop.saab import (
    CovarianceAccumulator,
    SaabFilterBank,
    count_negative,
    energy_knee,
    fit_pca,
    fit_saab,
)
from pointhop.workers import ordered_map

logger = logging.getLogger("pointhop")

_FIT_CHUNK = 64


@dataclass(frozen=True)
class UnitTrace:
    points: np.ndarray  # (N_i, 3) coordinates of the retained centers
    center_indices: np.ndarray  # (N_i,) indices into the previous unit's point set
    neighbors: np.ndarray  # (N_i, K) indices into the previous unit's point set
    attributes: np.ndarray  # (N_i, D_i)


@dataclass(frozen=True)
class _UnitInput:
    points: np.ndarray
    attrs: np.ndarray


def prepare_input(
    cloud: PointCloud,
    config: PointHopConfig,
    *,
    seed: int | None = None,
    input_points: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Dropout-sample ``cloud`` and return (points, 0-hop attributes)."""
    n = input_points or config.input_points
    if len(cloud) < n:
        raise InsufficientPoints(f"cloud has {len(cloud)} points, need {n}")
    sub = random_dropout(cloud, n, config.seed if seed is None else seed)
    if config.initial_attributes == "xyzrgb":
        if sub.colors is None:
            raise DataError("initial_attributes=xyzrgb requires colored point clouds")
        return sub.points, np.hstack([sub.points, sub.colors])
    return sub.points, sub.points.copy()


def unit_plan(config: PointHopConfig, input_points: int) -> list[tuple[int, int]]:
    """(centers, K) per unit, clamped to the points actually available.

    Clamping only kicks in when a cloud is evaluated at a lower density than
    the model was configured for.
    """
    plan = []
    prev = input_points
    for points, k in zip(config.unit_points, config.k_values):
        points = min(points, prev)
        plan.append((points, min(k, prev)))
        prev = points
    return plan


def _select_centers(points: np.ndarray, n: int, config: PointHopConfig, unit: int, seed: int):
    if config.sampling == "random":
        return random_subsample_indices(len(points), n, splitmix64(seed, unit + 1))
    return fps_indices(points, n)


def _unit_descriptors(
    state: _UnitInput,
    n_centers: int,
    k: int,
    config: PointHopConfig,
    unit: int,
    seed: int,
    metrics: Metrics | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    centers = _select_centers(state.points, n_centers, config, unit, seed)
    index = SpatialIndex(state.points)
    neighbors = knn_batch(index, centers, k, metrics=metrics)
    desc = octant_descriptors(state.points, state.attrs, state.points[centers], neighbors)
    if metrics:
        metrics.inc("descriptors_total", len(centers))
    return centers, neighbors, desc


def _apply_bank(bank: SaabFilterBank, desc: np.ndarray, unit: int, metrics: Metrics | None):
    out = bank.apply(desc)
    if not np.all(np.isfinite(out)):
        raise NonFiniteAttributes(f"unit {unit + 1} produced non-finite attributes")
    if bank.kind == "saab":
        negative = count_negative(out)
        if negative:
            logger.debug("SAAB NEGATIVE unit=%d responses=%d", unit + 1, negative)
            if metrics:
                metrics.inc("saab_negative_responses_total", negative)
    return out


def _fit_bank(acc: CovarianceAccumulator, config: PointHopConfig, unit: int, metrics):
    if config.reduction == "pca":
        return fit_pca(acc, 1 + config.n_ac[unit], metrics=metrics)
    return fit_saab(acc, config.n_ac[unit], centered=config.centered_pca, metrics=metrics)


def fit_pointhop(
    clouds: Sequence[PointCloud],
    config: PointHopConfig,
    *,
    workers: int = 1,
    metrics: Metrics | None = None,
) -> PointHopModel:
    """Fit one bank per unit on descriptors pooled over all clouds. No labels are used.

    Covariances are accumulated in streaming fashion: each unit makes one pass
    to accumulate and a second pass to apply the fitted bank.
    """
    validate_pointhop_config(config)
    if not clouds:
        raise InsufficientPoints("no training clouds")
    seed = config.seed
    states = ordered_map(
        lambda c: _UnitInput(*prepare_input(c, config)),
        list(clouds),
        workers,
    )
    plan = unit_plan(config, config.input_points)
    banks: list[SaabFilterBank] = []

    for unit, (n_centers, k) in enumerate(plan):
        timer = metrics.timed(f"unit{unit + 1}") if metrics else nullcontext()
        with timer:
            dim = config.descriptor_dims[unit]
            acc = CovarianceAccumulator(dim, ac_only=config.reduction == "saab")
            for start in range(0, len(states), _FIT_CHUNK):
                chunk = states[start : start + _FIT_CHUNK]
                results = ordered_map(
                    lambda s, u=unit, n=n_centers, kk=k: _unit_descriptors(
                        s, n, kk, config, u, seed, metrics
                    ),
                    chunk,
                    workers,
                )
                for _, _, desc in results:
                    acc.update(desc)
            bank = _fit_bank(acc, config, unit, metrics)
            banks.append(bank)
            logger.info(
                "UNIT %d FIT descriptors=%d dim=%d->%d bias=%.4f knee=%s",
                unit + 1,
                acc.count,
                bank.input_dim,
                bank.output_dim,
                bank.bias,
                _knee_or_none(bank),
            )

            def advance(s: _UnitInput, u=unit, n=n_centers, kk=k, b=bank) -> _UnitInput:
                centers, _, desc = _unit_descriptors(s, n, kk, config, u, seed, None)
                return _UnitInput(s.points[centers], _apply_bank(b, desc, u, None))

            states = ordered_map(advance, states, workers)

    model = PointHopModel(
        config=config, banks=tuple(banks), layout=FeatureLayout.for_config(config)
    )
    check_dimension_chain(model)
    return model


def _knee_or_none(bank: SaabFilterBank) -> int | None:
    if len(bank.eigenvalues) < 3:
        return None
    return energy_knee(bank.energy_curve())


def suggest_filter_counts(model: PointHopModel) -> list[int | None]:
    """Energy-knee filter count per unit (advisory)."""
    return [_knee_or_none(bank) for bank in model.banks]


def trace(
    model: PointHopModel,
    cloud: PointCloud,
    *,
    seed: int | None = None,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> list[UnitTrace]:
    config = model.config
    seed = config.seed if seed is None else seed
    points, attrs = prepare_input(cloud, config, seed=seed, input_points=input_points)
    state = _UnitInput(points, attrs)
    traces = []
    for unit, (n_centers, k) in enumerate(unit_plan(config, len(points))):
        centers, neighbors, desc = _unit_descriptors(
            state, n_centers, k, config, unit, seed, metrics
        )
        out = _apply_bank(model.banks[unit], desc, unit, metrics)
        traces.append(UnitTrace(state.points[centers], centers, neighbors, out))
        state = _UnitInput(state.points[centers], out)
    if metrics:
        metrics.inc("clouds_transformed_total")
    return traces


def transform(
    model: PointHopModel,
    cloud: PointCloud,
    *,
    seed: int | None = None,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> list[np.ndarray]:
    """Per-unit attribute matrices for one cloud, banks frozen."""
    traces = trace(model, cloud, seed=seed, input_points=input_points, metrics=metrics)
    return [t.attributes for t in traces]


def features_from_attributes(layout: FeatureLayout, attributes: list[np.ndarray]) -> np.ndarray:
    out = np.empty(layout.length)
    for entry in layout.entries:
        pooled = pool(attributes[entry.unit], entry.pooling)
        out[entry.offset : entry.offset + entry.length] = pooled
    return out


def extract_features(
    model: PointHopModel,
    cloud: PointCloud,
    *,
    seed: int | None = None,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> np.ndarray:
    attributes = transform(model, cloud, seed=seed, input_points=input_points, metrics=metrics)
    return features_from_attributes(model.layout, attributes)


def extract_features_batch(
    model: PointHopModel,
    clouds: Iterable[PointCloud],
    *,
    workers: int = 1,
    input_points: int | None = None,
    metrics: Metrics | None = None,
) -> np.ndarray:
    rows = ordered_map(
        lambda c: extract_features(model, c, input_points=input_points, metrics=metrics),
        list(clouds),
        workers,
    )
    if not rows:
        return np.zeros((0, model.feature_length))
    return np.vstack(rows)
