"""Procedural surface samplers for four descriptor-separable shape classes."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from pointhop.pcio import PointCloud, normalize_cloud
from pointhop.rng import make_rng, splitmix64

SHAPES = ("sphere", "box", "cylinder", "cone")


def _sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(0.9, 1.1, size=3)


def _box(rng: np.random.Generator, n: int) -> np.ndarray:
    ext = rng.uniform(0.6, 1.0, size=3)
    areas = np.array([ext[1] * ext[2], ext[0] * ext[2], ext[0] * ext[1]])
    axis = rng.choice(3, size=n, p=areas / areas.sum())
    pts = rng.uniform(-1.0, 1.0, size=(n, 3)) * ext
    side = rng.choice([-1.0, 1.0], size=n)
    pts[np.arange(n), axis] = side * ext[axis]
    return pts


def _cylinder(rng: np.random.Generator, n: int) -> np.ndarray:
    r = rng.uniform(0.4, 0.6)
    h = rng.uniform(0.9, 1.2)
    lateral = 2 * np.pi * r * 2 * h
    caps = 2 * np.pi * r * r
    on_side = rng.random(n) < lateral / (lateral + caps)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    rad = np.where(on_side, r, r * np.sqrt(rng.random(n)))
    z = np.where(on_side, rng.uniform(-h, h, size=n), rng.choice([-h, h], size=n))
    return np.column_stack([rad * np.cos(theta), rad * np.sin(theta), z])


def _cone(rng: np.random.Generator, n: int) -> np.ndarray:
    r = rng.uniform(0.6, 0.8)
    h = rng.uniform(1.2, 1.6)
    slant = np.hypot(r, h)
    lateral = np.pi * r * slant
    base = np.pi * r * r
    on_side = rng.random(n) < lateral / (lateral + base)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    # sqrt keeps lateral samples uniform in area
    t = np.sqrt(rng.random(n))
    rad = np.where(on_side, r * t, r * np.sqrt(rng.random(n)))
    z = np.where(on_side, h * (1.0 - t), 0.0)
    return np.column_stack([rad * np.cos(theta), rad * np.sin(theta), z])


_SAMPLERS: dict[str, Callable[[np.random.Generator, int], np.ndarray]] = {
    "sphere": _sphere,
    "box": _box,
    "cylinder": _cylinder,
    "cone": _cone,
}


def make_shape(name: str, n: int, seed: int, *, noise: float = 0.005) -> PointCloud:
    rng = make_rng(seed)
    pts = _SAMPLERS[name](rng, n)
    pts = pts + rng.normal(scale=noise, size=pts.shape)
    return normalize_cloud(PointCloud(pts))


def make_split(
    per_class: int, n: int, seed: int, shapes: tuple[str, ...] = SHAPES
) -> tuple[list[PointCloud], np.ndarray]:
    clouds: list[PointCloud] = []
    labels: list[int] = []
    for label, name in enumerate(shapes):
        for i in range(per_class):
            clouds.append(make_shape(name, n, splitmix64(seed, label * 100_003 + i)))
            labels.append(label)
    return clouds, np.asarray(labels, dtype=np.int64)
