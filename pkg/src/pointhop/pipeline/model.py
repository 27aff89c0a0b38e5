from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from pointhop.errors import DimensionChainError
from pointhop.geometry.descriptor import N_OCTANTS
from pointhop.saab import SaabFilterBank

POOLINGS = ("max", "mean", "l1", "l2")

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class PointHopConfig:
    # Points kept from each input cloud by random dropout.
    input_points: int = 1024
    # Centers retained by each unit; unit i searches neighbors among the points of unit i-1.
    unit_points: tuple[int, ...] = (1024, 128, 128, 64)
    k_values: tuple[int, ...] = (64, 64, 64, 64)
    n_ac: tuple[int, ...] = (15, 25, 40, 80)
    poolings: tuple[str, ...] = POOLINGS
    initial_attributes: Literal["xyz", "xyzrgb"] = "xyz"
    feature_stages: Literal["all", "last"] = "all"
    sampling: Literal["fps", "random"] = "fps"
    reduction: Literal["saab", "pca"] = "saab"
    centered_pca: bool = True
    seed: int = 0

    @classmethod
    def compact_256(cls, **overrides: Any) -> PointHopConfig:
        """The 256-point default operating point (ablation setting)."""
        base = cls(input_points=256, unit_points=(256, 128, 128, 64))
        return dataclasses.replace(base, **overrides)

    @classmethod
    def baseline_1024(cls, **overrides: Any) -> PointHopConfig:
        return dataclasses.replace(cls(), **overrides)

    @property
    def n_units(self) -> int:
        return len(self.unit_points)

    @property
    def initial_dim(self) -> int:
        return 3 if self.initial_attributes == "xyz" else 6

    @property
    def descriptor_dims(self) -> tuple[int, ...]:
        dims = []
        prev = self.initial_dim
        for n_ac in self.n_ac:
            dims.append(N_OCTANTS * prev)
            prev = 1 + n_ac
        return tuple(dims)

    @property
    def unit_dims(self) -> tuple[int, ...]:
        return tuple(1 + n for n in self.n_ac)

    def replace(self, **changes: Any) -> PointHopConfig:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return {
            "input_points": self.input_points,
            "unit_points": list(self.unit_points),
            "k_values": list(self.k_values),
            "n_ac": list(self.n_ac),
            "poolings": list(self.poolings),
            "initial_attributes": self.initial_attributes,
            "feature_stages": self.feature_stages,
            "sampling": self.sampling,
            "reduction": self.reduction,
            "centered_pca": self.centered_pca,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PointHopConfig:
        if not isinstance(data, dict):
            raise ValueError("pointhop config must be an object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown pointhop config fields: {', '.join(unknown)}")
        values = dict(data)
        for key in ("unit_points", "k_values", "n_ac", "poolings"):
            if key in values:
                values[key] = tuple(values[key])
        return cls(**values)


def validate_pointhop_config(cfg: PointHopConfig) -> None:
    n = cfg.n_units
    if n < 1:
        raise ValueError("unit_points must list at least one unit")
    if len(cfg.k_values) != n or len(cfg.n_ac) != n:
        raise ValueError("unit_points, k_values and n_ac must have the same length")
    if cfg.input_points < 1:
        raise ValueError("input_points must be >= 1")
    if cfg.initial_attributes not in ("xyz", "xyzrgb"):
        raise ValueError("initial_attributes must be 'xyz' or 'xyzrgb'")
    if cfg.feature_stages not in ("all", "last"):
        raise ValueError("feature_stages must be 'all' or 'last'")
    if cfg.sampling not in ("fps", "random"):
        raise ValueError("sampling must be 'fps' or 'random'")
    if cfg.reduction not in ("saab", "pca"):
        raise ValueError("reduction must be 'saab' or 'pca'")
    if not cfg.poolings:
        raise ValueError("poolings must be non-empty")
    for name in cfg.poolings:
        if name not in POOLINGS:
            raise ValueError(f"unknown pooling {name!r} (expected one of {', '.join(POOLINGS)})")
    if len(set(cfg.poolings)) != len(cfg.poolings):
        raise ValueError("poolings must not repeat")

    prev_points = cfg.input_points
    prev_dim = cfg.initial_dim
    for i in range(n):
        points = cfg.unit_points[i]
        if points < 1:
            raise ValueError(f"unit_points[{i}] must be >= 1")
        if points > prev_points:
            raise ValueError(
                f"unit_points[{i}] must be <= {prev_points} (unit_points are nonincreasing)"
            )
        if cfg.k_values[i] < 1:
            raise ValueError(f"k_values[{i}] must be >= 1")
        if cfg.k_values[i] > prev_points:
            raise ValueError(f"k_values[{i}] must be <= {prev_points}")
        max_ac = N_OCTANTS * prev_dim - 1
        if cfg.n_ac[i] < 0 or cfg.n_ac[i] > max_ac:
            raise ValueError(f"n_ac[{i}] must be between 0 and {max_ac}")
        prev_points = points
        prev_dim = 1 + cfg.n_ac[i]


@dataclass(frozen=True)
class LayoutEntry:
    unit: int
    pooling: str
    offset: int
    length: int


@dataclass(frozen=True)
class FeatureLayout:
    entries: tuple[LayoutEntry, ...]

    @classmethod
    def build(
        cls,
        unit_dims: tuple[int, ...],
        poolings: tuple[str, ...],
        units: tuple[int, ...] | None = None,
    ) -> FeatureLayout:
        """Units in order, poolings in order within each unit."""
        if units is None:
            units = tuple(range(len(unit_dims)))
        entries = []
        offset = 0
        for unit in units:
            for pooling in poolings:
                entries.append(LayoutEntry(unit, pooling, offset, unit_dims[unit]))
                offset += unit_dims[unit]
        return cls(tuple(entries))

    @classmethod
    def for_config(cls, cfg: PointHopConfig) -> FeatureLayout:
        units = None if cfg.feature_stages == "all" else (cfg.n_units - 1,)
        return cls.build(cfg.unit_dims, cfg.poolings, units)

    @property
    def length(self) -> int:
        return sum(e.length for e in self.entries)

    def select(
        self,
        units: tuple[int, ...] | None = None,
        poolings: tuple[str, ...] | None = None,
    ) -> np.ndarray:
        """Column indices of the entries matching ``units`` and ``poolings``."""
        columns = [
            np.arange(e.offset, e.offset + e.length)
            for e in self.entries
            if (units is None or e.unit in units) and (poolings is None or e.pooling in poolings)
        ]
        if not columns:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(columns)


@dataclass(frozen=True)
class PointHopModel:
    config: PointHopConfig
    banks: tuple[SaabFilterBank, ...]
    layout: FeatureLayout
    format_version: int = MODEL_FORMAT_VERSION

    @property
    def unit_dims(self) -> tuple[int, ...]:
        return tuple(b.output_dim for b in self.banks)

    @property
    def descriptor_dims(self) -> tuple[int, ...]:
        return tuple(b.input_dim for b in self.banks)

    @property
    def feature_length(self) -> int:
        return self.layout.length


def check_dimension_chain(model: PointHopModel) -> None:
    cfg = model.config
    prev = cfg.initial_dim
    for i, bank in enumerate(model.banks):
        if bank.input_dim != N_OCTANTS * prev:
            raise DimensionChainError(
                f"unit {i + 1} descriptor dim {bank.input_dim} != {N_OCTANTS} * {prev}"
            )
        if bank.output_dim != 1 + cfg.n_ac[i]:
            raise DimensionChainError(
                f"unit {i + 1} output dim {bank.output_dim} != 1 + {cfg.n_ac[i]}"
            )
        prev = bank.output_dim
    if model.layout.length != FeatureLayout.for_config(cfg).length:
        raise DimensionChainError("feature layout does not match the configuration")
