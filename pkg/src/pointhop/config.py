"""Experiment configuration: dataclass, CLI mapping, validation and config files.

Config files are ``key = value`` lines; blank lines and ``#`` comments are
ignored. ``schema_version = 1`` is mandatory and unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from pointhop.classify import (
    ForestParams,
    LinearParams,
    validate_forest_params,
    validate_linear_params,
)
from pointhop.ensemble import (
    FUSIONS,
    HP_PRESETS,
    Branch,
    EnsembleSpec,
    hp_preset,
    validate_ensemble_spec,
)
from pointhop.pipeline import PointHopConfig

SCHEMA_VERSION = 1

CLASSIFIERS = ("forest", "linear")


@dataclass(frozen=True)
class ExperimentConfig:
    data_root: str | None = None
    # Points sampled from each raw mesh (converted datasets already carry them).
    cloud_points: int = 2048
    pointhop: PointHopConfig = field(default_factory=PointHopConfig)
    ensemble: str = "none"
    angles: tuple[float, ...] = ()
    fusion: Literal["feature", "decision"] = "feature"
    classifier: Literal["forest", "linear"] = "forest"
    forest: ForestParams = field(default_factory=ForestParams)
    linear: LinearParams = field(default_factory=LinearParams)
    seed: int = 0
    workers: int = 1
    out_dir: str | None = None
    verbose: bool = False

    def ensemble_spec(self) -> EnsembleSpec:
        if self.ensemble != "none":
            spec = hp_preset(self.ensemble, self.pointhop)
            return dataclasses.replace(spec, fusion=self.fusion)
        if self.angles:
            branches = tuple(Branch(self.pointhop, a) for a in self.angles)
            return EnsembleSpec(branches=branches, fusion=self.fusion)
        return EnsembleSpec(branches=(Branch(self.pointhop),), fusion=self.fusion)


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(part) for part in raw.split(",") if part.strip())


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in raw.split(",") if part.strip())


def _words(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def _bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _optional_int(raw: str) -> int | None:
    return None if raw.lower() in ("", "none") else int(raw)


def _optional_str(raw: str) -> str | None:
    return raw or None


def _max_features(raw: str) -> str | int:
    return raw if raw == "sqrt" else int(raw)


def _join(values) -> str:
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in values)


# key -> (section, field, parse, render); section None means ExperimentConfig itself.
_Key = tuple[str | None, str, Callable[[str], Any], Callable[[Any], str]]
_KEYS: dict[str, _Key] = {
    "data.root": (None, "data_root", _optional_str, lambda v: v or ""),
    "data.cloud_points": (None, "cloud_points", int, str),
    "pointhop.input_points": ("pointhop", "input_points", int, str),
    "pointhop.unit_points": ("pointhop", "unit_points", _ints, _join),
    "pointhop.k_values": ("pointhop", "k_values", _ints, _join),
    "pointhop.n_ac": ("pointhop", "n_ac", _ints, _join),
    "pointhop.poolings": ("pointhop", "poolings", _words, _join),
    "pointhop.initial_attributes": ("pointhop", "initial_attributes", str, str),
    "pointhop.feature_stages": ("pointhop", "feature_stages", str, str),
    "pointhop.sampling": ("pointhop", "sampling", str, str),
    "pointhop.reduction": ("pointhop", "reduction", str, str),
    "pointhop.centered_pca": ("pointhop", "centered_pca", _bool, lambda v: str(v).lower()),
    "ensemble.preset": (None, "ensemble", str, str),
    "ensemble.angles": (None, "angles", _floats, _join),
    "ensemble.fusion": (None, "fusion", str, str),
    "classifier.kind": (None, "classifier", str, str),
    "forest.n_trees": ("forest", "n_trees", int, str),
    "forest.max_depth": ("forest", "max_depth", _optional_int, lambda v: str(v).lower()),
    "forest.min_leaf": ("forest", "min_leaf", int, str),
    "forest.max_features": ("forest", "max_features", _max_features, str),
    "linear.reg": ("linear", "reg", float, repr),
    "linear.tol": ("linear", "tol", float, repr),
    "linear.max_iter": ("linear", "max_iter", int, str),
    "seed": (None, "seed", int, str),
}


def _with_values(cfg: ExperimentConfig, values: dict[str, Any]) -> ExperimentConfig:
    """Apply dotted-key values; ``seed`` also seeds the pipeline."""
    top: dict[str, Any] = {}
    sections: dict[str, dict[str, Any]] = {}
    for key, value in values.items():
        section, name, _, _ = _KEYS[key]
        if section is None:
            top[name] = value
        else:
            sections.setdefault(section, {})[name] = value
    for section, changes in sections.items():
        top[section] = dataclasses.replace(getattr(cfg, section), **changes)
    cfg = dataclasses.replace(cfg, **top)
    return dataclasses.replace(cfg, pointhop=cfg.pointhop.replace(seed=cfg.seed))


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    values: dict[str, Any] = {}
    schema: int | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if not sep or not key:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        if key == "schema_version":
            schema = int(raw_value)
            continue
        if key not in _KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _KEYS[key][2](raw_value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {exc}") from exc
    if schema is None:
        raise ValueError("schema_version is required")
    if schema != SCHEMA_VERSION:
        raise ValueError(f"schema_version {schema} is not supported (expected {SCHEMA_VERSION})")
    return _with_values(base or ExperimentConfig(), values)


def parse_config_file(path: Path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), base)


def render_config(cfg: ExperimentConfig) -> str:
    """Inverse of ``parse_config_text`` for every file-backed field."""
    lines = [f"schema_version = {SCHEMA_VERSION}"]
    for key, (section, name, _, render) in _KEYS.items():
        owner = cfg if section is None else getattr(cfg, section)
        lines.append(f"{key} = {render(getattr(owner, name))}".rstrip())
    return "\n".join(lines) + "\n"


# argparse dest -> dotted key
_FLAG_KEYS = {
    "data_root": "data.root",
    "cloud_points": "data.cloud_points",
    "input_points": "pointhop.input_points",
    "unit_points": "pointhop.unit_points",
    "k_values": "pointhop.k_values",
    "n_ac": "pointhop.n_ac",
    "poolings": "pointhop.poolings",
    "initial_attributes": "pointhop.initial_attributes",
    "feature_stages": "pointhop.feature_stages",
    "sampling": "pointhop.sampling",
    "reduction": "pointhop.reduction",
    "ensemble": "ensemble.preset",
    "angles": "ensemble.angles",
    "fusion": "ensemble.fusion",
    "classifier": "classifier.kind",
    "n_trees": "forest.n_trees",
    "max_depth": "forest.max_depth",
    "min_leaf": "forest.min_leaf",
    "reg": "linear.reg",
    "seed": "seed",
}


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the ``--config`` file, then any flag that was given."""
    config_path = getattr(args, "config", None)
    cfg = parse_config_file(Path(config_path)) if config_path else ExperimentConfig()
    values: dict[str, Any] = {}
    for dest, key in _FLAG_KEYS.items():
        raw = getattr(args, dest, None)
        if raw is None:
            continue
        values[key] = _KEYS[key][2](raw) if isinstance(raw, str) else raw
    cfg = _with_values(cfg, values)
    workers = getattr(args, "workers", None)
    return dataclasses.replace(
        cfg,
        workers=cfg.workers if workers is None else workers,
        out_dir=getattr(args, "out", None) or cfg.out_dir,
        verbose=bool(getattr(args, "verbose", False)),
    )


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.data_root is not None and not cfg.data_root.strip():
        raise ValueError("data_root must be non-empty when set")
    if cfg.cloud_points < 1:
        raise ValueError("cloud_points must be >= 1")
    if cfg.workers < 1:
        raise ValueError("workers must be >= 1")
    if cfg.seed < 0:
        raise ValueError("seed must be >= 0")
    if cfg.classifier not in CLASSIFIERS:
        raise ValueError("classifier must be 'forest' or 'linear'")
    if cfg.fusion not in FUSIONS:
        raise ValueError("fusion must be 'feature' or 'decision'")
    if cfg.ensemble != "none" and cfg.ensemble not in HP_PRESETS:
        raise ValueError(f"ensemble must be 'none' or one of {', '.join(HP_PRESETS)}")
    if cfg.ensemble != "none" and cfg.angles:
        raise ValueError("angles cannot be combined with an ensemble preset")
    for angle in cfg.angles:
        if not math.isfinite(angle):
            raise ValueError("angles must be finite")
    validate_forest_params(cfg.forest)
    validate_linear_params(cfg.linear)
    spec = cfg.ensemble_spec()
    validate_ensemble_spec(spec)
    needed = max(b.config.input_points for b in spec.branches)
    if cfg.cloud_points < needed:
        raise ValueError(f"cloud_points must be >= {needed} (largest branch input_points)")
