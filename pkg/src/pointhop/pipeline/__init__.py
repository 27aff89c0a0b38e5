from pointhop.pipeline.model import (
    MODEL_FORMAT_VERSION,
    POOLINGS,
    FeatureLayout,
    LayoutEntry,
    PointHopConfig,
    PointHopModel,
    check_dimension_chain,
    validate_pointhop_config,
)
from pointhop.pipeline.pointhop import (
    UnitTrace,
    extract_features,
    extract_features_batch,
    features_from_attributes,
    fit_pointhop,
    prepare_input,
    suggest_filter_counts,
    trace,
    transform,
    unit_plan,
)
from pointhop.pipeline.pooling import pool
from pointhop.pipeline.serialize import load_model, save_model

__all__ = [
    "MODEL_FORMAT_VERSION",
    "POOLINGS",
    "FeatureLayout",
    "LayoutEntry",
    "PointHopConfig",
    "PointHopModel",
    "UnitTrace",
    "check_dimension_chain",
    "extract_features",
    "extract_features_batch",
    "features_from_attributes",
    "fit_pointhop",
    "load_model",
    "pool",
    "prepare_input",
    "save_model",
    "suggest_filter_counts",
    "trace",
    "transform",
    "unit_plan",
    "validate_pointhop_config",
]
