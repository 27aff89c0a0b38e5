"""Classifiers on PointHop feature vectors and their evaluation."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from pointhop.classify.evaluation import EvalReport, format_report, report_from_predictions
from pointhop.classify.forest import (
    DecisionTree,
    ForestParams,
    RandomForestModel,
    fit_random_forest,
    forest_predict_proba,
    validate_forest_params,
)
from pointhop.classify.linear import (
    LinearClassifierModel,
    LinearParams,
    fit_linear,
    linear_predict_proba,
    validate_linear_params,
)
from pointhop.classify.serialize import (
    CLASSIFIER_FORMAT_VERSION,
    CLASSIFIER_MAGIC,
    Classifier,
    load_classifier,
    save_classifier,
)
from pointhop.errors import DimensionMismatch


def predict_proba(model: Classifier, features: np.ndarray) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"classifier expects {model.n_features} features, got shape {X.shape}"
        )
    if isinstance(model, RandomForestModel):
        return forest_predict_proba(model, X)
    return linear_predict_proba(model, X)


def predict(model: Classifier, features: np.ndarray) -> np.ndarray:
    # argmax returns the first maximum, so ties go to the lowest class id
    return np.argmax(predict_proba(model, features), axis=1)


def evaluate(
    model: Classifier,
    features: np.ndarray,
    labels: np.ndarray,
    class_names: Sequence[str],
) -> EvalReport:
    return report_from_predictions(predict(model, features), labels, class_names)


__all__ = [
    "CLASSIFIER_FORMAT_VERSION",
    "CLASSIFIER_MAGIC",
    "Classifier",
    "DecisionTree",
    "EvalReport",
    "ForestParams",
    "LinearClassifierModel",
    "LinearParams",
    "RandomForestModel",
    "evaluate",
    "fit_linear",
    "fit_random_forest",
    "format_report",
    "load_classifier",
    "predict",
    "predict_proba",
    "report_from_predictions",
    "save_classifier",
    "validate_forest_params",
    "validate_linear_params",
]
