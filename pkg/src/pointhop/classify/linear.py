from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from pointhop.classify.forest import check_labels
from pointhop.errors import DimensionMismatch

logger = logging.getLogger("pointhop")

_VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class LinearParams:
    reg: float = 1e-3
    tol: float = 1e-4
    max_iter: int = 1000


def validate_linear_params(params: LinearParams) -> None:
    if params.reg <= 0:
        raise ValueError("reg must be > 0")
    if params.tol <= 0:
        raise ValueError("tol must be > 0")
    if params.max_iter < 1:
        raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class LinearClassifierModel:
    weights: np.ndarray  # (n_features, n_classes), on standardized inputs
    bias: np.ndarray  # (n_classes,)
    mean: np.ndarray
    scale: np.ndarray
    reg: float

    @property
    def n_classes(self) -> int:
        return int(self.weights.shape[1])

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[0])

    def margins(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        return ((X - self.mean) / self.scale) @ self.weights + self.bias


def _objective(W: np.ndarray, residual: np.ndarray, reg: float, n: int) -> float:
    return 0.5 * reg * float((W * W).sum()) + float((residual * residual).sum()) / n


def fit_linear(
    features: np.ndarray,
    labels: np.ndarray,
    params: LinearParams,
    *,
    n_classes: int | None = None,
) -> LinearClassifierModel:
    """One-vs-rest L2-regularized squared-hinge classifiers.

    Inputs are z-scored with training statistics (dimensions whose variance is
    below a floor keep unit scale). All classes are solved together by full-batch
    gradient descent with step ``1 / L`` until the relative objective change
    drops below ``params.tol``.
    """
    validate_linear_params(params)
    X = np.asarray(features, dtype=np.float64)
    y = check_labels(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch("features must be (n_samples, n_features) matching labels")
    n, d = X.shape
    n_classes = n_classes or int(y.max()) + 1

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std * std < _VARIANCE_FLOOR, 1.0, std)
    Z = (X - mean) / scale

    Y = -np.ones((n, n_classes))
    Y[np.arange(n), y] = 1.0

    sigma = np.linalg.norm(np.hstack([Z, np.ones((n, 1))]), 2)
    step = 1.0 / (2.0 * sigma * sigma / n + params.reg)

    W = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    residual = np.maximum(0.0, 1.0 - Y * (Z @ W + b))
    f_prev = _objective(W, residual, params.reg, n)
    it = 0
    for it in range(1, params.max_iter + 1):
        g = Y * residual
        W = W - step * (params.reg * W - (2.0 / n) * (Z.T @ g))
        b = b + step * (2.0 / n) * g.sum(axis=0)
        residual = np.maximum(0.0, 1.0 - Y * (Z @ W + b))
        f = _objective(W, residual, params.reg, n)
        if abs(f_prev - f) <= params.tol * max(f_prev, np.finfo(np.float64).tiny):
            break
        f_prev = f
    logger.info("LINEAR FIT samples=%d features=%d iterations=%d", n, d, it)
    return LinearClassifierModel(weights=W, bias=b, mean=mean, scale=scale, reg=params.reg)


def linear_predict_proba(model: LinearClassifierModel, X: np.ndarray) -> np.ndarray:
    """Softmax over one-vs-rest margins."""
    m = model.margins(X)
    m = m - m.max(axis=1, keepdims=True)
    e = np.exp(m)
    return e / e.sum(axis=1, keepdims=True)
