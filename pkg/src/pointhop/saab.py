"""One-stage Saab transform.

A bank holds one DC filter (the normalized all-ones vector), ``n_ac`` AC
filters taken from PCA of the DC-removed inputs, and a single bias equal to the
largest training-vector norm, so every training response is non-negative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg

from pointhop.errors import DimensionMismatch, TooFewSamples
from pointhop.metrics import Metrics

logger = logging.getLogger("pointhop")

BankKind = Literal["saab", "pca"]

# Eigenvalues below this fraction of the mean squared sample norm count as zero.
_RANK_RTOL = 1e-12


def dc_filter(dim: int) -> np.ndarray:
    return np.full(dim, 1.0 / np.sqrt(dim))


def remove_dc(samples: np.ndarray) -> np.ndarray:
    """AC part ``v - (a0 . v) a0`` of each row."""
    a0 = dc_filter(samples.shape[1])
    return samples - np.outer(samples @ a0, a0)


class CovarianceAccumulator:
    """Streaming mean/covariance with pairwise (Chan et al.) merges.

    Batches must be added in a fixed order for bit-identical results.
    """

    def __init__(self, dim: int, *, ac_only: bool = True) -> None:
        self.dim = dim
        self.ac_only = ac_only
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros((dim, dim))
        self.max_norm = 0.0
        self.sum_sq_norm = 0.0

    def update(self, batch: np.ndarray) -> None:
        x = np.asarray(batch, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise DimensionMismatch(f"expected samples of dim {self.dim}, got {x.shape}")
        if x.shape[0] == 0:
            return
        sq = np.einsum("ij,ij->i", x, x)
        self.max_norm = max(self.max_norm, float(np.sqrt(sq.max())))
        self.sum_sq_norm += float(sq.sum())
        if self.ac_only:
            x = remove_dc(x)
        n_b = x.shape[0]
        mean_b = x.mean(axis=0)
        centered = x - mean_b
        m2_b = centered.T @ centered
        self._merge(n_b, mean_b, m2_b)

    def merge(self, other: CovarianceAccumulator) -> None:
        if other.dim != self.dim or other.ac_only != self.ac_only:
            raise ValueError("cannot merge accumulators of different shape")
        if other.count == 0:
            return
        self.max_norm = max(self.max_norm, other.max_norm)
        self.sum_sq_norm += other.sum_sq_norm
        self._merge(other.count, other.mean, other.m2)

    def _merge(self, n_b: int, mean_b: np.ndarray, m2_b: np.ndarray) -> None:
        total = self.count + n_b
        delta = mean_b - self.mean
        self.m2 = self.m2 + m2_b + np.outer(delta, delta) * (self.count * n_b / total)
        self.mean = self.mean + delta * (n_b / total)
        self.count = total

    def covariance(self, *, centered: bool = True) -> np.ndarray:
        if self.count == 0:
            raise TooFewSamples("no samples accumulated")
        cov = self.m2 / self.count
        if not centered:
            cov = cov + np.outer(self.mean, self.mean)
        return cov

    @property
    def mean_sq_norm(self) -> float:
        return self.sum_sq_norm / self.count if self.count else 0.0


@dataclass(frozen=True)
class EnergyCurve:
    eigenvalues: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        clipped = np.clip(self.eigenvalues, 0.0, None)
        total = clipped.sum()
        if total <= 0.0:
            return np.linspace(1.0 / len(clipped), 1.0, len(clipped))
        ratios = np.cumsum(clipped) / total
        ratios[-1] = 1.0
        return ratios


@dataclass(frozen=True)
class SaabFilterBank:
    filters: np.ndarray  # (output_dim, input_dim); row 0 is the DC filter for saab banks
    bias: float
    mean: np.ndarray  # subtracted before filtering; zeros for saab banks
    eigenvalues: np.ndarray = field(repr=False)
    kind: BankKind = "saab"
    n_effective: int = 0

    @property
    def input_dim(self) -> int:
        return int(self.filters.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.filters.shape[0])

    @property
    def n_ac(self) -> int:
        return self.output_dim - 1

    @property
    def dc_filter(self) -> np.ndarray:
        return self.filters[0]

    @property
    def ac_filters(self) -> np.ndarray:
        return self.filters[1:]

    def energy_curve(self) -> EnergyCurve:
        return EnergyCurve(self.eigenvalues)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return apply_saab(self, v)


def _sorted_eigh(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values, vectors = scipy.linalg.eigh(cov)
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].T.copy()
    # Sign convention: the largest-magnitude entry of every filter is positive.
    pivots = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(len(vectors)), pivots])
    signs[signs == 0] = 1.0
    return values, vectors * signs[:, None]


def _as_accumulator(samples: np.ndarray | CovarianceAccumulator, ac_only: bool):
    if isinstance(samples, CovarianceAccumulator):
        if samples.ac_only != ac_only:
            raise ValueError("accumulator DC handling does not match the requested fit")
        return samples
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("samples must be a 2D array")
    acc = CovarianceAccumulator(x.shape[1], ac_only=ac_only)
    acc.update(x)
    return acc


def fit_saab(
    samples: np.ndarray | CovarianceAccumulator,
    n_ac: int,
    *,
    centered: bool = True,
    metrics: Metrics | None = None,
) -> SaabFilterBank:
    """Fit a Saab bank from samples (rows) or a pre-filled accumulator.

    With fewer than ``n_ac`` nonzero AC eigenvalues the available filters are
    kept and the rest are zero rows; this is logged, not raised.
    """
    acc = _as_accumulator(samples, ac_only=True)
    dim = acc.dim
    if n_ac < 0 or n_ac > dim - 1:
        raise ValueError(f"n_ac must be between 0 and {dim - 1}, got {n_ac}")
    if acc.count < n_ac + 1:
        raise TooFewSamples(f"need at least {n_ac + 1} samples, got {acc.count}")

    values, vectors = _sorted_eigh(acc.covariance(centered=centered))
    tol = _RANK_RTOL * max(acc.mean_sq_norm, np.finfo(np.float64).tiny)
    # The DC direction is an exact null vector of the AC covariance; drop it.
    dc = dc_filter(dim)
    keep = np.abs(vectors @ dc) < 0.5
    values, vectors = values[keep], vectors[keep]
    n_effective = min(n_ac, int(np.count_nonzero(values > tol)))
    if n_effective < n_ac:
        logger.warning(
            "RANK DEFICIENT dim=%d requested=%d available=%d (zero-padded)",
            dim,
            n_ac,
            n_effective,
        )
        if metrics:
            metrics.inc("saab_rank_deficient_total")

    filters = np.zeros((1 + n_ac, dim))
    filters[0] = dc
    filters[1 : 1 + n_effective] = vectors[:n_effective]
    return SaabFilterBank(
        filters=filters,
        bias=float(acc.max_norm),
        mean=np.zeros(dim),
        eigenvalues=values,
        kind="saab",
        n_effective=n_effective,
    )


def fit_pca(
    samples: np.ndarray | CovarianceAccumulator,
    n_out: int,
    *,
    metrics: Metrics | None = None,
) -> SaabFilterBank:
    """Plain PCA bank: mean-centered projection, no DC filter, no bias."""
    acc = _as_accumulator(samples, ac_only=False)
    dim = acc.dim
    if n_out < 1 or n_out > dim:
        raise ValueError(f"n_out must be between 1 and {dim}, got {n_out}")
    if acc.count < n_out:
        raise TooFewSamples(f"need at least {n_out} samples, got {acc.count}")
    values, vectors = _sorted_eigh(acc.covariance(centered=True))
    tol = _RANK_RTOL * max(acc.mean_sq_norm, np.finfo(np.float64).tiny)
    n_effective = min(n_out, int(np.count_nonzero(values > tol)))
    if n_effective < n_out:
        logger.warning(
            "RANK DEFICIENT pca dim=%d requested=%d available=%d", dim, n_out, n_effective
        )
        if metrics:
            metrics.inc("saab_rank_deficient_total")
    filters = np.zeros((n_out, dim))
    filters[:n_effective] = vectors[:n_effective]
    return SaabFilterBank(
        filters=filters,
        bias=0.0,
        mean=acc.mean.copy(),
        eigenvalues=values,
        kind="pca",
        n_effective=n_effective,
    )


def apply_saab(bank: SaabFilterBank, v: np.ndarray) -> np.ndarray:
    """``y_k = a_k . (v - mean) + b`` for one vector or a batch of rows."""
    x = np.asarray(v, dtype=np.float64)
    if x.shape[-1] != bank.input_dim:
        raise DimensionMismatch(f"expected input dim {bank.input_dim}, got {x.shape[-1]}")
    if bank.kind == "pca":
        x = x - bank.mean
    return x @ bank.filters.T + bank.bias


def count_negative(responses: np.ndarray) -> int:
    return int(np.count_nonzero(responses < 0.0))


def energy_knee(curve: EnergyCurve) -> int:
    """Filter count at the knee of the cumulative-energy curve.

    The knee is the point farthest from the chord joining the first and last
    points of ``(k, ratio_k)``, k = 1..n. Flat (linear) curves return 1.
    """
    ratios = curve.ratios
    n = len(ratios)
    if n < 3:
        raise ValueError("energy_knee needs at least 3 eigenvalues")
    x = np.arange(1, n + 1, dtype=np.float64)
    x0, y0, x1, y1 = x[0], ratios[0], x[-1], ratios[-1]
    # Unnormalized perpendicular distance; the chord length is a common factor.
    dist = np.abs((y1 - y0) * x - (x1 - x0) * ratios + x1 * y0 - y1 * x0)
    scale = np.hypot(x1 - x0, y1 - y0)
    if dist.max() / scale <= 1e-12:
        return 1
    return int(x[int(np.argmax(dist))])
