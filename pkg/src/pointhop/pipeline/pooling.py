from __future__ import annotations

from collections.abc import Callable

import numpy as np

from pointhop.errors import EmptyMatrix


def _max(a: np.ndarray) -> np.ndarray:
    return a.max(axis=0)


def _mean(a: np.ndarray) -> np.ndarray:
    return a.mean(axis=0)


def _l1(a: np.ndarray) -> np.ndarray:
    return np.abs(a).mean(axis=0)


def _l2(a: np.ndarray) -> np.ndarray:
    return np.sqrt((a * a).mean(axis=0))


_POOL_FUNCS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "max": _max,
    "mean": _mean,
    "l1": _l1,
    "l2": _l2,
}


def pool(attrs: np.ndarray, method: str) -> np.ndarray:
    """Per-channel aggregation over the points (rows) of an attribute matrix."""
    a = np.asarray(attrs, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] == 0:
        raise EmptyMatrix("cannot pool an empty attribute matrix")
    try:
        fn = _POOL_FUNCS[method]
    except KeyError as exc:
        raise ValueError(f"unknown pooling {method!r}") from exc
    return fn(a)
