from __future__ import annotations

import logging
import time
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from threading import Lock

logger = logging.getLogger("pointhop")

_STATS_FIELDS = (
    ("clouds", "clouds_transformed_total"),
    ("descriptors", "descriptors_total"),
    ("knn_fallback", "knn_fallback_total"),
    ("saab_negative", "saab_negative_responses_total"),
    ("rank_deficient", "saab_rank_deficient_total"),
    ("trees", "trees_fitted_total"),
    ("converted", "files_converted_total"),
    ("failed", "files_failed_total"),
)


class Metrics:
    def __init__(self) -> None:
        self._lock = Lock()
        self._counters: dict[str, int] = {}
        self._timings: dict[str, float] = {}

    def inc(self, key: str, by: int = 1) -> None:
        with self._lock:
            self._counters[key] = self._counters.get(key, 0) + int(by)

    def set(self, key: str, value: int) -> None:
        with self._lock:
            self._counters[key] = int(value)

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counters)

    @contextmanager
    def timed(self, stage: str) -> Iterator[None]:
        """Accumulate wall-clock seconds spent in ``stage``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            with self._lock:
                self._timings[stage] = self._timings.get(stage, 0.0) + elapsed
            logger.info("STAGE %s %.2fs", stage, elapsed)

    def timings(self) -> dict[str, float]:
        with self._lock:
            return dict(self._timings)


def format_stats(snapshot: Mapping[str, int]) -> str:
    parts = [f"{label}={snapshot.get(key, 0)}" for label, key in _STATS_FIELDS]
    return f"STATS {' '.join(parts)}"


def format_timings(timings: Mapping[str, float]) -> str:
    parts = [f"{stage}={seconds:.2f}s" for stage, seconds in timings.items()]
    return f"TIMINGS {' '.join(parts)}"
