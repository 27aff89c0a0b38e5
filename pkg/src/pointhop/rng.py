"""Seeded random streams.

All randomness goes through numpy's ``Philox`` bit generator, a counter-based
generator (Philox-4x64-10) whose output depends only on its key, so a seed gives
the same stream on every platform. Child seeds are derived with SplitMix64.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(seed: int, stream: int = 0) -> int:
    """Return the ``stream``-th SplitMix64 output for ``seed``.

    state_i = seed + (stream + 1) * 0x9E3779B97F4A7C15, then the standard
    xor-shift-multiply finalizer.
    """
    z = (int(seed) + (int(stream) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & _MASK64))


def seed_for_name(seed: int, name: str) -> int:
    """Child seed keyed by a string (e.g. a dataset-relative path)."""
    return splitmix64(seed, zlib.crc32(name.encode("utf-8")))
