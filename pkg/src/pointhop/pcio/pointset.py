"""Point-set file formats.

xyz-text: one point per line, 3 or 6 whitespace-separated reals, ``#`` comments.
packed-binary: ``b"PHP1"``, u32 LE point count, u8 dims (3 or 6), three reserved
zero bytes, then ``N * dims`` little-endian float32 values, row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Literal

import numpy as np

from pointhop.errors import DataError, LengthMismatch, MalformedBody, UnknownMagic
from pointhop.pcio.cloud import PointCloud, normalize_cloud
from pointhop.pcio.mesh import parse_off, sample_mesh_surface

PointSetFormat = Literal["xyz", "php"]

PACKED_MAGIC = b"PHP1"
_PACKED_HEADER = struct.Struct("<4sIB3x")


def _parse_xyz(text: str) -> PointCloud:
    rows: list[list[float]] = []
    width = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 6):
            raise MalformedBody(f"line {lineno}: expected 3 or 6 values, got {len(parts)}")
        if width is None:
            width = len(parts)
        elif len(parts) != width:
            raise MalformedBody(f"line {lineno}: mixed 3- and 6-column rows")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise MalformedBody(f"line {lineno}: non-numeric value") from exc
    if not rows:
        raise MalformedBody("xyz text contains no points")
    values = np.asarray(rows, dtype=np.float64)
    colors = values[:, 3:6] if width == 6 else None
    return PointCloud(values[:, :3], colors)


def _parse_packed(data: bytes) -> PointCloud:
    if len(data) < _PACKED_HEADER.size:
        if not data.startswith(PACKED_MAGIC[: len(data)]):
            raise UnknownMagic("not a packed point set")
        raise LengthMismatch("packed point set shorter than its header")
    magic, count, dims = _PACKED_HEADER.unpack_from(data)
    if magic != PACKED_MAGIC:
        raise UnknownMagic(f"unknown magic {magic!r}")
    if dims not in (3, 6):
        raise LengthMismatch(f"dims must be 3 or 6, got {dims}")
    expected = _PACKED_HEADER.size + count * dims * 4
    if len(data) != expected:
        raise LengthMismatch(f"expected {expected} bytes for {count} points, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=_PACKED_HEADER.size)
    values = values.reshape(count, dims).astype(np.float64)
    colors = values[:, 3:6] if dims == 6 else None
    return PointCloud(values[:, :3], colors)


def read_point_set(data: bytes, format: PointSetFormat) -> PointCloud:
    if format == "php":
        return _parse_packed(data)
    if format == "xyz":
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedBody("xyz text is not UTF-8") from exc
        return _parse_xyz(text)
    raise ValueError(f"unknown point set format {format!r}")


def write_point_set(pc: PointCloud, format: PointSetFormat) -> bytes:
    values = pc.points if pc.colors is None else np.hstack([pc.points, pc.colors])
    if format == "php":
        header = _PACKED_HEADER.pack(PACKED_MAGIC, values.shape[0], values.shape[1])
        return header + np.ascontiguousarray(values, dtype="<f4").tobytes()
    if format == "xyz":
        lines = [" ".join(f"{v:.17g}" for v in row) for row in values]
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown point set format {format!r}")


def read_cloud_file(path: Path, *, points: int = 2048, seed: int = 0) -> PointCloud:
    """Load a cloud by suffix; meshes are sampled to ``points`` and normalized."""
    suffix = path.suffix.lower()
    data = path.read_bytes()
    if suffix == ".php":
        return read_point_set(data, "php")
    if suffix in (".xyz", ".txt"):
        return read_point_set(data, "xyz")
    if suffix == ".off":
        return normalize_cloud(sample_mesh_surface(parse_off(data), points, seed))
    raise DataError(f"unsupported point file suffix {suffix!r} ({path})")
