from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pointhop.errors import (
    DegenerateMesh,
    IndexOutOfRange,
    MalformedBody,
    MalformedHeader,
    TruncatedFile,
)
from pointhop.pcio.cloud import PointCloud
from pointhop.rng import make_rng


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (nv, 3) float64
    faces: np.ndarray  # (nf, 3) int64, triangles only

    @property
    def triangle_areas(self) -> np.ndarray:
        a = self.vertices[self.faces[:, 0]]
        b = self.vertices[self.faces[:, 1]]
        c = self.vertices[self.faces[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def _content_lines(text: str) -> list[str]:
    lines = []
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return lines


def _parse_counts(line: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) not in (2, 3):
        raise MalformedHeader(f"expected 'nv nf ne' counts, got {line!r}")
    try:
        counts = [int(p) for p in parts]
    except ValueError as exc:
        raise MalformedHeader(f"non-integer counts line {line!r}") from exc
    if counts[0] < 0 or counts[1] < 0:
        raise MalformedHeader(f"negative counts in {line!r}")
    return counts[0], counts[1]


def parse_off(data: bytes) -> Mesh:
    """Parse an OFF mesh; polygons are fan-triangulated.

    The ``OFF`` keyword is optional and may be fused with the counts
    (``OFF3 1 0``), as found in the raw ModelNet40 files.
    """
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise MalformedHeader("OFF data is not ASCII text") from exc

    lines = _content_lines(text)
    if not lines:
        raise MalformedHeader("empty OFF data")

    pos = 0
    head = lines[0]
    if head.startswith("OFF"):
        rest = head[3:].strip()
        pos = 1
        if rest:
            nv, nf = _parse_counts(rest)
        else:
            if len(lines) < 2:
                raise MalformedHeader("missing counts line")
            nv, nf = _parse_counts(lines[1])
            pos = 2
    else:
        nv, nf = _parse_counts(head)
        pos = 1

    if len(lines) < pos + nv:
        raise TruncatedFile(f"expected {nv} vertex lines, found {len(lines) - pos}")
    vertices = np.empty((nv, 3), dtype=np.float64)
    for i in range(nv):
        parts = lines[pos + i].split()
        if len(parts) < 3:
            raise MalformedBody(f"vertex {i} has fewer than 3 coordinates")
        try:
            vertices[i] = [float(parts[0]), float(parts[1]), float(parts[2])]
        except ValueError as exc:
            raise MalformedBody(f"vertex {i} is not numeric") from exc
    if not np.all(np.isfinite(vertices)):
        raise MalformedBody("vertex coordinates must be finite")
    pos += nv

    if len(lines) < pos + nf:
        raise TruncatedFile(f"expected {nf} face lines, found {len(lines) - pos}")
    triangles: list[tuple[int, int, int]] = []
    for i in range(nf):
        parts = lines[pos + i].split()
        try:
            count = int(parts[0])
            idx = [int(p) for p in parts[1 : count + 1]]
        except ValueError as exc:
            raise MalformedBody(f"face {i} is not integer") from exc
        if count < 3 or len(idx) < count:
            raise MalformedBody(f"face {i} lists fewer indices than declared")
        for v in idx:
            if v < 0 or v >= nv:
                raise IndexOutOfRange(f"face {i} references vertex {v} (nv={nv})")
        for j in range(1, count - 1):
            triangles.append((idx[0], idx[j], idx[j + 1]))

    faces = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    return Mesh(vertices=vertices, faces=faces)


def sample_mesh_surface(mesh: Mesh, n: int, seed: int) -> PointCloud:
    """Area-weighted uniform surface sampling.

    Triangles are chosen by inverse-CDF lookup of one uniform per point over the
    cumulative areas; positions use the square-root barycentric map
    ``(1 - sqrt(r1), sqrt(r1) * (1 - r2), sqrt(r1) * r2)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mesh.faces.shape[0] == 0:
        raise DegenerateMesh("mesh has no faces")
    areas = mesh.triangle_areas
    total = float(areas.sum())
    if not total > 0.0 or not math.isfinite(total):
        raise DegenerateMesh("mesh has zero total surface area")

    rng = make_rng(seed)
    cdf = np.cumsum(areas) / total
    picks = rng.random(n)
    tri = np.searchsorted(cdf, picks, side="right")
    # Zero-area triangles own an empty cdf interval; only the top end needs clamping.
    tri = np.minimum(tri, int(np.flatnonzero(areas > 0.0)[-1]))

    r = rng.random((n, 2))
    s1 = np.sqrt(r[:, 0:1])
    u = 1.0 - s1
    v = s1 * (1.0 - r[:, 1:2])
    w = s1 * r[:, 1:2]
    faces = mesh.faces[tri]
    points = (
        u * mesh.vertices[faces[:, 0]]
        + v * mesh.vertices[faces[:, 1]]
        + w * mesh.vertices[faces[:, 2]]
    )
    return PointCloud(points)
