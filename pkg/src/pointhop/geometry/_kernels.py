"""Compiled spatial kernels.

Inputs must be C-contiguous float64 / int64 arrays; the Python wrappers in
``sampling`` and ``descriptor`` take care of that.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def fps_kernel(points, n, start):
    count = points.shape[0]
    out = np.empty(n, dtype=np.int64)
    min_d = np.full(count, np.inf)
    taken = np.zeros(count, dtype=np.bool_)
    out[0] = start
    taken[start] = True
    cur = start
    for t in range(1, n):
        px = points[cur, 0]
        py = points[cur, 1]
        pz = points[cur, 2]
        best = -1.0
        best_i = -1
        for i in range(count):
            dx = points[i, 0] - px
            dy = points[i, 1] - py
            dz = points[i, 2] - pz
            d = dx * dx + dy * dy + dz * dz
            if d < min_d[i]:
                min_d[i] = d
            # strict '>' keeps the lowest index on ties
            if not taken[i] and min_d[i] > best:
                best = min_d[i]
                best_i = i
        out[t] = best_i
        taken[best_i] = True
        cur = best_i
    return out


@njit(cache=True, nogil=True)
def octant_kernel(points, attrs, centers, neighbors):
    m_count = neighbors.shape[0]
    k = neighbors.shape[1]
    dim = attrs.shape[1]
    out = np.zeros((m_count, 8 * dim))
    counts = np.zeros(8, dtype=np.int64)
    for m in range(m_count):
        cx = centers[m, 0]
        cy = centers[m, 1]
        cz = centers[m, 2]
        counts[:] = 0
        # neighbors are sorted ascending, which fixes the summation order
        for j in range(k):
            i = neighbors[m, j]
            q = 0
            if points[i, 0] > cx:
                q |= 1
            if points[i, 1] > cy:
                q |= 2
            if points[i, 2] > cz:
                q |= 4
            counts[q] += 1
            base = q * dim
            for d in range(dim):
                out[m, base + d] += attrs[i, d]
        for q in range(8):
            if counts[q] > 0:
                base = q * dim
                for d in range(dim):
                    out[m, base + d] /= counts[q]
    return out
