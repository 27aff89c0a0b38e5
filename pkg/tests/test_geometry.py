import numpy as np
import pytest

from pointhop.errors import DimensionMismatch, KTooLarge, TooManyRequested
from pointhop.geometry import (
    SpatialIndex,
    canonical_order,
    farthest_point_sample,
    fps_indices,
    knn,
    knn_batch,
    octant_descriptor,
    octant_descriptors,
    random_dropout,
)
from pointhop.metrics import Metrics
from pointhop.pcio import PointCloud


def _sq(points, p):
    dx = points[:, 0] - p[0]
    dy = points[:, 1] - p[1]
    dz = points[:, 2] - p[2]
    return dx * dx + dy * dy + dz * dz


def _knn_oracle(points, center, k):
    d = _sq(points, points[center])
    d[center] = -1.0
    order = np.lexsort((np.arange(len(points)), d))
    return np.sort(order[:k])


def _fps_oracle(points, n):
    """Greedy FPS recomputing every distance from scratch at each step."""
    diff = points - points.mean(axis=0)
    start = int(np.argmin(diff[:, 0] ** 2 + diff[:, 1] ** 2 + diff[:, 2] ** 2))
    chosen = [start]
    for _ in range(1, n):
        d = np.min([_sq(points, points[c]) for c in chosen], axis=0)
        d[chosen] = -np.inf
        chosen.append(int(np.argmax(d)))
    return np.asarray(chosen)


def test_knn_matches_brute_force_oracle():
    rng = np.random.default_rng(0)
    for trial in range(200):
        n = int(rng.integers(2, 513))
        if trial % 4 == 0:
            # integer grids produce distance ties
            points = rng.integers(0, 4, size=(n, 3)).astype(np.float64)
        else:
            points = rng.normal(size=(n, 3))
        k = int(rng.integers(1, min(64, n) + 1))
        index = SpatialIndex(points)
        centers = rng.choice(n, size=min(n, 8), replace=False)
        got = knn_batch(index, centers, k)
        for row, c in enumerate(centers):
            assert np.array_equal(got[row], _knn_oracle(points, int(c), k)), (trial, c)


def test_knn_k1_is_the_query_point():
    points = np.random.default_rng(1).normal(size=(30, 3))
    region = knn(SpatialIndex(points), 7, 1)
    assert region.center_index == 7
    assert region.neighbor_indices.tolist() == [7]


def test_knn_equidistant_ties_take_lowest_indices():
    points = np.array(
        [
            [0.0, 0.0, 0.0],
            [5.0, 5.0, 5.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
        ]
    )
    region = knn(SpatialIndex(points), 0, 3)
    assert region.neighbor_indices.tolist() == [0, 2, 3]


def test_knn_center_wins_over_duplicates():
    points = np.zeros((20, 3))
    got = knn_batch(SpatialIndex(points), np.array([15]), 3)
    assert got[0].tolist() == [0, 1, 15]


def test_knn_k_too_large():
    index = SpatialIndex(np.zeros((4, 3)))
    with pytest.raises(KTooLarge):
        knn_batch(index, np.array([0]), 5)
    with pytest.raises(DimensionMismatch):
        knn_batch(index, np.array([4]), 2)


def test_knn_counts_fallbacks():
    metrics = Metrics()
    points = np.zeros((40, 3))
    knn_batch(SpatialIndex(points), np.arange(40), 4, metrics=metrics)
    assert metrics.snapshot()["knn_fallback_total"] == 40


def test_fps_matches_greedy_oracle():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n_points = int(rng.integers(2, 51))
        points = rng.normal(size=(n_points, 3))
        n = int(rng.integers(1, n_points + 1))
        assert np.array_equal(fps_indices(points, n), _fps_oracle(points, n))


def test_fps_greedy_property():
    points = np.random.default_rng(3).normal(size=(50, 3))
    order = fps_indices(points, 20)
    for t in range(2, 20):
        picked = order[:t]
        rest = np.setdiff1d(np.arange(50), picked)
        dist = np.array([_sq(points[picked], points[i]).min() for i in rest])
        chosen = _sq(points[picked], points[order[t]]).min()
        assert chosen == dist.max()


def test_fps_points_on_a_line():
    points = np.column_stack([np.arange(10.0), np.zeros(10), np.zeros(10)])
    assert fps_indices(points, 3).tolist() == [4, 9, 0]


def test_fps_full_selection_is_a_permutation():
    pc = PointCloud(np.random.default_rng(4).normal(size=(64, 3)))
    order = farthest_point_sample(pc, 64)
    assert sorted(order.tolist()) == list(range(64))
    assert np.array_equal(order, farthest_point_sample(pc, 64))


def test_fps_too_many():
    with pytest.raises(TooManyRequested):
        fps_indices(np.zeros((3, 3)), 4)


def test_dropout_sizes_and_determinism():
    pc = PointCloud(np.random.default_rng(5).normal(size=(2048, 3)))
    for n in (256, 512, 768, 1024):
        a = random_dropout(pc, n, seed=9)
        b = random_dropout(pc, n, seed=9)
        assert len(a) == n
        assert np.array_equal(a.points, b.points)
        assert len(np.unique(a.points, axis=0)) == n


def test_dropout_full_is_set_equal():
    points = np.random.default_rng(6).normal(size=(100, 3))
    out = random_dropout(PointCloud(points), 100, seed=1)
    assert np.array_equal(out.points, points[canonical_order(points)])


def test_dropout_ignores_input_order():
    points = np.random.default_rng(7).normal(size=(300, 3))
    perm = np.random.default_rng(8).permutation(300)
    a = random_dropout(PointCloud(points), 64, seed=2)
    b = random_dropout(PointCloud(points[perm]), 64, seed=2)
    assert np.array_equal(a.points, b.points)


def test_dropout_too_many():
    with pytest.raises(TooManyRequested):
        random_dropout(PointCloud(np.zeros((10, 3))), 11, seed=0)


def test_descriptor_dimension():
    rng = np.random.default_rng(9)
    points = rng.normal(size=(40, 3))
    neighbors = knn_batch(SpatialIndex(points), np.arange(40), 8)
    assert octant_descriptors(points, points, points, neighbors).shape == (40, 24)
    attrs = rng.normal(size=(40, 24))
    assert octant_descriptors(points, attrs, points, neighbors).shape == (40, 192)


def test_descriptor_coincident_neighbors_fill_quadrant_zero():
    points = np.zeros((5, 3))
    attrs = np.tile([1.0, 2.0], (5, 1))
    desc = octant_descriptors(points, attrs, points[[0]], np.arange(5)[None, :])[0]
    assert desc[:2].tolist() == [1.0, 2.0]
    assert np.all(desc[2:] == 0.0)


def test_descriptor_hand_placed_quadrants():
    points = np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, -1.0, -1.0],  # quadrant 1 (x >)
            [-1.0, 1.0, -1.0],  # quadrant 2 (y >)
            [1.0, 1.0, 1.0],  # quadrant 7
            [1.0, 1.0, -2.0],  # quadrant 3
        ]
    )
    attrs = np.arange(5, dtype=np.float64)[:, None] * 10.0
    region = knn(SpatialIndex(points), 0, 5)
    desc = octant_descriptor(points[0], region, points, attrs)
    expected = np.zeros(8)
    expected[0] = 0.0  # the center itself
    expected[1] = 10.0
    expected[2] = 20.0
    expected[7] = 30.0
    expected[3] = 40.0
    assert desc.tolist() == expected.tolist()


def test_descriptor_quadrant_mean():
    points = np.array([[0.0, 0.0, 0.0], [1.0, 0.5, 0.5], [2.0, 0.5, 0.5]])
    attrs = np.array([[0.0], [3.0], [5.0]])
    desc = octant_descriptors(points, attrs, points[[0]], np.array([[0, 1, 2]]))[0]
    assert desc[7] == 4.0


def test_descriptor_permutation_invariance():
    rng = np.random.default_rng(10)
    points = rng.normal(size=(200, 3))
    attrs = rng.normal(size=(200, 16))
    neighbors = knn_batch(SpatialIndex(points), np.arange(0, 200, 10), 32)
    base = octant_descriptors(points, attrs, points[::10], neighbors)
    for _ in range(100):
        shuffled = np.array([rng.permutation(row) for row in neighbors])
        assert np.array_equal(octant_descriptors(points, attrs, points[::10], shuffled), base)


def test_descriptor_shape_errors():
    points = np.zeros((4, 3))
    with pytest.raises(DimensionMismatch):
        octant_descriptors(points, np.zeros((3, 2)), points[[0]], np.array([[0, 1]]))
    with pytest.raises(DimensionMismatch):
        octant_descriptors(points, np.zeros((4, 2)), points[[0]], np.array([[0, 9]]))


def test_descriptor_moves_at_most_epsilon_without_quadrant_change():
    rng = np.random.default_rng(12)
    eps = 1e-3
    # every coordinate stays at least 0.1 away from the center's planes
    points = rng.uniform(0.1, 1.0, size=(64, 3)) * rng.choice([-1.0, 1.0], size=(64, 3))
    moved = points + rng.uniform(-eps, eps, size=points.shape)
    center = np.zeros((1, 3))
    neighbors = np.arange(64)[None, :]
    before = octant_descriptors(points, points, center, neighbors)[0]
    after = octant_descriptors(moved, moved, center, neighbors)[0]
    assert np.max(np.abs(after - before)) <= eps * (1.0 + 1e-9)
