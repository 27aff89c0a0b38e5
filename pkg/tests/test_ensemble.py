import numpy as np
import pytest
from scipy.spatial.distance import pdist
from synthetic_shapes import make_shape, make_split

from pointhop.classify import (
    ForestParams,
    LinearClassifierModel,
    LinearParams,
    fit_linear,
    fit_random_forest,
    predict,
    predict_proba,
)
from pointhop.ensemble import (
    HP_ANGLES,
    HP_FILTERS,
    HP_NEIGHBORS,
    HP_UNIT_POINTS,
    Branch,
    EnsembleSpec,
    decision_ensemble,
    decision_vectors,
    feature_ensemble,
    feature_ensemble_batch,
    fit_ensemble,
    fold_assignment,
    hp_preset,
    out_of_fold_decisions,
    rotate_cloud,
    validate_ensemble_spec,
)
from pointhop.pcio import PointCloud
from pointhop.pipeline import PointHopConfig, extract_features, fit_pointhop

SMALL = PointHopConfig(
    input_points=128,
    unit_points=(128, 64, 32),
    k_values=(16, 16, 8),
    n_ac=(10, 12, 14),
    seed=5,
)


@pytest.fixture(scope="module")
def clouds():
    return make_split(2, 160, seed=6)[0]


def test_rotation_identities():
    pc = make_shape("box", 64, seed=0)
    assert np.array_equal(rotate_cloud(pc, 0.0).points, pc.points)
    assert np.allclose(rotate_cloud(pc, 360.0).points, pc.points)
    turned = pc
    for _ in range(8):
        turned = rotate_cloud(turned, 45.0)
    assert np.allclose(turned.points, pc.points)


def test_rotation_is_rigid_about_z():
    pc = make_shape("cone", 64, seed=1)
    rotated = rotate_cloud(pc, 135.0)
    assert np.allclose(pdist(rotated.points), pdist(pc.points))
    assert np.array_equal(rotated.points[:, 2], pc.points[:, 2])
    quarter = rotate_cloud(PointCloud(np.array([[1.0, 0.0, 0.5]])), 90.0)
    assert np.allclose(quarter.points, [[0.0, 1.0, 0.5]])


def test_rotation_rejects_nan():
    with pytest.raises(ValueError):
        rotate_cloud(make_shape("sphere", 8, seed=0), float("nan"))


def test_single_branch_matches_pipeline(clouds):
    model = fit_pointhop(clouds, SMALL)
    (branch,) = fit_ensemble(clouds, EnsembleSpec.single(SMALL))
    assert np.array_equal(feature_ensemble([branch], clouds[0]), extract_features(model, clouds[0]))


def test_feature_ensemble_concatenates_in_branch_order(clouds):
    spec = EnsembleSpec(branches=(Branch(SMALL, 0.0), Branch(SMALL.replace(n_ac=(8, 9, 10)), 90.0)))
    branches = fit_ensemble(clouds, spec, workers=2)
    lengths = [b.model.feature_length for b in branches]
    vec = feature_ensemble(branches, clouds[1])
    assert vec.shape == (sum(lengths),)
    rotated = rotate_cloud(clouds[1], 90.0)
    assert np.array_equal(vec[lengths[0] :], extract_features(branches[1].model, rotated))

    batch = feature_ensemble_batch(branches, clouds, workers=2)
    assert batch.shape == (len(clouds), sum(lengths))
    assert np.array_equal(batch[1], vec)

    swapped = feature_ensemble(branches[::-1], clouds[1])
    assert np.array_equal(swapped, np.concatenate([vec[lengths[0] :], vec[: lengths[0]]]))


def _linear(n_features, n_classes, seed):
    rng = np.random.default_rng(seed)
    return LinearClassifierModel(
        weights=rng.standard_normal((n_features, n_classes)),
        bias=np.zeros(n_classes),
        mean=np.zeros(n_features),
        scale=np.ones(n_features),
        reg=1.0,
    )


def test_decision_vector_length():
    classifiers = [_linear(6, 40, seed) for seed in range(3)]
    blocks = [np.random.default_rng(9).standard_normal((4, 6)) for _ in range(3)]
    vectors = decision_vectors(classifiers, blocks)
    assert vectors.shape == (4, 120)
    assert np.allclose(vectors.reshape(4, 3, 40).sum(axis=2), 1.0)
    with pytest.raises(ValueError):
        decision_vectors(classifiers[:2], blocks)


def test_fold_assignment_is_stratified():
    labels = np.repeat([0, 1, 2], [10, 5, 7])
    folds = fold_assignment(labels, 5, seed=1)
    for c in range(3):
        counts = np.bincount(folds[labels == c], minlength=5)
        assert counts.max() - counts.min() <= 1
    overall = np.bincount(folds, minlength=5)
    assert overall.max() - overall.min() <= 1
    assert np.array_equal(folds, fold_assignment(labels, 5, seed=1))


def test_out_of_fold_decisions_hide_training_fit():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((80, 4))
    y = rng.integers(0, 2, size=80)

    def fit(X_fit, y_fit, seed):
        return fit_random_forest(X_fit, y_fit, ForestParams(n_trees=16), seed, n_classes=2)

    in_sample = predict_proba(fit(X, y, 0), X)
    held_out = out_of_fold_decisions(fit, X, y, 2, seed=5)
    assert held_out.shape == (80, 2)
    assert np.allclose(held_out.sum(axis=1), 1.0)
    # labels are noise: a forest recalls them in sample but cannot predict them
    assert (in_sample.argmax(axis=1) == y).mean() >= 0.9
    assert (held_out.argmax(axis=1) == y).mean() <= 0.8
    assert np.array_equal(held_out, out_of_fold_decisions(fit, X, y, 2, seed=5))


def test_decision_ensemble_single_cloud(clouds):
    branches = fit_ensemble(clouds, EnsembleSpec(branches=(Branch(SMALL), Branch(SMALL, 45.0))))
    classifiers = [_linear(b.model.feature_length, 4, i) for i, b in enumerate(branches)]
    assert decision_ensemble(branches, classifiers, clouds[0]).shape == (8,)


def test_decision_fusion_combines_complementary_branches():
    rng = np.random.default_rng(0)
    y = np.repeat(np.arange(3), 60)
    # branch a cannot tell 1 from 2, branch b cannot tell 0 from 1
    a = np.where(y == 0, -5.0, 5.0)[:, None] + 0.5 * rng.standard_normal((180, 1))
    b = np.where(y == 2, -5.0, 5.0)[:, None] + 0.5 * rng.standard_normal((180, 1))
    clf_a = fit_linear(a, y, LinearParams())
    clf_b = fit_linear(b, y, LinearParams())
    assert (predict(clf_a, a) == y).mean() < 0.8
    assert (predict(clf_b, b) == y).mean() < 0.8

    fused = decision_vectors([clf_a, clf_b], [a, b])
    final = fit_linear(fused, y, LinearParams())
    assert (predict(final, fused) == y).mean() >= 0.95


def test_branch_permutation_with_linear_classifier():
    rng = np.random.default_rng(3)
    y = np.repeat(np.arange(3), 40)
    blocks = [rng.standard_normal((120, 4)) + y[:, None] * w for w in (0.5, 1.0)]
    forward = np.hstack(blocks)
    backward = np.hstack(blocks[::-1])
    a = fit_linear(forward, y, LinearParams())
    b = fit_linear(backward, y, LinearParams())
    assert np.array_equal(predict(a, forward), predict(b, backward))


def test_hp_presets():
    base = PointHopConfig()
    a = hp_preset("HP-A", base)
    assert a.angles == HP_ANGLES
    assert all(br.config == base for br in a.branches)
    assert [br.config.n_ac for br in hp_preset("HP-B").branches] == list(HP_FILTERS)
    assert [br.config.k_values for br in hp_preset("HP-C").branches] == list(HP_NEIGHBORS)
    d = hp_preset("HP-D", base)
    assert [br.config.unit_points for br in d.branches] == list(HP_UNIT_POINTS)
    assert all(br.config.input_points == 512 for br in d.branches)
    assert len(hp_preset("all").branches) == 20
    for name in ("HP-A", "HP-B", "HP-C", "HP-D", "all"):
        validate_ensemble_spec(hp_preset(name))
    with pytest.raises(ValueError, match="unknown preset"):
        hp_preset("HP-E")


def test_hp_d_input_size_follows_first_unit():
    for base in (PointHopConfig(), PointHopConfig.compact_256()):
        branches = hp_preset("HP-D", base).branches
        assert {br.config.input_points for br in branches} == {512}
        assert all(br.config.k_values == base.k_values for br in branches)


def test_spec_validation():
    with pytest.raises(ValueError, match="at least one branch"):
        validate_ensemble_spec(EnsembleSpec(branches=()))
    with pytest.raises(ValueError, match=r"branches\[0\]\.angle"):
        validate_ensemble_spec(EnsembleSpec(branches=(Branch(SMALL, 360.0),)))
    bad = SMALL.replace(k_values=(16, 16))
    with pytest.raises(ValueError, match=r"branches\[1\]: "):
        validate_ensemble_spec(EnsembleSpec(branches=(Branch(SMALL), Branch(bad))))
    with pytest.raises(ValueError, match="fusion"):
        validate_ensemble_spec(EnsembleSpec(branches=(Branch(SMALL),), fusion="vote"))
