import numpy as np
import pytest

from pointhop.errors import TooFewSamples
from pointhop.metrics import Metrics
from pointhop.saab import (
    CovarianceAccumulator,
    EnergyCurve,
    SaabFilterBank,
    apply_saab,
    dc_filter,
    energy_knee,
    fit_pca,
    fit_saab,
    remove_dc,
)


def _samples(n=500, dim=24, seed=0):
    rng = np.random.default_rng(seed)
    # distinct per-axis scales keep the spectrum well separated
    return rng.normal(size=(n, dim)) * np.linspace(3.0, 0.2, dim)


def test_dc_filter():
    assert dc_filter(4).tolist() == [0.5, 0.5, 0.5, 0.5]


def test_ac_filters_match_dense_oracle():
    x = _samples()
    bank = fit_saab(x, 15)
    ac = remove_dc(x)
    centered = ac - ac.mean(axis=0)
    values, vectors = np.linalg.eigh(centered.T @ centered / len(x))
    oracle = vectors[:, ::-1].T[:15]
    for got, want in zip(bank.ac_filters, oracle):
        sign = np.sign(got @ want)
        assert np.max(np.abs(got - sign * want)) <= 1e-6


def test_filters_are_orthonormal():
    bank = fit_saab(_samples(), 15)
    gram = bank.filters @ bank.filters.T
    assert np.max(np.abs(gram - np.eye(16))) <= 1e-6


def test_sign_convention():
    bank = fit_saab(_samples(), 10)
    for f in bank.ac_filters:
        assert f[np.argmax(np.abs(f))] > 0


def test_training_responses_are_nonnegative():
    x = _samples(seed=1)
    bank = fit_saab(x, 15)
    assert np.all(bank.apply(x) >= 0.0)
    assert bank.bias == pytest.approx(np.linalg.norm(x, axis=1).max())


def test_constant_vector_ac_outputs_equal_bias():
    bank = fit_saab(_samples(), 15)
    out = bank.apply(np.full(24, 2.5))
    assert np.all(np.abs(out[1:] - bank.bias) <= 1e-9)
    assert out[0] == pytest.approx(2.5 * np.sqrt(24) + bank.bias)


def test_constant_samples_are_rank_deficient():
    metrics = Metrics()
    x = np.ones((50, 8)) * np.arange(1, 51)[:, None]
    bank = fit_saab(x, 3, metrics=metrics)
    assert bank.n_effective == 0
    assert np.all(bank.ac_filters == 0.0)
    assert metrics.snapshot()["saab_rank_deficient_total"] == 1
    assert bank.output_dim == 4


def test_apply_matches_dense_multiply():
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
    bank = SaabFilterBank(
        filters=q[:6], bias=0.75, mean=np.zeros(12), eigenvalues=np.ones(11)
    )
    v = rng.normal(size=12)
    expected = np.array([q[i] @ v + 0.75 for i in range(6)])
    assert np.max(np.abs(apply_saab(bank, v) - expected)) <= 1e-12


def test_streaming_accumulator_matches_one_shot():
    x = _samples(seed=3)
    acc = CovarianceAccumulator(24)
    for start in range(0, len(x), 64):
        acc.update(x[start : start + 64])
    one = CovarianceAccumulator(24)
    one.update(x)
    assert np.allclose(acc.covariance(), one.covariance(), atol=1e-10)
    a = fit_saab(acc, 10)
    b = fit_saab(x, 10)
    assert np.allclose(a.filters, b.filters, atol=1e-8)


def test_accumulator_merge():
    x = _samples(seed=4)
    left, right = CovarianceAccumulator(24), CovarianceAccumulator(24)
    left.update(x[:200])
    right.update(x[200:])
    left.merge(right)
    full = CovarianceAccumulator(24)
    full.update(x)
    assert left.count == 500
    assert np.allclose(left.covariance(), full.covariance(), atol=1e-10)
    assert left.max_norm == full.max_norm


def test_uncentered_covariance_adds_mean_outer_product():
    x = _samples(seed=5) + 1.0
    acc = CovarianceAccumulator(24, ac_only=False)
    acc.update(x)
    assert np.allclose(acc.covariance(centered=False), x.T @ x / len(x), atol=1e-10)


def test_fit_saab_errors():
    with pytest.raises(ValueError, match="n_ac"):
        fit_saab(_samples(), 24)
    with pytest.raises(TooFewSamples):
        fit_saab(_samples(n=5), 10)


def test_pca_bank():
    x = _samples(seed=6) + 4.0
    bank = fit_pca(x, 6)
    assert bank.kind == "pca"
    assert bank.bias == 0.0
    out = bank.apply(x)
    assert out.shape == (500, 6)
    assert np.allclose(out.mean(axis=0), 0.0, atol=1e-9)


def test_energy_knee_flat_spectrum():
    assert energy_knee(EnergyCurve(np.array([10.0, 10.0, 10.0]))) == 1


def test_energy_knee_sharp_elbow():
    values = np.array([10.0] * 5 + [0.1] * 10)
    assert energy_knee(EnergyCurve(values)) == 5


def test_energy_curve_ratios():
    ratios = EnergyCurve(np.array([3.0, 1.0])).ratios
    assert ratios.tolist() == [0.75, 1.0]


def test_ac_response_variance_is_nonincreasing():
    x = _samples(seed=6)
    bank = fit_saab(x, 15)
    variances = apply_saab(bank, x)[:, 1:].var(axis=0)
    assert np.all(np.diff(variances) <= 1e-9 * variances[0])
    assert np.allclose(variances, bank.eigenvalues[:15], rtol=1e-9)


def test_responses_never_exceed_input_energy():
    x = _samples(seed=7)
    vectors = np.random.default_rng(8).normal(size=(50, 24)) * 2.0
    energy = (vectors * vectors).sum(axis=1)
    partial = vectors @ fit_saab(x, 10).filters.T
    assert np.all((partial * partial).sum(axis=1) <= energy * (1.0 + 1e-12))
    complete = vectors @ fit_saab(x, 23).filters.T
    assert np.allclose((complete * complete).sum(axis=1), energy, rtol=1e-10)
