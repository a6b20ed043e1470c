"""
Signed design, projector and likelihood
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import log_ndtr

from orthant_mc.core.design import (
    FlatComponents,
    apply_projector,
    build_signed_design,
    log_likelihood,
    log_ndtr_stable,
    orthant_constant,
    residual_norm,
)
from orthant_mc.models.dataset import Dataset
from orthant_mc.utils.exceptions import (
    DataValidationError,
    DimensionMismatchError,
    SingularDesignError,
    WeightBlowUpError,
)
from tests.conftest import random_dataset


def test_gram_identity_random(rng):
    for _ in range(10_000):
        p = int(rng.integers(1, 9))
        n = int(rng.integers(p, 51))
        d = random_dataset(rng, n, p)
        sd = build_signed_design(d)
        assert_allclose(sd.Xy.T @ sd.Xy, d.X.T @ d.X, rtol=1e-10, atol=1e-10 * np.abs(sd.gram).max())


def test_gram_factor_reconstructs(rng):
    sd = build_signed_design(random_dataset(rng, 30, 4))
    L = sd.gram_factor
    assert_allclose(L @ L.T, sd.gram, rtol=1e-12)
    A = sd.inv_gram_factor
    assert_allclose(A @ A.T, sd.inverse_gram(), rtol=1e-10, atol=1e-14)


def test_projector_idempotent_and_annihilates(rng):
    for _ in range(10_000):
        p = int(rng.integers(1, 6))
        n = int(rng.integers(p + 1, 20))
        sd = build_signed_design(random_dataset(rng, n, p))
        h = rng.standard_normal(n)
        ph = apply_projector(sd, h)
        assert_allclose(apply_projector(sd, ph), ph, atol=1e-12)

        in_span = sd.Xy @ rng.standard_normal(p)
        assert np.linalg.norm(apply_projector(sd, in_span)) <= 1e-10 * max(1.0, np.linalg.norm(in_span))


def test_residual_norm_of_row_matrix(rng):
    d = random_dataset(rng, 8, 2)
    sd = build_signed_design(d)
    H = np.abs(rng.standard_normal((5, 8)))
    batch_norms = sd.projector().norms(H)
    for h, expected in zip(H, batch_norms):
        assert residual_norm(sd, h) == pytest.approx(expected, rel=1e-14)


def test_projector_rejects_wrong_length(rng):
    sd = build_signed_design(random_dataset(rng, 6, 2))
    with pytest.raises(DimensionMismatchError):
        apply_projector(sd, np.ones(5))


def test_singular_design_names_pivot():
    d = Dataset.from_arrays([1, 0, 1], [[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(SingularDesignError) as excinfo:
        build_signed_design(d)
    assert excinfo.value.pivot == 1
    assert excinfo.value.exit_code == 2


def test_dataset_rejects_non_binary_y():
    with pytest.raises(DataValidationError, match=r"y\[2\]"):
        Dataset.from_arrays([1, 0, 2], [[1.0], [2.0], [3.0]])


def test_dataset_rejects_fewer_rows_than_columns():
    with pytest.raises(DataValidationError):
        Dataset.from_arrays([1], [[1.0, 2.0]])


def test_dataset_arrays_are_private(rng):
    X = rng.standard_normal((4, 2))
    d = Dataset.from_arrays([1, 0, 1, 0], X)
    X[0, 0] = 1e6
    assert d.X[0, 0] != 1e6
    assert not d.X.flags.writeable


def test_log_likelihood_at_zero(rng):
    d = random_dataset(rng, 7, 3)
    assert log_likelihood(d, np.zeros(3)) == pytest.approx(7 * np.log(0.5), rel=1e-14)


def test_log_likelihood_single_observation():
    d = Dataset.from_arrays([1], [[1.0]])
    assert np.exp(log_likelihood(d, [1.96])) == pytest.approx(0.9750021, rel=1e-6)


def test_log_likelihood_matches_termwise_sum(rng):
    d = random_dataset(rng, 12, 3)
    beta = 3.0 * rng.standard_normal(3)
    expected = np.sum(log_ndtr(d.signs * (d.X @ beta)))
    assert log_likelihood(d, beta) == pytest.approx(expected, rel=1e-10)


def test_log_ndtr_stable_tails():
    x = np.array([-1e3, -40.0, -8.5, -8.0, -3.0, 0.0, 2.0, 9.0, 30.0])
    assert_allclose(log_ndtr_stable(x), log_ndtr(x), rtol=1e-9, atol=1e-300)
    assert np.all(np.isfinite(log_ndtr_stable(x)))
    assert isinstance(log_ndtr_stable(-50.0), float)


def test_log_likelihood_rejects_wrong_beta(rng):
    d = random_dataset(rng, 5, 2)
    with pytest.raises(DimensionMismatchError):
        log_likelihood(d, np.zeros(3))


def test_orthant_constant():
    assert orthant_constant(2) == pytest.approx(np.pi / 4, rel=1e-14)
    assert orthant_constant(1) == pytest.approx(0.5, rel=1e-14)


def test_flat_weight_blow_up_reports_row(separated_pair):
    components = FlatComponents(build_signed_design(separated_pair))
    H = np.array([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]])
    with pytest.raises(WeightBlowUpError) as excinfo:
        components.log_v(H)
    assert excinfo.value.row == 1


def test_flat_components_posterior_scale(rng):
    sd = build_signed_design(random_dataset(rng, 9, 3))
    components = FlatComponents(sd)
    assert_allclose(components.posterior_scale(), sd.inverse_gram(), rtol=1e-12)
    Z = rng.standard_normal((4, 3))
    assert_allclose(components.noise(Z), Z @ sd.inv_gram_factor.T, rtol=1e-10)
