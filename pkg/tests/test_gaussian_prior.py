"""
Gaussian N(0, Q) prior: quadratic form, sampler hooks and moments
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from orthant_mc.core.design import build_signed_design
from orthant_mc.core.gaussian_prior import (
    GaussianPriorComponents,
    PriorKind,
    PriorSpec,
    gaussian_prior_components,
    quadratic_form,
)
from orthant_mc.core.moments import closed_form_moments, log_marginal_likelihood
from orthant_mc.core.oracle import quadrature_moments
from orthant_mc.core.sampler import attach_weights, sample_hemisphere, sample_posterior
from orthant_mc.models.dataset import Dataset
from orthant_mc.utils.exceptions import DataValidationError, DimensionMismatchError
from tests.conftest import Z_TOL, random_dataset


def _unit(rng, n, size=None):
    z = np.abs(rng.standard_normal((size or 1, n)))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z if size else z[0]


def test_quadratic_form_worked_example(separated_pair):
    sd = build_signed_design(separated_pair)
    h = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert quadratic_form(PriorSpec.gaussian([[1.0]]), sd, h) == pytest.approx(1 / 3, rel=1e-12)


def test_quadratic_form_flat_limit(rng):
    sd = build_signed_design(random_dataset(rng, 6, 2))
    ps = PriorSpec.isotropic(1e8, 2)
    for h in _unit(rng, 6, size=20):
        assert quadratic_form(ps, sd, h) == pytest.approx(sd.projector().norms(h) ** 2, abs=1e-6)


def test_quadratic_form_tight_prior_limit(rng):
    sd = build_signed_design(random_dataset(rng, 6, 2))
    ps = PriorSpec.isotropic(1e-9, 2)
    for h in _unit(rng, 6, size=20):
        assert quadratic_form(ps, sd, h) == pytest.approx(1.0, abs=1e-6)


def test_quadratic_form_in_unit_interval(rng):
    d = random_dataset(rng, 7, 3)
    sd = build_signed_design(d)
    B = rng.standard_normal((3, 3))
    components = gaussian_prior_components(PriorSpec.gaussian(B @ B.T + 0.1 * np.eye(3)), sd)
    q = components.form.evaluate(_unit(rng, 7, size=100_000))
    assert q.min() > 0
    assert q.max() <= 1 + 1e-12


def test_quadratic_form_needs_unit_vector(separated_pair):
    sd = build_signed_design(separated_pair)
    with pytest.raises(DataValidationError):
        quadratic_form(PriorSpec.gaussian([[1.0]]), sd, [1.0, 1.0])


def test_prior_spec_validation():
    with pytest.raises(DataValidationError):
        PriorSpec.gaussian([[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(DataValidationError):
        PriorSpec.gaussian([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(DataValidationError):
        PriorSpec(kind=PriorKind.GAUSSIAN)
    with pytest.raises(DataValidationError):
        PriorSpec.isotropic(-1.0, 2)
    assert PriorSpec.flat().Q is None


def test_prior_dimension_must_match(d1):
    with pytest.raises(DimensionMismatchError):
        GaussianPriorComponents(build_signed_design(d1), PriorSpec.isotropic(1.0, 3))


def test_improper_flat_data_runs_under_gaussian_prior(separated_pair):
    draws = sample_posterior(separated_pair, PriorSpec.isotropic(1.0, 1), N=20_000, M=2000, seed=5)
    assert np.all(np.isfinite(draws.B))
    assert draws.prior_tag == "gaussian"
    assert draws.mean()[0] > 0


def test_ridge_scale_and_noise(d1, rng):
    sd = build_signed_design(d1)
    ps = PriorSpec.gaussian([[2.0, 0.3], [0.3, 0.5]])
    components = gaussian_prior_components(ps, sd)
    expected = np.linalg.inv(d1.X.T @ d1.X + np.linalg.inv(ps.Q))
    assert_allclose(components.posterior_scale(), expected, rtol=1e-10)
    A = components.noise(np.eye(2)).T
    assert_allclose(A @ A.T, expected, rtol=1e-10)


@pytest.mark.slow
def test_unit_prior_matches_quadrature_oracle(d1):
    prior = PriorSpec.isotropic(1.0, d1.p)
    sd = build_signed_design(d1)
    batch = attach_weights(sample_hemisphere(sd.n, 200_000, seed=31), sd, prior)
    est = closed_form_moments(sd, batch, prior)
    exact = quadrature_moments(d1, prior)

    assert np.all(np.abs(est.mean - exact.mean) <= Z_TOL * est.mc_se_mean)
    assert np.all(np.abs(est.cov - np.asarray(exact.cov)) <= Z_TOL * est.mc_se_cov + 1e-9)

    log_ml, rel_se = log_marginal_likelihood(sd, batch, prior)
    assert abs(log_ml - exact.log_normalizer) <= Z_TOL * rel_se + 1e-6


@pytest.mark.slow
def test_vague_prior_matches_flat(d1):
    sd = build_signed_design(d1)
    batch = sample_hemisphere(sd.n, 200_000, seed=32)
    flat = closed_form_moments(sd, attach_weights(batch, sd))
    prior = PriorSpec.isotropic(1e6, d1.p)
    vague = closed_form_moments(sd, attach_weights(batch, sd, prior), prior)
    se = np.sqrt(flat.mc_se_mean**2 + vague.mc_se_mean**2)
    assert np.all(np.abs(flat.mean - vague.mean) <= Z_TOL * se)


@pytest.mark.slow
def test_shrinkage_is_monotone(d1):
    sd = build_signed_design(d1)
    batch = sample_hemisphere(sd.n, 100_000, seed=33)
    norms, errors = [], []
    for c in (0.1, 1.0, 10.0, 100.0):
        prior = PriorSpec.isotropic(c, d1.p)
        est = closed_form_moments(sd, attach_weights(batch, sd, prior), prior)
        norms.append(np.linalg.norm(est.mean))
        errors.append(np.linalg.norm(est.mc_se_mean))
    for i in range(3):
        assert norms[i + 1] >= norms[i] - Z_TOL * (errors[i] + errors[i + 1])


def test_small_gaussian_dataset_mean_positive():
    d = Dataset.from_arrays([1, 1, 0], [[1.0], [2.0], [-1.0]])
    draws = sample_posterior(d, PriorSpec.isotropic(4.0, 1), N=20_000, M=2000, seed=8)
    assert draws.mean()[0] > 0
