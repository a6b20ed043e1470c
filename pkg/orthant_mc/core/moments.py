"""
Closed-form posterior moments as self-normalized ratios over one hemisphere batch

With K = P^{-1} X_y', weights w_i = v_i^n and c = gamma_ratio(n):

    E[beta | y]   ~ c K sum(w h v) / sum(w)
    Var[beta | y] ~ P^{-1} + n K [sum(w h h' v^2) / sum(w)] K' - mean mean'

Standard errors use the delta method for a ratio R = sum(w a) / sum(w):
    Var(R) ~ sum(w_i^2 (a_i - R)^2) / (sum w)^2
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import gammaln, logsumexp

from orthant_mc.core.design import HierarchyComponents, SignedDesign
from orthant_mc.core.gaussian_prior import PriorKind, PriorSpec, components_for
from orthant_mc.core.propriety import check_propriety
from orthant_mc.core.sampler import HemisphereBatch, normalized_weights
from orthant_mc.utils.exceptions import DataValidationError, DimensionMismatchError, ProprietyError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

# switch to the asymptotic series for Gamma(x + 1/2) / Gamma(x) at x = n / 2
GAMMA_SERIES_FROM = 100.0

PSD_TOLERANCE = 1e-8


class MomentEstimate(BaseModel):
    """Closed-form posterior mean and covariance with Monte Carlo standard errors"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: np.ndarray
    cov: np.ndarray
    mc_se_mean: np.ndarray
    mc_se_cov: np.ndarray
    N_used: int
    ess: float
    insufficient_n: bool = False


def gamma_ratio(n: int) -> float:
    """sqrt(2) Gamma((n+1)/2) / Gamma(n/2) = E[sqrt(chi2_n)]"""
    if n < 1:
        raise DataValidationError(f"gamma_ratio needs n >= 1, got {n}")
    x = 0.5 * n
    if x < GAMMA_SERIES_FROM:
        return float(np.sqrt(2.0) * np.exp(gammaln(x + 0.5) - gammaln(x)))
    log_ratio = 0.5 * np.log(x) - 1.0 / (8.0 * x) + 1.0 / (192.0 * x**3)
    return float(np.exp(0.5 * np.log(2.0) + log_ratio))


def _require_ready(sd: SignedDesign, batch: HemisphereBatch, prior: Optional[PriorSpec]) -> HierarchyComponents:
    if not batch.weighted:
        raise DataValidationError("hemisphere batch has no weights attached")
    if batch.n != sd.n:
        raise DimensionMismatchError(f"batch dimension {batch.n} does not match n={sd.n}")
    if prior is None or prior.kind is PriorKind.FLAT:
        report = check_propriety(sd)
        if not report.is_proper:
            raise ProprietyError(report)
    components = components_for(sd, prior)
    if batch.prior_tag != components.prior_tag:
        raise DataValidationError(
            f"batch weights were attached for prior {batch.prior_tag!r}, not {components.prior_tag!r}"
        )
    return components


def _ratio_terms(components: HierarchyComponents, batch: HemisphereBatch):
    w = normalized_weights(batch.log_weights)
    v = np.exp(batch.log_v)
    C = components.coefficient_map(batch.H)
    return w, v, C


def _mean_from_terms(n: int, w, v, C):
    a = gamma_ratio(n) * v[:, None] * C
    mean = w @ a
    se = np.sqrt((w**2) @ ((a - mean) ** 2))
    return mean, se, a


def posterior_mean(sd: SignedDesign, batch: HemisphereBatch, prior: Optional[PriorSpec] = None):
    """Posterior mean and its delta-method standard error"""
    components = _require_ready(sd, batch, prior)
    mean, se, _ = _mean_from_terms(sd.n, *_ratio_terms(components, batch))
    return mean, se


def _covariance_from_terms(n: int, components: HierarchyComponents, w, v, C, a, mean):
    b2 = n * (v**2)[:, None, None] * C[:, :, None] * C[:, None, :]
    second = np.einsum("i,ijk->jk", w, b2)
    cov = components.posterior_scale() + second - np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T)

    centered = a - mean
    influence = (b2 - second) - (centered[:, :, None] * mean[None, None, :] + mean[None, :, None] * centered[:, None, :])
    se = np.sqrt(np.einsum("i,ijk->jk", w**2, influence**2))
    return cov, se


def posterior_covariance(sd: SignedDesign, batch: HemisphereBatch, mean=None, prior: Optional[PriorSpec] = None) -> np.ndarray:
    """Posterior covariance; mean defaults to the estimate from the same batch"""
    components = _require_ready(sd, batch, prior)
    w, v, C = _ratio_terms(components, batch)
    batch_mean, _, a = _mean_from_terms(sd.n, w, v, C)
    mean = batch_mean if mean is None else np.asarray(mean, dtype=np.float64)
    if mean.shape != (sd.p,):
        raise DimensionMismatchError(f"mean must have length {sd.p}, got shape {mean.shape}")
    cov, _ = _covariance_from_terms(sd.n, components, w, v, C, a, mean)
    return cov


def is_psd(cov: np.ndarray) -> bool:
    return bool(np.linalg.eigvalsh(cov).min() >= -PSD_TOLERANCE * max(np.trace(cov), 0.0))


def closed_form_moments(sd: SignedDesign, batch: HemisphereBatch, prior: Optional[PriorSpec] = None) -> MomentEstimate:
    """Mean and covariance from one batch, flagged when the covariance is not PSD"""
    components = _require_ready(sd, batch, prior)
    w, v, C = _ratio_terms(components, batch)
    mean, mean_se, a = _mean_from_terms(sd.n, w, v, C)
    cov, cov_se = _covariance_from_terms(sd.n, components, w, v, C, a, mean)

    insufficient = not is_psd(cov)
    if insufficient:
        logger.warning(f"Covariance estimate is not PSD with N={batch.N}; increase the proposal count")

    return MomentEstimate(
        mean=mean,
        cov=cov,
        mc_se_mean=mean_se,
        mc_se_cov=cov_se,
        N_used=batch.N,
        ess=float(1.0 / np.sum(w * w)),
        insufficient_n=insufficient,
    )


def log_marginal_likelihood(sd: SignedDesign, batch: HemisphereBatch, prior: Optional[PriorSpec] = None) -> tuple[float, float]:
    """
    log of the integral of the likelihood against the prior, with its relative SE

    flat:      2^{-n} (2 pi)^{p/2} |X'X|^{-1/2} E_h[v^n]
    Gaussian:  2^{-n} |Q|^{-1/2} |X'X + Q^{-1}|^{-1/2} E_h[v^n]
    """
    components = _require_ready(sd, batch, prior)
    lw = np.asarray(batch.log_weights)
    log_mean = float(logsumexp(lw) - np.log(batch.N))
    scaled = np.exp(lw - lw.max())
    rel_se = float(scaled.std(ddof=1) / (scaled.mean() * np.sqrt(batch.N))) if batch.N > 1 else float("inf")
    return components.log_evidence_constant + log_mean, rel_se
