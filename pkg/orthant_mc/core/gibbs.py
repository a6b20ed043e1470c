"""
Data-augmentation Gibbs sampler for the flat-prior probit posterior

    z_i | beta, y ~ N(x_i' beta, 1) truncated to z_i > 0 (y_i = 1) or z_i < 0 (y_i = 0)
    beta | z      ~ N((X'X)^{-1} X'z, (X'X)^{-1})

With w_i = (2y_i - 1) z_i every latent draw is a positive-side draw with mean (X_y beta)_i.
Used as an independent baseline for the direct sampler.
"""
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import ndtr, ndtri

from orthant_mc.config import settings
from orthant_mc.core.design import SignedDesign, build_signed_design
from orthant_mc.core.propriety import check_propriety
from orthant_mc.core.streams import Stream, stream_rng
from orthant_mc.models.dataset import Dataset
from orthant_mc.utils.arrays import readonly
from orthant_mc.utils.exceptions import DataValidationError, DimensionMismatchError, ProprietyError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

# below this truncation-region probability the inverse CDF loses precision
TAIL_PROBABILITY = 1e-6


class Side(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class GibbsChain(BaseModel):
    """Post-burnin draws of beta"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    draws: np.ndarray
    init: np.ndarray
    iters: int
    burnin: int
    seed: int

    def mean(self) -> np.ndarray:
        return self.draws.mean(axis=0)

    def cov(self) -> np.ndarray:
        return np.atleast_2d(np.cov(self.draws, rowvar=False))

    def _batch_layout(self, batches: Optional[int]) -> tuple[int, int]:
        kept = self.draws.shape[0]
        batches = batches or max(2, int(np.sqrt(kept)))
        size = kept // batches
        if size < 1:
            raise DataValidationError(f"chain of length {kept} is too short for {batches} batches")
        return batches, size

    def batch_means_se(self, batches: Optional[int] = None) -> np.ndarray:
        """Standard error of the chain mean from non-overlapping batch means"""
        batches, size = self._batch_layout(batches)
        means = self.draws[: size * batches].reshape(batches, size, -1).mean(axis=1)
        return means.std(axis=0, ddof=1) / np.sqrt(batches)

    def covariance_batch_se(self, batches: Optional[int] = None) -> np.ndarray:
        """Batch-means standard error of each covariance entry, via centred outer products"""
        batches, size = self._batch_layout(batches)
        centered = self.draws[: size * batches] - self.mean()
        products = centered[:, :, None] * centered[:, None, :]
        means = products.reshape(batches, size, *products.shape[1:]).mean(axis=1)
        return means.std(axis=0, ddof=1) / np.sqrt(batches)


def _robert_tail(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Standard normal restricted to z > a (a large) by exponential rejection"""
    alpha = 0.5 * (a + np.sqrt(a * a + 4.0))
    out = np.empty_like(a)
    pending = np.arange(a.size)
    while pending.size:
        z = a[pending] + rng.exponential(1.0 / alpha[pending])
        accept = rng.random(pending.size) <= np.exp(-0.5 * (z - alpha[pending]) ** 2)
        out[pending[accept]] = z[accept]
        pending = pending[~accept]
    return out


def positive_truncated_normal(mu, rng: np.random.Generator) -> np.ndarray:
    """N(mu, 1) restricted to (0, inf), elementwise"""
    mu = np.atleast_1d(np.asarray(mu, dtype=np.float64))
    if not np.all(np.isfinite(mu)):
        raise DataValidationError("truncated normal mean must be finite")

    # standard normal beyond a = -mu; the region has probability Phi(mu)
    a = -mu
    region = ndtr(mu)
    out = np.empty_like(mu)

    body = region >= TAIL_PROBABILITY
    if body.any():
        u = rng.random(int(body.sum()))
        out[body] = -ndtri(u * region[body])
    tail = ~body
    if tail.any():
        out[tail] = _robert_tail(a[tail], rng)

    # z > a can round to z == a when a is huge
    return np.maximum(mu + out, np.nextafter(0.0, 1.0))


def sample_truncated_normal(mu: float, side: Side, rng: np.random.Generator) -> float:
    """One draw from N(mu, 1) restricted to one side of zero"""
    if Side(side) is Side.POSITIVE:
        return float(positive_truncated_normal(mu, rng)[0])
    return float(-positive_truncated_normal(-mu, rng)[0])


def sample_latent(beta, d: Dataset, rng: np.random.Generator) -> np.ndarray:
    """z_i ~ N(x_i' beta, 1) truncated to the side of zero given by y_i"""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (d.p,):
        raise DimensionMismatchError(f"beta must have length {d.p}, got shape {beta.shape}")
    signs = d.signs
    return signs * positive_truncated_normal(signs * (d.X @ beta), rng)


def gibbs_step(beta, d: Dataset, sd: SignedDesign, rng: np.random.Generator) -> np.ndarray:
    """One sweep: latent z given beta, then beta given z"""
    z = sample_latent(beta, d, rng)
    center = sd.solve_gram(d.X.T @ z)
    return center + sd.inv_gram_factor @ rng.standard_normal(sd.p)


def least_squares_start(d: Dataset, sd: SignedDesign) -> np.ndarray:
    """(X'X)^{-1} X'(2y - 1)"""
    return sd.solve_gram(d.X.T @ d.signs.astype(np.float64))


def run_gibbs(
    d: Dataset,
    iters: Optional[int] = None,
    burnin: Optional[int] = None,
    init=None,
    seed: int = 0,
) -> GibbsChain:
    """Run one chain; the flat-prior posterior must be proper"""
    iters = settings.GIBBS_ITERS if iters is None else int(iters)
    burnin = settings.GIBBS_BURNIN if burnin is None else int(burnin)
    if not iters > burnin >= 0:
        raise DataValidationError(f"need iters > burnin >= 0, got iters={iters}, burnin={burnin}")

    sd = build_signed_design(d)
    report = check_propriety(sd)
    if not report.is_proper:
        raise ProprietyError(report)

    beta = least_squares_start(d, sd) if init is None else np.asarray(init, dtype=np.float64)
    if beta.shape != (sd.p,):
        raise DimensionMismatchError(f"init must have length {sd.p}, got shape {beta.shape}")
    start = beta.copy()

    rng = stream_rng(seed, Stream.GIBBS)
    draws = np.empty((iters - burnin, sd.p))
    logger.info(f"Running Gibbs chain: iters={iters}, burnin={burnin}, seed={seed}")
    for it in range(iters):
        beta = gibbs_step(beta, d, sd, rng)
        if it >= burnin:
            draws[it - burnin] = beta

    if not np.all(np.isfinite(draws)):
        raise DataValidationError("Gibbs chain produced non-finite draws")

    return GibbsChain(draws=readonly(draws), init=readonly(start), iters=iters, burnin=burnin, seed=int(seed))
