"""
Direct Monte Carlo sampler for the probit posterior

1. h uniform on the positive orthant of the unit sphere, with coupled chi2_n t
2. importance weights v(h)^n (flat: v = 1/||Psi h||, Gaussian: v = q(h)^{-1/2})
3. SIR resampling of the proposals
4. beta = s^{1/2} P^{-1} X_y' u + A z with s^{1/2} = v(u) sqrt(chi2_n)
"""
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from orthant_mc.config import settings
from orthant_mc.core.design import SignedDesign, build_signed_design
from orthant_mc.core.gaussian_prior import PriorKind, PriorSpec, components_for
from orthant_mc.core.propriety import check_propriety
from orthant_mc.core.streams import Stream, chunk_sizes, map_chunks, stream_rng
from orthant_mc.models.dataset import Dataset
from orthant_mc.models.report import SamplerDiagnostics
from orthant_mc.utils.arrays import readonly
from orthant_mc.utils.exceptions import (
    DataValidationError,
    DegenerateWeightsError,
    DimensionMismatchError,
    ProprietyError,
    WeightBlowUpError,
)
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)


class SMode(str, Enum):
    """How the chi2_n factor of s is obtained for a resampled particle"""
    FRESH = "fresh"
    REUSE = "reuse"


class ResampleScheme(str, Enum):
    """SIR selection schemes"""
    MULTINOMIAL = "multinomial"
    SYSTEMATIC = "systematic"


class HemisphereBatch(BaseModel):
    """Proposals h on the orthant sphere, coupled chi2 values and (optionally) weights"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    H: np.ndarray
    t: np.ndarray
    seed: int
    log_v: Optional[np.ndarray] = None
    log_weights: Optional[np.ndarray] = None
    prior_tag: Optional[str] = None

    @property
    def N(self) -> int:
        return int(self.H.shape[0])

    @property
    def n(self) -> int:
        return int(self.H.shape[1])

    @property
    def v(self) -> np.ndarray:
        self._require_weights()
        return np.exp(self.log_v)

    @property
    def weighted(self) -> bool:
        return self.log_weights is not None

    def _require_weights(self) -> None:
        if not self.weighted:
            raise DataValidationError("hemisphere batch has no weights attached")


class SirSelection(BaseModel):
    """Resampled proposals: u[k] = H[indices[k]], w[k] = v[indices[k]]"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    indices: np.ndarray
    u: np.ndarray
    w: np.ndarray

    @property
    def M(self) -> int:
        return int(self.indices.shape[0])


class PosteriorDraws(BaseModel):
    """M x p matrix of posterior draws of beta"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    B: np.ndarray
    prior_tag: str
    seed: int
    diagnostics: Optional[SamplerDiagnostics] = None

    @property
    def M(self) -> int:
        return int(self.B.shape[0])

    def mean(self) -> np.ndarray:
        return self.B.mean(axis=0)

    def cov(self) -> np.ndarray:
        return np.atleast_2d(np.cov(self.B, rowvar=False))

    def _inflation(self) -> float:
        """1/M + 1/ESS: resampling noise plus proposal noise"""
        inflation = 1.0 / self.M
        if self.diagnostics is not None and self.diagnostics.ess > 0:
            inflation += 1.0 / self.diagnostics.ess
        return inflation

    def standard_errors(self) -> np.ndarray:
        """Monte Carlo standard errors of the draw mean"""
        return np.sqrt(np.diag(self.cov()) * self._inflation())

    def covariance_standard_errors(self) -> np.ndarray:
        """Gaussian-theory standard errors of the draw covariance"""
        cov = self.cov()
        var = np.diag(cov)
        return np.sqrt((np.outer(var, var) + cov**2) * self._inflation())


class SamplerOptions(BaseModel):
    """Knobs for sample_posterior"""
    s_mode: SMode = SMode.FRESH
    resample: ResampleScheme = ResampleScheme.MULTINOMIAL
    chunk_size: Optional[int] = Field(default=None, ge=1)
    threads: Optional[int] = Field(default=None, ge=1)


def _hemisphere_chunk(n: int, size: int, seed: int, stream: Stream, chunk: int) -> tuple[np.ndarray, np.ndarray]:
    rng = stream_rng(seed, stream, chunk)
    Z = rng.standard_normal((size, n))
    t = np.einsum("ij,ij->i", Z, Z)
    H = np.abs(Z) / np.sqrt(t)[:, None]
    return H, t


def sample_hemisphere(
    n: int,
    N: int,
    seed: int,
    chunk_size: Optional[int] = None,
    threads: Optional[int] = None,
    stream: Stream = Stream.HEMISPHERE,
) -> HemisphereBatch:
    """N uniform draws on the orthant sphere S_+^n with independent chi2_n radii"""
    if n < 1 or N < 1:
        raise DataValidationError(f"need n >= 1 and N >= 1, got n={n}, N={N}")

    sizes = chunk_sizes(N, chunk_size)
    parts = map_chunks(_hemisphere_chunk, [(n, size, seed, stream, i) for i, size in enumerate(sizes)], threads)
    H = np.concatenate([part[0] for part in parts])
    t = np.concatenate([part[1] for part in parts])

    logger.debug(f"Sampled {N} hemisphere proposals in {len(sizes)} chunks (n={n})")
    return HemisphereBatch(H=readonly(H), t=readonly(t), seed=int(seed))


def attach_weights(
    batch: HemisphereBatch,
    sd: SignedDesign,
    prior: Optional[PriorSpec] = None,
    chunk_size: Optional[int] = None,
    threads: Optional[int] = None,
) -> HemisphereBatch:
    """Compute log v and log weights n log v for every proposal"""
    if batch.n != sd.n:
        raise DimensionMismatchError(f"batch dimension {batch.n} does not match n={sd.n}")

    components = components_for(sd, prior)
    sizes = chunk_sizes(batch.N, chunk_size)
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    def weigh(start: int, stop: int) -> np.ndarray:
        try:
            return components.log_v(batch.H[start:stop])
        except WeightBlowUpError as e:
            raise WeightBlowUpError(start + e.row, e.norm) from e

    tasks = [(int(offsets[i]), int(offsets[i + 1])) for i in range(len(sizes))]
    log_v = np.concatenate(map_chunks(weigh, tasks, threads))

    return batch.model_copy(update={
        "log_v": readonly(log_v),
        "log_weights": readonly(sd.n * log_v),
        "prior_tag": components.prior_tag,
    })


def normalized_weights(log_weights: np.ndarray) -> np.ndarray:
    """Self-normalized weights computed in log space (max subtracted first)"""
    log_weights = np.asarray(log_weights, dtype=np.float64)
    if log_weights.size == 0 or np.any(np.isnan(log_weights)) or np.any(log_weights == np.inf):
        raise DegenerateWeightsError("importance weights are empty or not finite")
    shift = log_weights.max()
    if shift == -np.inf:
        raise DegenerateWeightsError("all importance weights are zero")
    w = np.exp(log_weights - shift)
    return w / w.sum()


def ess(log_weights: np.ndarray) -> float:
    """Effective sample size (sum w)^2 / sum w^2 from log weights"""
    w = normalized_weights(log_weights)
    return float(1.0 / np.sum(w * w))


def diagnostics_for(batch: HemisphereBatch, draws: int, s_mode: SMode, scheme: ResampleScheme) -> SamplerDiagnostics:
    batch._require_weights()
    w = normalized_weights(batch.log_weights)
    return SamplerDiagnostics(
        ess=float(1.0 / np.sum(w * w)),
        max_normalized_weight=float(w.max()),
        proposals=batch.N,
        draws=draws,
        s_mode=SMode(s_mode).value,
        resample=ResampleScheme(scheme).value,
    )


def sir_resample(batch: HemisphereBatch, M: int, seed: int, scheme: ResampleScheme = ResampleScheme.MULTINOMIAL) -> SirSelection:
    """Draw M indices with replacement with probabilities proportional to the weights"""
    batch._require_weights()
    if M < 1:
        raise DataValidationError(f"need M >= 1, got {M}")

    w = normalized_weights(batch.log_weights)
    effective = 1.0 / np.sum(w * w)
    if effective < settings.MIN_ESS:
        logger.warning(f"Effective sample size {effective:.1f} is below {settings.MIN_ESS}")

    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    rng = stream_rng(seed, Stream.RESAMPLE)
    if ResampleScheme(scheme) is ResampleScheme.SYSTEMATIC:
        points = (rng.random() + np.arange(M)) / M
    else:
        points = rng.random(M)
    indices = np.minimum(np.searchsorted(cdf, points, side="right"), batch.N - 1)

    return SirSelection(
        indices=readonly(indices),
        u=readonly(batch.H[indices]),
        w=readonly(np.exp(batch.log_v[indices])),
    )


def draw_scale(sel: SirSelection, batch: HemisphereBatch, s_mode: SMode, rng: np.random.Generator) -> np.ndarray:
    """s^{1/2} = v(u) sqrt(chi2_n); reuse takes the chi2 value coupled to the proposal"""
    if SMode(s_mode) is SMode.REUSE:
        chi2 = batch.t[sel.indices]
    else:
        chi2 = rng.chisquare(batch.n, size=sel.M)
    return sel.w * np.sqrt(chi2)


def draw_beta(
    sel: SirSelection,
    batch: HemisphereBatch,
    sd: SignedDesign,
    prior: Optional[PriorSpec],
    M: int,
    seed: int,
    s_mode: SMode = SMode.FRESH,
    scheme: ResampleScheme = ResampleScheme.MULTINOMIAL,
) -> PosteriorDraws:
    """Conditional Gaussian draws of beta given the resampled (s, u)"""
    if M != sel.M:
        raise DimensionMismatchError(f"selection holds {sel.M} particles, asked for {M}")
    components = components_for(sd, prior)
    if batch.prior_tag != components.prior_tag:
        raise DataValidationError(
            f"batch weights were attached for prior {batch.prior_tag!r}, not {components.prior_tag!r}"
        )

    s_half = draw_scale(sel, batch, s_mode, stream_rng(seed, Stream.SCALE))
    Z = stream_rng(seed, Stream.GAUSSIAN).standard_normal((M, sd.p))
    B = s_half[:, None] * components.coefficient_map(sel.u) + components.noise(Z)

    return PosteriorDraws(
        B=readonly(B),
        prior_tag=components.prior_tag,
        seed=int(seed),
        diagnostics=diagnostics_for(batch, M, s_mode, scheme),
    )


def sample_posterior(
    d: Dataset,
    prior: Optional[PriorSpec] = None,
    N: Optional[int] = None,
    M: Optional[int] = None,
    seed: int = 0,
    options: Optional[SamplerOptions] = None,
) -> PosteriorDraws:
    """Full pipeline; the flat prior is gated on propriety"""
    options = options or SamplerOptions()
    N = N or settings.DEFAULT_PROPOSALS
    M = M or settings.DEFAULT_DRAWS

    sd = build_signed_design(d)
    if prior is None or prior.kind is PriorKind.FLAT:
        report = check_propriety(sd)
        if not report.is_proper:
            raise ProprietyError(report)

    logger.info(f"Sampling posterior: n={sd.n}, p={sd.p}, N={N}, M={M}, seed={seed}")
    batch = sample_hemisphere(sd.n, N, seed, options.chunk_size, options.threads)
    batch = attach_weights(batch, sd, prior, options.chunk_size, options.threads)
    sel = sir_resample(batch, M, seed, options.resample)
    draws = draw_beta(sel, batch, sd, prior, M, seed, options.s_mode, options.resample)

    logger.info(
        f"Drew {M} posterior samples, ESS={draws.diagnostics.ess:.1f}, "
        f"max weight={draws.diagnostics.max_normalized_weight:.3e}"
    )
    return draws
