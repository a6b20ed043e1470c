"""
Subcommand runners: dataset + RunConfig in, report models out
"""
import time
from contextlib import contextmanager
from typing import Optional

import numpy as np

from orthant_mc.core.design import build_signed_design
from orthant_mc.core.gaussian_prior import PriorKind
from orthant_mc.core.gibbs import run_gibbs
from orthant_mc.core.moments import closed_form_moments, log_marginal_likelihood
from orthant_mc.core.oracle import quadrature_moments
from orthant_mc.core.polar import joint_probability_polar
from orthant_mc.core.propriety import check_propriety, separation_margin
from orthant_mc.core.sampler import attach_weights, draw_beta, normalized_weights, sample_hemisphere, sir_resample
from orthant_mc.data.data_loader import simulate
from orthant_mc.models.dataset import Dataset
from orthant_mc.models.report import (
    CheckReport,
    FitReport,
    JointProbabilityReport,
    ProprietyVerdict,
    QuadratureResult,
    SimulateReport,
)
from orthant_mc.models.run_config import RunConfig
from orthant_mc.utils.exceptions import DataValidationError, ProprietyError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)


@contextmanager
def _timed(timings: dict[str, float], name: str):
    start = time.perf_counter()
    yield
    timings[name] = round(1000.0 * (time.perf_counter() - start), 3)


def run_check(d: Dataset) -> CheckReport:
    sd = build_signed_design(d)
    report = check_propriety(sd)
    margin = separation_margin(sd) if report.is_proper else None
    return CheckReport(n=d.n, p=d.p, verdict=report.verdict, certificate=report.certificate, margin=margin)


def _gated_design(d: Dataset, cfg: RunConfig):
    """Signed design, prior and (flat prior only) the propriety verdict"""
    sd = build_signed_design(d)
    prior = cfg.prior_spec(d.p)
    verdict: Optional[ProprietyVerdict] = None
    if prior.kind is PriorKind.FLAT:
        report = check_propriety(sd)
        if not report.is_proper:
            raise ProprietyError(report)
        verdict = report.verdict
    return sd, prior, verdict


def _weighted_batch(sd, prior, cfg: RunConfig, timings: dict[str, float]):
    with _timed(timings, "hemisphere"):
        batch = sample_hemisphere(sd.n, cfg.N, cfg.seed, threads=cfg.threads)
    with _timed(timings, "weights"):
        batch = attach_weights(batch, sd, prior, threads=cfg.threads)
    return batch


def run_fit(d: Dataset, cfg: RunConfig) -> tuple[FitReport, np.ndarray]:
    """Direct sampler draws summarised by their mean and covariance"""
    timings: dict[str, float] = {}
    sd, prior, verdict = _gated_design(d, cfg)
    batch = _weighted_batch(sd, prior, cfg, timings)
    with _timed(timings, "resample"):
        sel = sir_resample(batch, cfg.M, cfg.seed, cfg.resample)
    with _timed(timings, "draws"):
        draws = draw_beta(sel, batch, sd, prior, cfg.M, cfg.seed, cfg.s_mode, cfg.resample)
    log_ml, rel_se = log_marginal_likelihood(sd, batch, prior)

    diag = draws.diagnostics
    report = FitReport(
        command="fit",
        n=d.n,
        p=d.p,
        prior=prior.tag,
        verdict=verdict,
        mean=draws.mean().tolist(),
        cov=draws.cov().tolist(),
        mc_se_mean=draws.standard_errors().tolist(),
        mc_se_cov=draws.covariance_standard_errors().tolist(),
        ess=diag.ess,
        max_normalized_weight=diag.max_normalized_weight,
        log_marginal_likelihood=log_ml,
        log_marginal_likelihood_rel_se=rel_se,
        seed=cfg.seed,
        timings_ms=timings,
        config=cfg.echo(),
    )
    return report, np.asarray(draws.B)


def run_moments(d: Dataset, cfg: RunConfig) -> FitReport:
    """Closed-form ratio estimators on one hemisphere batch"""
    timings: dict[str, float] = {}
    sd, prior, verdict = _gated_design(d, cfg)
    batch = _weighted_batch(sd, prior, cfg, timings)
    with _timed(timings, "moments"):
        est = closed_form_moments(sd, batch, prior)
    log_ml, rel_se = log_marginal_likelihood(sd, batch, prior)

    return FitReport(
        command="moments",
        n=d.n,
        p=d.p,
        prior=prior.tag,
        verdict=verdict,
        mean=est.mean.tolist(),
        cov=est.cov.tolist(),
        mc_se_mean=est.mc_se_mean.tolist(),
        mc_se_cov=est.mc_se_cov.tolist(),
        ess=est.ess,
        max_normalized_weight=float(normalized_weights(batch.log_weights).max()),
        log_marginal_likelihood=log_ml,
        log_marginal_likelihood_rel_se=rel_se,
        insufficient_n=est.insufficient_n,
        seed=cfg.seed,
        timings_ms=timings,
        config=cfg.echo(),
    )


def run_gibbs_report(d: Dataset, cfg: RunConfig) -> tuple[FitReport, np.ndarray]:
    if cfg.prior is not PriorKind.FLAT:
        raise DataValidationError("the Gibbs baseline supports the flat prior only")
    timings: dict[str, float] = {}
    with _timed(timings, "chain"):
        chain = run_gibbs(d, cfg.iters, cfg.burnin, seed=cfg.seed)
    report = FitReport(
        command="gibbs",
        n=d.n,
        p=d.p,
        prior=PriorKind.FLAT.value,
        verdict=ProprietyVerdict.PROPER,
        mean=chain.mean().tolist(),
        cov=chain.cov().tolist(),
        mc_se_mean=chain.batch_means_se().tolist(),
        mc_se_cov=chain.covariance_batch_se().tolist(),
        seed=cfg.seed,
        timings_ms=timings,
        config=cfg.echo(),
    )
    return report, np.asarray(chain.draws)


def run_simulate(cfg: RunConfig) -> SimulateReport:
    if cfg.n is None or cfg.p is None or cfg.beta is None:
        raise DataValidationError("simulate needs n, p and beta")
    d = simulate(cfg.n, cfg.p, cfg.beta, cfg.seed, cfg.out)
    return SimulateReport(n=d.n, p=d.p, ones=int(d.y.sum()), seed=cfg.seed, out=cfg.out)


def run_jointprob(d: Dataset, cfg: RunConfig) -> JointProbabilityReport:
    if cfg.beta is None:
        raise DataValidationError("jointprob needs beta")
    return joint_probability_polar(d, cfg.beta, cfg.N, cfg.seed)


def run_oracle(d: Dataset, cfg: RunConfig) -> QuadratureResult:
    return quadrature_moments(d, cfg.prior_spec(d.p))
