"""
Polar form of the joint probability Pr(Y = y | beta)

With mu = X_y beta and w ~ N(mu, I_n), Pr(Y = y | beta) = Pr(w > 0). Writing
w = r h with h on the positive orthant of the unit sphere gives

    Pr(Y = y | beta) = c1(n) / (2 pi)^{n/2} * E_h[m(h)],
    m(h) = 2 exp(-(||mu||^2 - a^2) / 2) int_0^inf r^{n-1} exp(-(r - a)^2 / 2) dr,  a = h'mu,

with h uniform on the orthant. Only used as a cross-check of log_likelihood.
"""
import numpy as np
from scipy.integrate import quad
from scipy.special import xlogy

from orthant_mc.core.design import log_likelihood, orthant_constant
from orthant_mc.core.sampler import sample_hemisphere
from orthant_mc.core.streams import Stream
from orthant_mc.models.dataset import Dataset
from orthant_mc.models.report import JointProbabilityReport
from orthant_mc.utils.exceptions import DimensionMismatchError, InsufficientSampleError, QuadratureError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

MIN_POLAR_PROPOSALS = 1000

# ln(1e14): radial integrand cut-off below its peak
TAIL_NATS = 32.24


def _radial_log_integrand(r, n: int, a: float):
    return xlogy(n - 1, r) - 0.5 * (r - a) ** 2


def log_m_integral(n: int, a: float, mu_norm2: float) -> float:
    """log m for one direction with projection a = h'mu and ||mu||^2 = mu_norm2"""
    peak_r = 0.5 * (a + np.sqrt(a * a + 4.0 * (n - 1)))
    peak = _radial_log_integrand(peak_r, n, a)

    step = 8.0
    r_max = peak_r + step
    while _radial_log_integrand(r_max, n, a) > peak - TAIL_NATS:
        step *= 2.0
        r_max = peak_r + step

    points = [peak_r] if 0.0 < peak_r < r_max else None
    value, abserr, info, *message = quad(
        lambda r: np.exp(_radial_log_integrand(r, n, a) - peak),
        0.0,
        r_max,
        points=points,
        epsabs=0.0,
        epsrel=1e-10,
        limit=200,
        full_output=1,
    )
    if message or not np.isfinite(value) or value <= 0.0:
        raise QuadratureError(
            f"radial integral did not converge (n={n}, a={a:.4g}): {message[0] if message else value}"
        )
    return float(np.log(2.0) - 0.5 * (mu_norm2 - a * a) + peak + np.log(value))


def joint_probability_polar(d: Dataset, beta, N: int, seed: int) -> JointProbabilityReport:
    """Monte Carlo estimate of Pr(Y = y | beta) through the polar identity"""
    if N < MIN_POLAR_PROPOSALS:
        raise InsufficientSampleError("N", N, MIN_POLAR_PROPOSALS, "polar cross-check needs more directions")
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (d.p,):
        raise DimensionMismatchError(f"beta must have length {d.p}, got shape {beta.shape}")

    n = d.n
    mu = d.signs * (d.X @ beta)
    mu_norm2 = float(mu @ mu)
    batch = sample_hemisphere(n, N, seed, stream=Stream.POLAR)

    log_m = np.array([log_m_integral(n, float(a), mu_norm2) for a in batch.H @ mu])
    log_scale = np.log(orthant_constant(n)) - 0.5 * n * np.log(2.0 * np.pi)

    shift = log_m.max()
    values = np.exp(log_m - shift)
    factor = np.exp(shift + log_scale)
    estimate = factor * values.mean()
    standard_error = factor * values.std(ddof=1) / np.sqrt(N)

    direct = float(np.exp(log_likelihood(d, beta)))
    logger.info(f"Polar estimate {estimate:.6g} (se {standard_error:.2g}) vs direct {direct:.6g}")
    return JointProbabilityReport(
        estimate=float(estimate),
        standard_error=float(standard_error),
        direct=direct,
        proposals=N,
        seed=int(seed),
    )
