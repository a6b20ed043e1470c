"""
Brute-force reference computations for low-dimensional problems

quadrature_moments integrates prior(beta) * prod Phi((2y_i - 1) x_i' beta) on a
tensor grid in Laplace coordinates beta = mode + L z, refining until the mean
settles. direction_scan_separation classifies separation by scanning directions.
"""
from itertools import combinations
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy.integrate import simpson
from scipy.linalg import LinAlgError, cholesky
from scipy.optimize import minimize

from orthant_mc.core.design import SignedDesign, build_signed_design, log_ndtr_stable
from orthant_mc.core.gaussian_prior import PriorKind, PriorSpec
from orthant_mc.core.propriety import check_propriety
from orthant_mc.core.streams import Stream, stream_rng
from orthant_mc.models.dataset import Dataset
from orthant_mc.models.report import ProprietyVerdict, QuadratureResult
from orthant_mc.utils.exceptions import DataValidationError, ProprietyError, QuadratureError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

# 1e-12 of the peak
BOUNDARY_NATS = 27.6
MEAN_TOLERANCE = 1e-7
INITIAL_POINTS = 65
MAX_POINTS = {1: 65537, 2: 1025}
MAX_HALF_WIDTH = 200.0
SCAN_TOLERANCE = 1e-9


class _LogPosterior:
    """Unnormalized log posterior with analytic gradient and Hessian"""

    def __init__(self, sd: SignedDesign, prior: Optional[PriorSpec]):
        self.sd = sd
        self.gaussian = prior is not None and prior.kind is PriorKind.GAUSSIAN
        if self.gaussian:
            if prior.Q.shape != (sd.p, sd.p):
                raise DataValidationError(f"Q must be {sd.p}x{sd.p}, got {prior.Q.shape}")
            self.Q_inv = prior.Q_inv
            self.log_prior_constant = -0.5 * sd.p * np.log(2.0 * np.pi) - 0.5 * prior.log_det_Q

    def __call__(self, B: np.ndarray) -> np.ndarray:
        """Rows of B are beta values"""
        B = np.atleast_2d(B)
        value = log_ndtr_stable(B @ self.sd.Xy.T).sum(axis=1)
        if self.gaussian:
            value += self.log_prior_constant - 0.5 * np.einsum("ij,jk,ik->i", B, self.Q_inv, B)
        return value

    def _mills(self, beta: np.ndarray):
        u = self.sd.Xy @ beta
        lam = np.exp(-0.5 * u * u - 0.5 * np.log(2.0 * np.pi) - log_ndtr_stable(u))
        return u, lam

    def gradient(self, beta: np.ndarray) -> np.ndarray:
        _, lam = self._mills(beta)
        grad = self.sd.Xy.T @ lam
        if self.gaussian:
            grad -= self.Q_inv @ beta
        return grad

    def hessian(self, beta: np.ndarray) -> np.ndarray:
        u, lam = self._mills(beta)
        hess = -(self.sd.Xy.T * (lam * (u + lam))) @ self.sd.Xy
        if self.gaussian:
            hess -= self.Q_inv
        return hess


def _laplace_frame(target: _LogPosterior, p: int):
    result = minimize(
        lambda b: -target(b)[0],
        np.zeros(p),
        jac=lambda b: -target.gradient(b),
        hess=lambda b: -target.hessian(b),
        method="trust-exact",
    )
    if not result.success:
        raise QuadratureError(f"posterior mode search failed: {result.message}")
    mode = result.x
    try:
        precision_factor = cholesky(-target.hessian(mode), lower=True)
    except LinAlgError as e:
        raise QuadratureError(f"Hessian at the mode is not negative definite: {e}") from e
    L = np.linalg.inv(precision_factor).T
    return mode, L, float(target(mode)[0])


def _box_half_width(target: _LogPosterior, mode, L, peak: float, p: int) -> float:
    """Grow the box until the log integrand on its faces is BOUNDARY_NATS below the peak"""
    edge = np.linspace(-1.0, 1.0, 41)
    if p == 1:
        faces = np.array([[-1.0], [1.0]])
    else:
        faces = np.vstack([
            np.column_stack([edge, np.full_like(edge, s)]) for s in (-1.0, 1.0)
        ] + [
            np.column_stack([np.full_like(edge, s), edge]) for s in (-1.0, 1.0)
        ])

    half = 6.0
    while half <= MAX_HALF_WIDTH:
        boundary = target(mode + (half * faces) @ L.T)
        if boundary.max() < peak - BOUNDARY_NATS:
            return half
        half *= 1.5
    raise QuadratureError(f"integrand does not decay within |z| <= {MAX_HALF_WIDTH}")


def _grid_moments(target: _LogPosterior, mode, L, peak: float, half: float, k: int, p: int):
    axis = np.linspace(-half, half, k)
    if p == 1:
        Z = axis[:, None]
    else:
        Z = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    g = np.exp(target(mode + Z @ L.T) - peak)

    def integrate(values: np.ndarray) -> float:
        values = values.reshape((k,) * p)
        for _ in range(p):
            values = simpson(values, x=axis, axis=0)
        return float(values)

    z0 = integrate(g)
    z1 = np.array([integrate(g * Z[:, j]) for j in range(p)])
    z2 = np.array([[integrate(g * Z[:, i] * Z[:, j]) for j in range(p)] for i in range(p)])
    mean_z = z1 / z0
    cov_z = z2 / z0 - np.outer(mean_z, mean_z)
    return z0, mode + L @ mean_z, L @ cov_z @ L.T


def quadrature_moments(d: Dataset, prior: Optional[PriorSpec] = None) -> QuadratureResult:
    """Normalizer, mean and covariance of the exact posterior for p <= 2"""
    if d.p > 2:
        raise DataValidationError(f"quadrature oracle supports p <= 2, got p={d.p}")
    sd = build_signed_design(d)
    if prior is None or prior.kind is PriorKind.FLAT:
        report = check_propriety(sd)
        if not report.is_proper:
            raise ProprietyError(report)

    p = sd.p
    target = _LogPosterior(sd, prior)
    mode, L, peak = _laplace_frame(target, p)
    half = _box_half_width(target, mode, L, peak, p)

    k = INITIAL_POINTS
    z0, mean, cov = _grid_moments(target, mode, L, peak, half, k, p)
    change = np.inf
    while change >= MEAN_TOLERANCE:
        if 2 * k - 1 > MAX_POINTS[p]:
            raise QuadratureError(f"grid refinement did not converge (last mean change {change:.2e})")
        k = 2 * k - 1
        z0, new_mean, cov = _grid_moments(target, mode, L, peak, half, k, p)
        change = float(np.max(np.abs(new_mean - mean)))
        mean = new_mean

    log_normalizer = peak + float(np.log(abs(np.linalg.det(L)))) + float(np.log(z0))
    logger.info(f"Quadrature converged with {k} points per axis, box half-width {half:.1f}")
    return QuadratureResult(
        normalizer=float(np.exp(log_normalizer)),
        log_normalizer=log_normalizer,
        mean=mean.tolist(),
        cov=(0.5 * (cov + cov.T)).tolist(),
        est_abs_error=change,
        grid_points=k**p,
        box_half_width=half,
    )


class DirectionScan(BaseModel):
    """Separation verdict from a direction scan"""
    verdict: ProprietyVerdict
    margin: float
    directions: int


def _boundary_directions(Xy: np.ndarray) -> np.ndarray:
    """Null vectors of every (p - 1)-row subset, both signs"""
    n, p = Xy.shape
    if p == 1:
        return np.array([[1.0], [-1.0]])
    rays = []
    for rows in combinations(range(n), p - 1):
        _, _, vt = np.linalg.svd(Xy[list(rows)])
        rays.append(vt[-1])
    rays = np.asarray(rays)
    return np.vstack([rays, -rays])


def direction_scan_separation(sd: SignedDesign, num_dirs: int = 100_000, seed: int = 0) -> DirectionScan:
    """Classify separation from sign patterns of X_y alpha over many directions"""
    if sd.p > 3:
        raise DataValidationError(f"direction scan supports p <= 3, got p={sd.p}")
    Xy = sd.Xy
    tol = SCAN_TOLERANCE * max(1.0, float(np.abs(Xy).max()))

    random_dirs = stream_rng(seed, Stream.SCAN).standard_normal((num_dirs, sd.p))
    boundary = _boundary_directions(Xy)
    boundary = boundary / np.linalg.norm(boundary, axis=1, keepdims=True)
    qualifying = boundary[(boundary @ Xy.T).min(axis=1) >= -tol]
    candidates = [random_dirs, boundary]
    if qualifying.size:
        candidates.append(qualifying.sum(axis=0, keepdims=True))

    A = np.vstack(candidates)
    A = A[np.linalg.norm(A, axis=1) > 0]
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    values = A @ Xy.T
    lows, highs = values.min(axis=1), values.max(axis=1)

    if np.any(lows > tol):
        verdict = ProprietyVerdict.COMPLETE_SEPARATION
    elif np.any((lows >= -tol) & (highs > tol)):
        verdict = ProprietyVerdict.QUASI_COMPLETE
    else:
        verdict = ProprietyVerdict.PROPER
    return DirectionScan(verdict=verdict, margin=float(lows.max()), directions=int(A.shape[0]))
