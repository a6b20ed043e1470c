"""
Gaussian N_p(0, Q) prior variant of the hierarchical posterior
"""
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from orthant_mc.core.design import FlatComponents, HierarchyComponents, SignedDesign
from orthant_mc.utils.arrays import readonly
from orthant_mc.utils.exceptions import DataValidationError, DimensionMismatchError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)


class PriorKind(str, Enum):
    """Prior families"""
    FLAT = "flat"
    GAUSSIAN = "gaussian"


class PriorSpec(BaseModel):
    """Prior on beta; Q and its derived factors exist only for the Gaussian kind"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: PriorKind = PriorKind.FLAT
    Q: Optional[np.ndarray] = None
    Q_inv: Optional[np.ndarray] = None
    q_inv_factor: Optional[np.ndarray] = None  # lower R with R R' = Q^{-1}
    log_det_Q: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def derive_factors(cls, data):
        if not isinstance(data, dict) or data.get("Q") is None:
            return data

        Q = np.asarray(data["Q"], dtype=np.float64)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DataValidationError(f"Q must be square, got shape {Q.shape}")
        scale = max(float(np.abs(Q).max()), np.finfo(float).tiny)
        if np.abs(Q - Q.T).max() > 1e-12 * scale:
            raise DataValidationError("Q is not symmetric")

        try:
            q_factor = cholesky(Q, lower=True)
        except LinAlgError as e:
            raise DataValidationError(f"Q is not positive definite: {e}") from e

        Q_inv = cho_solve((q_factor, True), np.eye(Q.shape[0]))
        Q_inv = 0.5 * (Q_inv + Q_inv.T)
        try:
            q_inv_factor = cholesky(Q_inv, lower=True)
        except LinAlgError as e:
            raise DataValidationError(f"Q is numerically singular: {e}") from e

        return {
            **data,
            "Q": readonly(Q),
            "Q_inv": readonly(Q_inv),
            "q_inv_factor": readonly(q_inv_factor),
            "log_det_Q": 2.0 * float(np.sum(np.log(np.diag(q_factor)))),
        }

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind is PriorKind.GAUSSIAN and self.Q is None:
            raise DataValidationError("Gaussian prior needs a covariance Q")
        if self.kind is PriorKind.FLAT and self.Q is not None:
            raise DataValidationError("flat prior takes no covariance")
        return self

    @classmethod
    def flat(cls) -> "PriorSpec":
        return cls(kind=PriorKind.FLAT)

    @classmethod
    def gaussian(cls, Q) -> "PriorSpec":
        return cls(kind=PriorKind.GAUSSIAN, Q=Q)

    @classmethod
    def isotropic(cls, tau2: float, p: int) -> "PriorSpec":
        """Q = tau2 * I_p"""
        if not tau2 > 0:
            raise DataValidationError(f"prior scale must be positive, got {tau2}")
        return cls.gaussian(float(tau2) * np.eye(p))

    @property
    def tag(self) -> str:
        return self.kind.value


class PenalizedQuadraticForm:
    """q(h) = h' Psi[X_y, Q] h with Psi[X_y, Q] = I - X_y (X'X + Q^{-1})^{-1} X_y'"""

    def __init__(self, sd: SignedDesign, ridge_factor: np.ndarray, q_inv_factor: np.ndarray):
        self.sd = sd
        self.ridge_factor = ridge_factor
        self.q_inv_factor = q_inv_factor

    def evaluate(self, H: np.ndarray) -> np.ndarray:
        """
        Row-wise q(h), computed as ||h - X_y c||^2 + c' Q^{-1} c with
        c = (X'X + Q^{-1})^{-1} X_y' h; both terms are nonnegative.
        """
        H = np.asarray(H, dtype=np.float64)
        if H.shape[-1] != self.sd.n:
            raise DimensionMismatchError(f"expected vectors of length {self.sd.n}, got shape {H.shape}")
        H2 = np.atleast_2d(H)
        C = cho_solve((self.ridge_factor, True), (H2 @ self.sd.Xy).T).T
        resid = H2 - C @ self.sd.Xy.T
        penalty = C @ self.q_inv_factor
        q = np.einsum("ij,ij->i", resid, resid) + np.einsum("ij,ij->i", penalty, penalty)
        return q if H.ndim == 2 else q[0]

    __call__ = evaluate


class GaussianPriorComponents(HierarchyComponents):
    """Gaussian prior: v(h) = q(h)^{-1/2}, precision X'X + Q^{-1}"""

    prior_tag = PriorKind.GAUSSIAN.value

    def __init__(self, sd: SignedDesign, ps: PriorSpec):
        if ps.kind is not PriorKind.GAUSSIAN:
            raise DataValidationError("Gaussian components need a Gaussian prior")
        if ps.Q.shape != (sd.p, sd.p):
            raise DimensionMismatchError(f"Q must be {sd.p}x{sd.p}, got {ps.Q.shape}")

        ridge_gram = sd.gram + ps.Q_inv
        ridge_gram = 0.5 * (ridge_gram + ridge_gram.T)
        try:
            ridge_factor = cholesky(ridge_gram, lower=True)
        except LinAlgError as e:
            raise DataValidationError(f"X'X + Q^-1 factorization failed: {e}") from e

        super().__init__(sd, ridge_factor)
        self.prior = ps
        self.ridge_gram = readonly(ridge_gram)
        self.ridge_inv_factor = readonly(solve_triangular(ridge_factor, np.eye(sd.p), lower=True, trans="T"))
        self.log_det_ridge = 2.0 * float(np.sum(np.log(np.diag(ridge_factor))))
        self.form = PenalizedQuadraticForm(sd, ridge_factor, ps.q_inv_factor)

    def log_v(self, H: np.ndarray) -> np.ndarray:
        return -0.5 * np.log(np.atleast_1d(self.form.evaluate(H)))

    @property
    def log_evidence_constant(self) -> float:
        return -self.sd.n * np.log(2.0) - 0.5 * self.prior.log_det_Q - 0.5 * self.log_det_ridge


def quadratic_form(ps: PriorSpec, sd: SignedDesign, h) -> float:
    """q(h) for a single unit vector h"""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {h.shape}")
    if abs(float(np.linalg.norm(h)) - 1.0) > 1e-8:
        raise DataValidationError("quadratic_form expects a unit vector")
    return float(GaussianPriorComponents(sd, ps).form.evaluate(h))


def gaussian_prior_components(ps: PriorSpec, sd: SignedDesign) -> GaussianPriorComponents:
    """Sampler hooks for the Gaussian prior; no propriety gate is needed"""
    components = GaussianPriorComponents(sd, ps)
    logger.debug(f"Gaussian prior components ready, log|X'X+Q^-1|={components.log_det_ridge:.4f}")
    return components


def components_for(sd: SignedDesign, prior: Optional[PriorSpec] = None) -> HierarchyComponents:
    """Pick the hierarchy for a prior (None means flat)"""
    if prior is None or prior.kind is PriorKind.FLAT:
        return FlatComponents(sd)
    return gaussian_prior_components(prior, sd)
