"""
Signed design, Gram factorization and projector
Everything downstream (sampler, moments, propriety, Gibbs) consumes a SignedDesign.
"""
from abc import ABC, abstractmethod

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.linalg import cho_solve, lapack, solve_triangular
from scipy.special import erfcx, gammaln, ndtr

from orthant_mc.models.dataset import Dataset
from orthant_mc.utils.arrays import readonly
from orthant_mc.utils.exceptions import DimensionMismatchError, SingularDesignError, WeightBlowUpError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

# Relative Cholesky pivot below which the design counts as rank deficient
PIVOT_TOLERANCE = 1e-10

# Residual norm below which a flat-prior weight is treated as infinite
RESIDUAL_FLOOR = 1e-12

# log Phi switches to the scaled erfc form below this argument
LOG_NDTR_TAIL = -8.0


def log_ndtr_stable(x):
    """
    log of the standard normal CDF, accurate in both tails

    Below LOG_NDTR_TAIL the value is log(erfcx(-x/sqrt2)/2) - x^2/2, which stays
    finite until x^2 overflows (|x| > ~1.3e154); only then is -inf returned.
    """
    x = np.asarray(x, dtype=np.float64)
    flat = np.atleast_1d(x)
    out = np.empty_like(flat)

    tail = flat < LOG_NDTR_TAIL
    upper = flat > 0.0
    middle = ~(tail | upper)

    xt = flat[tail]
    with np.errstate(over="ignore"):
        out[tail] = np.log(0.5 * erfcx(-xt / np.sqrt(2.0))) - 0.5 * xt * xt
    out[middle] = np.log(ndtr(flat[middle]))
    out[upper] = np.log1p(-ndtr(-flat[upper]))

    return out.reshape(x.shape) if x.ndim else float(out[0])


class SignedDesign(BaseModel):
    """X_y = diag(2y - 1) X with its cached Gram factorization"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    Xy: np.ndarray
    gram: np.ndarray
    gram_factor: np.ndarray  # lower L with L L' = X'X
    inv_gram_factor: np.ndarray  # A = L^{-T}, A A' = (X'X)^{-1}
    log_det_gram: float

    @property
    def n(self) -> int:
        return int(self.Xy.shape[0])

    @property
    def p(self) -> int:
        return int(self.Xy.shape[1])

    def solve_gram(self, B: np.ndarray) -> np.ndarray:
        """(X'X)^{-1} B via two triangular solves"""
        return cho_solve((self.gram_factor, True), B)

    def inverse_gram(self) -> np.ndarray:
        return self.solve_gram(np.eye(self.p))

    def projector(self) -> "Projector":
        return Projector(self)


def _cholesky_with_pivot_check(gram: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, raising SingularDesignError on a tiny pivot"""
    factor, info = lapack.dpotrf(gram, lower=1, clean=1)
    diag = np.diag(gram)
    if info > 0:
        pivot = info - 1
        raise SingularDesignError(pivot, 0.0)

    ratios = np.where(diag > 0, np.diag(factor) ** 2 / np.where(diag > 0, diag, 1.0), 0.0)
    small = np.flatnonzero(ratios < PIVOT_TOLERANCE)
    if small.size:
        raise SingularDesignError(int(small[0]), float(ratios[small[0]]))
    return factor


def build_signed_design(d: Dataset) -> SignedDesign:
    """Sign-flip the rows of X by y and factor the Gram matrix once"""
    Xy = d.signs[:, None] * d.X
    gram = d.X.T @ d.X
    gram = 0.5 * (gram + gram.T)

    factor = _cholesky_with_pivot_check(gram)
    inv_factor = solve_triangular(factor, np.eye(d.p), lower=True, trans="T")
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor))))

    logger.debug(f"Built signed design n={d.n}, p={d.p}, log|X'X|={log_det:.4f}")

    return SignedDesign(
        Xy=readonly(Xy),
        gram=readonly(gram),
        gram_factor=readonly(factor),
        inv_gram_factor=readonly(inv_factor),
        log_det_gram=log_det,
    )


class Projector:
    """Matrix-free Psi[X_y] = I - X_y (X'X)^{-1} X_y'"""

    def __init__(self, sd: SignedDesign):
        self.sd = sd

    def _check(self, h: np.ndarray) -> np.ndarray:
        h = np.asarray(h, dtype=np.float64)
        if h.ndim not in (1, 2) or h.shape[-1] != self.sd.n:
            raise DimensionMismatchError(
                f"expected vectors of length {self.sd.n}, got shape {h.shape}"
            )
        return h

    def apply(self, h: np.ndarray) -> np.ndarray:
        """Project a vector, or each row of a matrix, onto the residual space"""
        h = self._check(h)
        H = np.atleast_2d(h)
        coef = self.sd.solve_gram((H @ self.sd.Xy).T)
        out = H - (self.sd.Xy @ coef).T
        return out.reshape(h.shape)

    __call__ = apply

    def norms(self, h: np.ndarray) -> np.ndarray:
        """Row-wise residual norms"""
        return np.linalg.norm(self.apply(h), axis=-1)


def apply_projector(sd: SignedDesign, h: np.ndarray) -> np.ndarray:
    return Projector(sd).apply(h)


def residual_norm(sd: SignedDesign, h: np.ndarray) -> float:
    """||Psi h|| for a single vector"""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {h.shape}")
    return float(Projector(sd).norms(h))


def log_likelihood(d: Dataset, beta) -> float:
    """sum_i log Phi((2y_i - 1) x_i' beta)"""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (d.p,):
        raise DimensionMismatchError(f"beta must have length {d.p}, got shape {beta.shape}")
    return float(np.sum(log_ndtr_stable(d.signs * (d.X @ beta))))


def orthant_constant(n: int) -> float:
    """c1(n) = pi^{n/2} / (2^n Gamma(n/2)); the orthant of the unit sphere has area 2 c1(n)"""
    return float(np.exp(0.5 * n * np.log(np.pi) - n * np.log(2.0) - gammaln(0.5 * n)))


class HierarchyComponents(ABC):
    """
    Conditional structure of the posterior for one prior

    beta | s, u ~ N(P^{-1} X_y' s^{1/2} u, P^{-1}),  s | u ~ v(u)^2 chi2_n,
    pi(u) proportional to v(u)^n on the positive orthant of the sphere,
    where P is X'X (flat prior) or X'X + Q^{-1} (Gaussian prior).
    """

    prior_tag: str = ""

    def __init__(self, sd: SignedDesign, precision_factor: np.ndarray):
        self.sd = sd
        self.precision_factor = precision_factor

    @abstractmethod
    def log_v(self, H: np.ndarray) -> np.ndarray:
        """log v(h) for each row of H"""

    @property
    @abstractmethod
    def log_evidence_constant(self) -> float:
        """log of the factor turning E_h[v^n] into the marginal likelihood"""

    def log_weights(self, H: np.ndarray) -> np.ndarray:
        return self.sd.n * self.log_v(H)

    def coefficient_map(self, H: np.ndarray) -> np.ndarray:
        """Rows P^{-1} X_y' h for each row h of H"""
        H = np.atleast_2d(H)
        return cho_solve((self.precision_factor, True), (H @ self.sd.Xy).T).T

    def noise(self, Z: np.ndarray) -> np.ndarray:
        """Rows A z with A A' = P^{-1}"""
        Z = np.atleast_2d(Z)
        return solve_triangular(self.precision_factor, Z.T, lower=True, trans="T").T

    def posterior_scale(self) -> np.ndarray:
        """P^{-1}"""
        return cho_solve((self.precision_factor, True), np.eye(self.sd.p))


class FlatComponents(HierarchyComponents):
    """Flat prior: v(h) = 1 / ||Psi h||"""

    prior_tag = "flat"

    def __init__(self, sd: SignedDesign):
        super().__init__(sd, sd.gram_factor)
        self.projector = Projector(sd)

    def log_v(self, H: np.ndarray) -> np.ndarray:
        norms = np.atleast_1d(self.projector.norms(H))
        if norms.size and norms.min() < RESIDUAL_FLOOR:
            row = int(np.argmin(norms))
            raise WeightBlowUpError(row, float(norms[row]))
        return -np.log(norms)

    @property
    def log_evidence_constant(self) -> float:
        n, p = self.sd.n, self.sd.p
        return -n * np.log(2.0) + 0.5 * p * np.log(2.0 * np.pi) - 0.5 * self.sd.log_det_gram
