"""
Report models emitted as JSON by the CLI and the HTTP API
"""
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field

from orthant_mc import __version__


class ProprietyVerdict(str, Enum):
    """Flat-prior propriety outcomes"""
    PROPER = "proper"
    COMPLETE_SEPARATION = "improper_complete_separation"
    QUASI_COMPLETE = "improper_quasi_complete"


class ProprietyReport(BaseModel):
    """Verdict plus a separating direction alpha for improper data"""
    verdict: ProprietyVerdict
    certificate: Optional[list[float]] = None
    margin: Optional[float] = None

    @property
    def is_proper(self) -> bool:
        return self.verdict is ProprietyVerdict.PROPER

    def verify(self, Xy: np.ndarray, tol: float = 1e-9, min_peak: float = 1e-6) -> bool:
        """Re-check the certificate by direct multiplication"""
        if self.certificate is None:
            return self.is_proper
        alpha = np.asarray(self.certificate, dtype=np.float64)
        norm = np.linalg.norm(alpha)
        if norm == 0:
            return False
        values = Xy @ (alpha / norm)
        if values.min() < -tol or values.max() < min_peak:
            return False
        if self.verdict is ProprietyVerdict.COMPLETE_SEPARATION:
            return bool(values.min() > 0)
        return True


class SamplerDiagnostics(BaseModel):
    """Importance-weight diagnostics recorded with a set of draws"""
    ess: float
    max_normalized_weight: float
    proposals: int
    draws: int
    s_mode: str
    resample: str


class FitReport(BaseModel):
    """JSON document for fit, moments and gibbs runs"""
    command: str
    n: int
    p: int
    prior: str
    verdict: Optional[ProprietyVerdict] = None
    mean: list[float]
    cov: list[list[float]]
    mc_se_mean: list[float]
    mc_se_cov: Optional[list[list[float]]] = None
    ess: Optional[float] = None
    max_normalized_weight: Optional[float] = None
    log_marginal_likelihood: Optional[float] = None
    log_marginal_likelihood_rel_se: Optional[float] = None
    insufficient_n: Optional[bool] = None
    seed: int
    timings_ms: dict[str, float] = Field(default_factory=dict)
    tool_version: str = __version__
    config: dict[str, Any] = Field(default_factory=dict)


class CheckReport(BaseModel):
    """JSON document for the check subcommand"""
    command: str = "check"
    n: int
    p: int
    verdict: ProprietyVerdict
    certificate: Optional[list[float]] = None
    margin: Optional[float] = None
    tool_version: str = __version__


class SimulateReport(BaseModel):
    """JSON document for the simulate subcommand"""
    command: str = "simulate"
    n: int
    p: int
    ones: int
    seed: int
    out: Optional[str] = None
    tool_version: str = __version__


class QuadratureResult(BaseModel):
    """Brute-force posterior moments from tensor-grid quadrature"""
    normalizer: float
    log_normalizer: float
    mean: list[float]
    cov: list[list[float]]
    est_abs_error: float
    grid_points: int
    box_half_width: float


class JointProbabilityReport(BaseModel):
    """Polar Monte Carlo estimate of Pr(Y = y | beta) next to the direct product"""
    estimate: float
    standard_error: float
    direct: float
    proposals: int
    seed: int


class ErrorResponse(BaseModel):
    """Error response"""
    error: str
    detail: Optional[str] = None
    exit_code: int = 2
    verdict: Optional[ProprietyVerdict] = None
    certificate: Optional[list[float]] = None
    pivot: Optional[int] = None
