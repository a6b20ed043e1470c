"""
Error types shared by the numerical core, the CLI and the HTTP layer
"""
from typing import Any, Optional

# CLI exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PROPRIETY = 3


class OrthantMCError(Exception):
    """Base class for all package errors"""

    exit_code: int = EXIT_VALIDATION

    def to_dict(self) -> dict[str, Any]:
        """JSON error body"""
        return {"error": type(self).__name__, "detail": str(self)}


# Not a ValueError, so pydantic validators re-raise it unchanged
class DataValidationError(OrthantMCError):
    """Input data or configuration failed validation"""


class SingularDesignError(DataValidationError):
    """Design matrix is rank deficient"""

    def __init__(self, pivot: int, ratio: float):
        self.pivot = pivot
        self.ratio = ratio
        super().__init__(
            f"singular design: Gram pivot {pivot} has relative size {ratio:.3e}"
        )

    def to_dict(self) -> dict[str, Any]:
        body = super().to_dict()
        body["pivot"] = self.pivot
        return body


class DimensionMismatchError(OrthantMCError, ValueError):
    """Vector or matrix has the wrong shape"""


class ProprietyError(OrthantMCError):
    """Flat-prior posterior is improper; carries the separation certificate"""

    exit_code = EXIT_PROPRIETY

    def __init__(self, report: Any):
        self.report = report
        super().__init__(f"posterior is improper under the flat prior ({report.verdict.value})")

    def to_dict(self) -> dict[str, Any]:
        body = super().to_dict()
        body["verdict"] = self.report.verdict.value
        body["certificate"] = self.report.certificate
        return body


class WeightBlowUpError(OrthantMCError):
    """Residual norm vanished for a proposal (dataset at or near separation)"""

    def __init__(self, row: int, norm: float):
        self.row = row
        self.norm = norm
        super().__init__(
            f"weight blow-up, dataset at/near separation: proposal {row} has residual norm {norm:.3e}"
        )


class QuadratureError(OrthantMCError):
    """Quadrature did not reach the requested accuracy"""


class SimplexCyclingError(OrthantMCError):
    """Simplex iteration guard exceeded"""

    def __init__(self, iterations: int, phase: int):
        self.iterations = iterations
        self.phase = phase
        super().__init__(f"simplex phase {phase} exceeded {iterations} iterations")


class InsufficientSampleError(OrthantMCError):
    """Requested Monte Carlo size is below the supported minimum"""

    def __init__(self, name: str, value: int, minimum: int, detail: Optional[str] = None):
        message = f"{name}={value} is below the minimum {minimum}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class DegenerateWeightsError(OrthantMCError):
    """Importance weights are all zero or not finite"""
