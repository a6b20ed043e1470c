"""
Inference API
Run the propriety check, the direct sampler, the closed-form moments and the
Gibbs baseline on a dataset posted as JSON
"""
from typing import Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field, ValidationError

from orthant_mc.core import runs
from orthant_mc.core.gaussian_prior import PriorKind
from orthant_mc.core.sampler import ResampleScheme, SMode
from orthant_mc.models.dataset import Dataset
from orthant_mc.models.report import CheckReport, FitReport
from orthant_mc.models.run_config import RunConfig
from orthant_mc.utils.exceptions import OrthantMCError, ProprietyError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

router = APIRouter(prefix="/api", tags=["Inference"])


class DatasetPayload(BaseModel):
    """Responses and design rows"""
    y: list[int]
    X: list[list[float]]
    intercept: bool = False


class InferenceRequest(DatasetPayload):
    """Dataset plus run options"""
    prior: PriorKind = PriorKind.FLAT
    q_scale: Optional[float] = None
    N: Optional[int] = Field(default=None, description="hemisphere proposals")
    M: Optional[int] = Field(default=None, description="posterior draws")
    seed: int = 0
    s_mode: SMode = SMode.FRESH
    resample: ResampleScheme = ResampleScheme.MULTINOMIAL
    iters: Optional[int] = None
    burnin: Optional[int] = None


def _prepare(command: str, request: InferenceRequest) -> tuple[Dataset, RunConfig]:
    d = Dataset.from_arrays(request.y, request.X, intercept=request.intercept)
    options = request.model_dump(exclude={"y", "X", "intercept"}, exclude_none=True)
    return d, RunConfig(command=command, intercept=request.intercept, **options)


def _run(command: str, func, *args):
    try:
        return func(*args)
    except ProprietyError as e:
        logger.warning(f"{command} rejected: {e}")
        raise HTTPException(status_code=409, detail=e.to_dict())
    except OrthantMCError as e:
        logger.warning(f"{command} failed: {e}")
        raise HTTPException(status_code=422, detail=e.to_dict())
    except ValidationError as e:
        raise HTTPException(status_code=422, detail={"error": "ValidationError", "detail": str(e)})


@router.post("/check", response_model=CheckReport)
def check(payload: DatasetPayload):
    """
    Flat-prior propriety verdict

    Returns:
        Verdict, separating direction for improper data, margin for proper data
    """
    def work():
        d = Dataset.from_arrays(payload.y, payload.X, intercept=payload.intercept)
        return runs.run_check(d)

    return _run("check", work)


@router.post("/fit", response_model=FitReport)
def fit(request: InferenceRequest):
    """Posterior draws summarised by mean and covariance"""
    def work():
        d, cfg = _prepare("fit", request)
        report, _ = runs.run_fit(d, cfg)
        return report

    return _run("fit", work)


@router.post("/moments", response_model=FitReport)
def moments(request: InferenceRequest):
    """Closed-form posterior moments from one hemisphere batch"""
    def work():
        d, cfg = _prepare("moments", request)
        return runs.run_moments(d, cfg)

    return _run("moments", work)


@router.post("/gibbs", response_model=FitReport)
def gibbs(request: InferenceRequest):
    def work():
        d, cfg = _prepare("gibbs", request)
        report, _ = runs.run_gibbs_report(d, cfg)
        return report

    return _run("gibbs", work)
