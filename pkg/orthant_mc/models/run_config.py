"""
Run configuration shared by the CLI and the HTTP routes
"""
from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from orthant_mc.config import settings
from orthant_mc.core.gaussian_prior import PriorKind, PriorSpec
from orthant_mc.core.sampler import ResampleScheme, SamplerOptions, SMode
from orthant_mc.core.streams import UINT64_MAX
from orthant_mc.data.data_loader import load_q_file
from orthant_mc.utils.exceptions import DataValidationError


class RunConfig(BaseModel):
    """One invocation: subcommand, inputs, prior, Monte Carlo sizes and outputs"""

    command: str
    data_path: Optional[str] = None
    intercept: bool = False

    prior: PriorKind = PriorKind.FLAT
    q_scale: Optional[float] = Field(default=None, gt=0)
    q_file: Optional[str] = None

    N: int = Field(default_factory=lambda: settings.DEFAULT_PROPOSALS, ge=1)
    M: int = Field(default_factory=lambda: settings.DEFAULT_DRAWS, ge=1)
    seed: int = 0
    s_mode: SMode = SMode.FRESH
    resample: ResampleScheme = ResampleScheme.MULTINOMIAL
    threads: Optional[int] = Field(default=None, ge=1)

    iters: int = Field(default_factory=lambda: settings.GIBBS_ITERS, ge=1)
    burnin: int = Field(default_factory=lambda: settings.GIBBS_BURNIN, ge=0)

    # simulate / jointprob
    n: Optional[int] = Field(default=None, ge=1)
    p: Optional[int] = Field(default=None, ge=1)
    beta: Optional[list[float]] = None

    out: Optional[str] = None
    draws_out: Optional[str] = None

    @field_validator("seed")
    @classmethod
    def seed_is_uint64(cls, v):
        if not 0 <= v <= UINT64_MAX:
            raise DataValidationError(f"seed must be in [0, 2^64), got {v}")
        return v

    @model_validator(mode="after")
    def check_sizes(self):
        if self.command == "fit" and self.N < self.M:
            raise DataValidationError(f"need N >= M, got N={self.N}, M={self.M}")
        if self.burnin >= self.iters:
            raise DataValidationError(f"need burnin < iters, got burnin={self.burnin}, iters={self.iters}")
        if self.prior is PriorKind.GAUSSIAN and (self.q_scale is None) == (self.q_file is None):
            raise DataValidationError("Gaussian prior needs exactly one of --q-scale or --q-file")
        if self.prior is PriorKind.FLAT and (self.q_scale is not None or self.q_file is not None):
            raise DataValidationError("--q-scale/--q-file need --prior gaussian")
        return self

    def prior_spec(self, p: int) -> PriorSpec:
        if self.prior is PriorKind.FLAT:
            return PriorSpec.flat()
        if self.q_scale is not None:
            return PriorSpec.isotropic(self.q_scale, p)
        return PriorSpec.gaussian(load_q_file(self.q_file))

    def sampler_options(self) -> SamplerOptions:
        return SamplerOptions(s_mode=self.s_mode, resample=self.resample, threads=self.threads)

    def echo(self) -> dict[str, Any]:
        """Config echo for reports"""
        return self.model_dump(mode="json", exclude_none=True)
