"""
Dataset model: binary responses and a design matrix
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from orthant_mc.utils.arrays import readonly
from orthant_mc.utils.exceptions import DataValidationError


class Dataset(BaseModel):
    """Probit regression input: y in {0,1}^n and X of shape (n, p)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: np.ndarray
    X: np.ndarray
    has_intercept: bool = False

    @field_validator("y", mode="before")
    @classmethod
    def validate_y(cls, v):
        """Responses must be a vector of bits"""
        y = np.asarray(v)
        if y.ndim != 1:
            raise DataValidationError(f"y must be a vector, got shape {y.shape}")
        if y.size and not np.all((y == 0) | (y == 1)):
            bad = int(np.flatnonzero((y != 0) & (y != 1))[0])
            raise DataValidationError(f"y[{bad}] = {y[bad]!r} is not 0 or 1")
        return readonly(y.astype(np.int8))

    @field_validator("X", mode="before")
    @classmethod
    def validate_x(cls, v):
        """Design must be a finite 2-D matrix"""
        X = np.asarray(v, dtype=np.float64)
        if X.ndim != 2:
            raise DataValidationError(f"X must be a matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DataValidationError("X contains non-finite entries")
        return readonly(X)

    @model_validator(mode="after")
    def check_shapes(self):
        n, p = self.X.shape
        if self.y.shape[0] != n:
            raise DataValidationError(f"y has {self.y.shape[0]} entries but X has {n} rows")
        if p < 1:
            raise DataValidationError("X needs at least one column")
        if n < p:
            raise DataValidationError(f"need n >= p, got n={n}, p={p}")
        return self

    @classmethod
    def from_arrays(cls, y, X, intercept: bool = False) -> "Dataset":
        """Build a dataset, optionally prepending a constant column"""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if intercept:
            X = np.column_stack([np.ones(X.shape[0]), X])
        return cls(y=y, X=X, has_intercept=intercept)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    @property
    def signs(self) -> np.ndarray:
        """2y - 1 as floats"""
        return 2.0 * self.y - 1.0

    def rescaled(self, scales) -> "Dataset":
        """Dataset with columns multiplied by positive scales (X -> XD)"""
        scales = np.asarray(scales, dtype=np.float64)
        if scales.shape != (self.p,) or np.any(scales <= 0):
            raise DataValidationError("column scales must be a positive vector of length p")
        return Dataset(y=self.y, X=self.X * scales, has_intercept=self.has_intercept)

    def summary(self) -> dict[str, object]:
        """Short description for logs and reports"""
        return {
            "n": self.n,
            "p": self.p,
            "ones": int(self.y.sum()),
            "has_intercept": self.has_intercept,
        }
