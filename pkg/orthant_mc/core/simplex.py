"""
Two-phase tableau simplex for small dense problems

Minimize c @ x subject to A @ x == b, x >= 0. Pivoting follows Bland's rule,
so the iteration guard should never trip; it is still reported when it does.
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from orthant_mc.utils.exceptions import SimplexCyclingError

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 2
STATUS_UNBOUNDED = 3


class SimplexResult(BaseModel):
    """Outcome of linprog_simplex"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: Optional[np.ndarray] = None
    fun: Optional[float] = None
    status: int
    nit: int

    @property
    def success(self) -> bool:
        return self.status == STATUS_OPTIMAL


def _pivot_col(T: np.ndarray, tol: float) -> tuple[bool, int]:
    """First column (Bland) with a negative reduced cost"""
    candidates = np.flatnonzero(T[-1, :-1] < -tol)
    if candidates.size == 0:
        return False, -1
    return True, int(candidates[0])


def _pivot_row(T: np.ndarray, basis: np.ndarray, pivcol: int, phase: int, tol: float) -> tuple[bool, int]:
    """Minimum-ratio row; ties go to the lowest basic variable index"""
    k = 2 if phase == 1 else 1
    column = T[:-k, pivcol]
    eligible = column > tol
    if not eligible.any():
        return False, -1
    ratios = np.full(column.shape, np.inf)
    ratios[eligible] = T[:-k, -1][eligible] / column[eligible]
    min_rows = np.flatnonzero(ratios == ratios.min())
    return True, int(min_rows[np.argmin(basis[min_rows])])


def _apply_pivot(T: np.ndarray, basis: np.ndarray, pivrow: int, pivcol: int) -> None:
    basis[pivrow] = pivcol
    T[pivrow] = T[pivrow] / T[pivrow, pivcol]
    column = T[:, pivcol].copy()
    column[pivrow] = 0.0
    T -= np.outer(column, T[pivrow])


def _solve_simplex(T: np.ndarray, basis: np.ndarray, phase: int, tol: float, maxiter: int, nit0: int = 0) -> tuple[int, int]:
    nit = nit0
    while True:
        found, pivcol = _pivot_col(T, tol)
        if not found:
            return nit, STATUS_OPTIMAL
        found, pivrow = _pivot_row(T, basis, pivcol, phase, tol)
        if not found:
            return nit, STATUS_UNBOUNDED
        if nit >= maxiter:
            raise SimplexCyclingError(maxiter, phase)
        _apply_pivot(T, basis, pivrow, pivcol)
        nit += 1


def linprog_simplex(c, A_eq, b_eq, tol: float = 1e-9, maxiter: Optional[int] = None) -> SimplexResult:
    """Two-phase simplex on an equality-form problem"""
    c = np.asarray(c, dtype=np.float64)
    A = np.array(A_eq, dtype=np.float64)
    b = np.array(b_eq, dtype=np.float64)
    m, n = A.shape
    maxiter = maxiter or 50 * (m + n) + 100

    # Phase 1 needs b >= 0
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # Rows: constraints, phase-2 objective, phase-1 objective
    T = np.zeros((m + 2, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-2, :n] = c
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)

    nit, status = _solve_simplex(T, basis, phase=1, tol=tol, maxiter=maxiter)
    if abs(T[-1, -1]) > tol:
        return SimplexResult(status=STATUS_INFEASIBLE, nit=nit)

    # Drive artificial variables out of the basis; rows that cannot be pivoted are redundant
    for pivrow in [row for row in range(m) if basis[row] >= n]:
        nonzero = np.flatnonzero(np.abs(T[pivrow, :n]) > tol)
        if nonzero.size:
            _apply_pivot(T, basis, pivrow, int(nonzero[0]))
            nit += 1
    keep = [row for row in range(m) if basis[row] < n]

    T2 = np.vstack([
        np.hstack([T[keep, :n], T[keep, -1:]]),
        np.hstack([T[-2, :n], T[-2, -1:]]),
    ])
    basis2 = basis[keep].copy()

    nit, status = _solve_simplex(T2, basis2, phase=2, tol=tol, maxiter=maxiter, nit0=nit)
    if status != STATUS_OPTIMAL:
        return SimplexResult(status=status, nit=nit)

    x = np.zeros(n)
    x[basis2] = T2[:-1, -1]
    return SimplexResult(x=x, fun=float(c @ x), status=STATUS_OPTIMAL, nit=nit)
