"""
Flat-prior posterior propriety via separation linear programs

The flat-prior posterior is proper iff no alpha has X_y alpha >= 0 with
X_y alpha != 0. Quasi-complete separation (some zeros) is classified improper:
the importance weights ||Psi h||^{-n} are unbounded near the orthant boundary.
"""
import numpy as np
from scipy.optimize import minimize

from orthant_mc.core.design import SignedDesign
from orthant_mc.core.simplex import linprog_simplex
from orthant_mc.core.streams import Stream, stream_rng
from orthant_mc.models.report import ProprietyReport, ProprietyVerdict
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

LP_TOLERANCE = 1e-9


def _separation_lp(Xy: np.ndarray, quasi: bool):
    """
    Variables (a+, a-, slack); minimize ||alpha||_1 subject to
    complete:  X_y alpha - slack = 1
    quasi:     X_y alpha - slack = 0  and  1'X_y alpha = 1
    """
    n, p = Xy.shape
    A = np.hstack([Xy, -Xy, -np.eye(n)])
    b = np.ones(n)
    if quasi:
        total = Xy.sum(axis=0)
        A = np.vstack([A, np.concatenate([total, -total, np.zeros(n)])])
        b = np.concatenate([np.zeros(n), [1.0]])
    c = np.concatenate([np.ones(2 * p), np.zeros(n)])

    result = linprog_simplex(c, A, b, tol=LP_TOLERANCE)
    if not result.success:
        return None
    return result.x[:p] - result.x[p:2 * p]


def _interior_weight(Xy: np.ndarray) -> float:
    """
    max t over lambda = mu + t 1 with mu, t >= 0, X_y' lambda = 0 and 1'lambda = 1

    t > 0 means a strictly positive lambda annihilates X_y, which rules out any
    alpha with X_y alpha >= 0, X_y alpha != 0. The LP has p + 1 rows, so it
    settles proper datasets without the n-row separation programs.
    """
    n, p = Xy.shape
    ones = np.ones(n)
    A = np.vstack([
        np.column_stack([Xy.T, Xy.T @ ones]),
        np.concatenate([ones, [float(n)]]),
    ])
    b = np.concatenate([np.zeros(p), [1.0]])
    c = np.concatenate([np.zeros(n), [-1.0]])

    result = linprog_simplex(c, A, b, tol=LP_TOLERANCE)
    if not result.success:
        return 0.0
    return float(result.x[-1])


def check_propriety(sd: SignedDesign) -> ProprietyReport:
    """Classify the dataset and attach a re-verifiable certificate when improper"""
    if _interior_weight(sd.Xy) > LP_TOLERANCE:
        logger.info(f"Propriety verdict: {ProprietyVerdict.PROPER.value}")
        return ProprietyReport(verdict=ProprietyVerdict.PROPER)

    alpha = _separation_lp(sd.Xy, quasi=False)
    if alpha is not None:
        report = ProprietyReport(verdict=ProprietyVerdict.COMPLETE_SEPARATION, certificate=alpha.tolist())
    else:
        alpha = _separation_lp(sd.Xy, quasi=True)
        if alpha is not None:
            report = ProprietyReport(verdict=ProprietyVerdict.QUASI_COMPLETE, certificate=alpha.tolist())
        else:
            report = ProprietyReport(verdict=ProprietyVerdict.PROPER)

    if not report.verify(sd.Xy):
        logger.warning(f"Certificate for {report.verdict.value} failed re-verification")

    logger.info(f"Propriety verdict: {report.verdict.value}")
    return report


def _min_margin(Xy: np.ndarray, alpha: np.ndarray) -> float:
    norm = np.linalg.norm(alpha)
    if norm == 0:
        return -np.inf
    return float((Xy @ (alpha / norm)).min())


def separation_margin(sd: SignedDesign, restarts: int = 16, seed: int = 0) -> float:
    """
    Approximate max over unit alpha of min_i (X_y alpha)_i

    Nonpositive for proper data; values near zero signal near-separation and
    heavy importance weights. Multi-start SLSQP from the row directions and
    seeded random directions.
    """
    Xy = sd.Xy
    n, p = Xy.shape

    if p == 1:
        return max(_min_margin(Xy, np.array([1.0])), _min_margin(Xy, np.array([-1.0])))

    rng = stream_rng(seed, Stream.MARGIN)
    row_norms = np.linalg.norm(Xy, axis=1)
    starts = [row / norm for row, norm in zip(Xy, row_norms) if norm > 0]
    starts.extend(rng.standard_normal((restarts, p)))

    constraints = [
        {"type": "ineq", "fun": lambda x: Xy @ x[:p] - x[p], "jac": lambda x: np.hstack([Xy, -np.ones((n, 1))])},
        {"type": "eq", "fun": lambda x: x[:p] @ x[:p] - 1.0, "jac": lambda x: np.concatenate([2 * x[:p], [0.0]])[None, :]},
    ]

    best = -np.inf
    for start in starts:
        start = start / np.linalg.norm(start)
        best = max(best, _min_margin(Xy, start))
        x0 = np.concatenate([start, [float((Xy @ start).min())]])
        result = minimize(
            lambda x: -x[p],
            x0,
            jac=lambda x: np.concatenate([np.zeros(p), [-1.0]]),
            constraints=constraints,
            method="SLSQP",
            options={"maxiter": 200, "ftol": 1e-12},
        )
        best = max(best, _min_margin(Xy, result.x[:p]))

    if best > -1e-3:
        logger.warning(f"Separation margin {best:.3e} is not safely negative; expect heavy importance weights")
    return float(best)
