"""
CSV ingestion, simulation and draw export

Dialect: comma separated, '.' decimal, no quoting. The first column is y, the
rest are covariates; a header row is recognised by a non-numeric first cell.
"""
import csv
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import ndtr

from orthant_mc.core.design import build_signed_design
from orthant_mc.core.streams import Stream, stream_rng
from orthant_mc.models.dataset import Dataset
from orthant_mc.utils.exceptions import DataValidationError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_rows(path: PathLike) -> list[tuple[int, list[str]]]:
    """Non-blank rows paired with the file line they end on"""
    file_path = Path(path)
    try:
        with open(file_path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            rows = [(reader.line_num, [cell.strip() for cell in row]) for row in reader]
    except FileNotFoundError as e:
        logger.error(f"File not found: {file_path}")
        raise DataValidationError(f"file not found: {file_path}") from e
    return [(line, row) for line, row in rows if any(row)]


def load_csv(path: PathLike, intercept: bool = False) -> Dataset:
    """Read y and covariates; errors name the line of the file"""
    rows = _read_rows(path)
    header = None
    if rows and not _is_number(rows[0][1][0]):
        header, rows = rows[0][1], rows[1:]
    if not rows:
        raise DataValidationError(f"{path}: no data rows")

    width = len(rows[0][1])
    if width < 1 or (width < 2 and not intercept):
        raise DataValidationError(f"{path}: need a response column and at least one covariate")

    y = np.empty(len(rows), dtype=np.int8)
    X = np.empty((len(rows), width - 1))
    for i, (line, row) in enumerate(rows):
        if len(row) != width:
            raise DataValidationError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        try:
            values = [float(cell) for cell in row]
        except ValueError as e:
            raise DataValidationError(f"{path}: row {line} has a non-numeric field ({e})") from e
        if values[0] not in (0.0, 1.0):
            raise DataValidationError(f"{path}: row {line} has y = {row[0]}, expected 0 or 1")
        y[i] = int(values[0])
        X[i] = values[1:]

    d = Dataset.from_arrays(y, X, intercept=intercept)
    build_signed_design(d)

    logger.info(f"Loaded {path}: n={d.n}, p={d.p}{' (header skipped)' if header else ''}")
    return d


def write_csv(d: Dataset, path: PathLike, columns: Optional[Sequence[str]] = None) -> Path:
    """Write y and X with a header; floats use repr so re-reading is exact"""
    columns = list(columns) if columns else [f"x{j + 1}" for j in range(d.p)]
    if len(columns) != d.p:
        raise DataValidationError(f"expected {d.p} column names, got {len(columns)}")
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["y", *columns])
        for yi, row in zip(d.y, d.X):
            writer.writerow([int(yi), *(repr(float(v)) for v in row)])
    return out


def simulate(n: int, p: int, beta, seed: int, out: Optional[PathLike] = None) -> Dataset:
    """
    Draw a probit dataset: column 1 is the constant, the other p - 1 columns are
    i.i.d. N(0, 1), and y_i ~ Bernoulli(Phi(x_i' beta)).
    """
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (p,) or not np.all(np.isfinite(beta)):
        raise DataValidationError(f"beta must be a finite vector of length {p}")
    if n < p:
        raise DataValidationError(f"need n >= p, got n={n}, p={p}")

    rng = stream_rng(seed, Stream.SIMULATE)
    X = np.column_stack([np.ones(n), rng.standard_normal((n, p - 1))])
    y = (rng.random(n) < ndtr(X @ beta)).astype(np.int8)
    d = Dataset(y=y, X=X, has_intercept=False)

    if out is not None:
        write_csv(d, out, ["const", *(f"x{j}" for j in range(1, p))])
        logger.info(f"Simulated n={n}, p={p} dataset written to {out}")
    return d


def write_draws_csv(B: np.ndarray, path: PathLike) -> Path:
    """Posterior draws, one row per draw, header beta_1..beta_p"""
    B = np.atleast_2d(B)
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"beta_{j + 1}" for j in range(B.shape[1])])
        writer.writerows([repr(float(v)) for v in row] for row in B)
    logger.info(f"Wrote {B.shape[0]} draws to {out}")
    return out


def load_q_file(path: PathLike) -> np.ndarray:
    """Square prior covariance matrix from a headerless CSV"""
    rows = _read_rows(path)
    try:
        Q = np.array([[float(cell) for cell in row] for _, row in rows])
    except ValueError as e:
        raise DataValidationError(f"{path}: prior covariance must be numeric ({e})") from e
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DataValidationError(f"{path}: prior covariance must be square, got shape {Q.shape}")
    return Q
