"""Dense matrix contract: validation, SVD, symmetric eigendecomposition and norms.

Matrices are plain ``numpy`` float64 arrays; the helpers here enforce the
shape and finiteness invariants every estimator relies on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from htreg.errors import NumericalFailureError, ParameterError

logger = logging.getLogger(__name__)

DenseMatrix = NDArray[np.float64]


def as_dense(m: ArrayLike, name: str = "matrix") -> DenseMatrix:
    """Coerce input to a finite 2-D float64 array.

    Raises:
        ParameterError: If the input is not 2-D, is empty, or holds NaN/Inf.
    """
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Thin singular value decomposition ``m = u @ diag(s) @ vt``."""

    u: DenseMatrix
    singular_values: NDArray[np.float64]
    vt: DenseMatrix

    def reconstruct(self) -> DenseMatrix:
        return (self.u * self.singular_values) @ self.vt


def svd(m: ArrayLike) -> SvdResult:
    """Thin SVD with k = min(rows, cols), singular values non-increasing.

    Uses LAPACK gesdd through numpy and retries with the slower but more
    robust gesvd driver before giving up.

    Raises:
        NumericalFailureError: If neither driver converges.
    """
    arr = as_dense(m)
    try:
        u, s, vt = np.linalg.svd(arr, full_matrices=False)
    except np.linalg.LinAlgError:
        logger.debug(f"gesdd failed on {arr.shape}, retrying with gesvd")
        try:
            u, s, vt = scipy.linalg.svd(arr, full_matrices=False, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericalFailureError(f"SVD did not converge: {e}", shape=arr.shape) from e
    return SvdResult(u=u, singular_values=np.maximum(s, 0.0), vt=vt)


def sym_eig(m: ArrayLike) -> tuple[NDArray[np.float64], DenseMatrix]:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    arr = as_dense(m)
    if arr.shape[0] != arr.shape[1]:
        raise ParameterError(f"sym_eig needs a square matrix, got {arr.shape}")
    try:
        return np.linalg.eigh((arr + arr.T) / 2.0)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"eigh did not converge: {e}", shape=arr.shape) from e


@dataclass(frozen=True)
class MatrixNorms:
    """The matrix norms used across the package."""

    frobenius: float
    nuclear: float
    max_abs: float
    operator: float
    l1_entrywise: float
    row_sum_max: float
    col_sum_max: float


def matrix_norms(m: ArrayLike) -> MatrixNorms:
    """Compute Frobenius, nuclear, max, operator, l1,1, infinity and L1 norms."""
    arr = as_dense(m)
    s = svd(arr).singular_values
    absolute = np.abs(arr)
    return MatrixNorms(
        frobenius=float(np.linalg.norm(arr)),
        nuclear=float(s.sum()),
        max_abs=float(absolute.max()),
        operator=float(s[0]),
        l1_entrywise=float(absolute.sum()),
        row_sum_max=float(absolute.sum(axis=1).max()),
        col_sum_max=float(absolute.sum(axis=0).max()),
    )


def nuclear_norm(m: ArrayLike) -> float:
    return float(svd(m).singular_values.sum())
