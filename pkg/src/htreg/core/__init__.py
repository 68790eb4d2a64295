"""Numeric foundations: matrix contract, norms and seeded samplers."""

from htreg.core.matrix import (
    DenseMatrix,
    MatrixNorms,
    SvdResult,
    as_dense,
    matrix_norms,
    nuclear_norm,
    svd,
    sym_eig,
)
from htreg.core.rng import (
    RNG_ALGORITHM,
    RngHandle,
    precision_cholesky,
    sample_multivariate_t,
    sample_student_t,
)

__all__ = [
    "DenseMatrix",
    "MatrixNorms",
    "SvdResult",
    "as_dense",
    "matrix_norms",
    "nuclear_norm",
    "svd",
    "sym_eig",
    "RNG_ALGORITHM",
    "RngHandle",
    "precision_cholesky",
    "sample_multivariate_t",
    "sample_student_t",
]
