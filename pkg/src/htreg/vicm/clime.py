"""Constrained l1 minimization for precision matrix estimation (CLIME).

Column k solves the linear program

    min ||w||_1  s.t.  ||Sigma w - e_k||_inf <= gamma

with w = w_plus - w_minus, w_plus, w_minus >= 0. The final estimate keeps,
for each symmetric pair, the entry of smaller magnitude.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linprog

from htreg.core.matrix import DenseMatrix, as_dense
from htreg.errors import InfeasibleProgramError, NumericalFailureError, ParameterError

logger = logging.getLogger(__name__)

# HiGHS defaults are 1e-7; tighter tolerances keep ||Sigma Omega - I||_max <= gamma + 1e-9.
_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}

# linprog status codes
_STATUS_INFEASIBLE = 2


def clime_column(sigma_hat: DenseMatrix, k: int, gamma: float) -> np.ndarray:
    """Solve the LP for column ``k`` with the dual simplex method."""
    d = sigma_hat.shape[0]
    e_k = np.zeros(d)
    e_k[k] = 1.0
    cost = np.ones(2 * d)
    block = np.hstack([sigma_hat, -sigma_hat])
    a_ub = np.vstack([block, -block])
    b_ub = np.concatenate([gamma + e_k, gamma - e_k])
    result = linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=(0, None),
        method="highs-ds",
        options=_HIGHS_OPTIONS,
    )
    if result.status == _STATUS_INFEASIBLE:
        raise InfeasibleProgramError(k, gamma, result.message)
    if not result.success:
        raise NumericalFailureError(
            f"CLIME column {k} failed: {result.message}", shape=sigma_hat.shape
        )
    return result.x[:d] - result.x[d:]


def clime_columns(sigma_hat: ArrayLike, gamma: float, *, threads: int = 1) -> DenseMatrix:
    """Column-wise CLIME solutions before symmetrization."""
    sigma = as_dense(sigma_hat, "sigma_hat")
    if sigma.shape[0] != sigma.shape[1]:
        raise ParameterError(f"sigma_hat must be square, got {sigma.shape}")
    if gamma < 0:
        raise ParameterError(f"gamma must be non-negative, got {gamma}")
    d = sigma.shape[0]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(lambda k: clime_column(sigma, k, gamma), range(d)))
    else:
        cols = [clime_column(sigma, k, gamma) for k in range(d)]
    return np.column_stack(cols)


def symmetrize_min(omega: ArrayLike) -> DenseMatrix:
    """Keep the smaller-magnitude entry of each (j, k), (k, j) pair."""
    arr = np.asarray(omega, dtype=np.float64)
    return np.where(np.abs(arr) <= np.abs(arr.T), arr, arr.T)


def clime(sigma_hat: ArrayLike, gamma: float, *, threads: int = 1) -> DenseMatrix:
    """argmin ||Omega||_{1,1} s.t. ||Sigma_hat Omega - I||_max <= gamma, symmetrized.

    Raises:
        InfeasibleProgramError: Naming the column and gamma when a column
            program has no feasible point.
    """
    omega = clime_columns(sigma_hat, gamma, threads=threads)
    logger.debug(f"CLIME solved {omega.shape[0]} columns at gamma={gamma:.4g}")
    return symmetrize_min(omega)
