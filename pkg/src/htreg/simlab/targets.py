"""Ground-truth parameters for the simulation designs."""

from __future__ import annotations

import numpy as np

from htreg.core.matrix import DenseMatrix, sym_eig
from htreg.core.rng import RngHandle
from htreg.errors import ParameterError


def make_low_rank_target(
    rng: RngHandle, d: int, r: int = 5, n_vectors: int = 100
) -> DenseMatrix:
    """Theta* = V V^T / sqrt(r), V the top-r eigenvectors of a sample covariance.

    The covariance is computed from ``n_vectors`` standard Gaussian vectors
    in R^d. The result is symmetric, rank r and has unit Frobenius norm.
    """
    if d < r:
        raise ParameterError(f"dimension d={d} must be at least the rank r={r}")
    if n_vectors < 2:
        raise ParameterError("need at least 2 Gaussian vectors for a sample covariance")
    g = rng.generator.standard_normal((n_vectors, d))
    cov = np.cov(g, rowvar=False).reshape(d, d)
    _, vectors = sym_eig(cov)
    top = vectors[:, -r:]
    theta = top @ top.T / np.sqrt(r)
    return (theta + theta.T) / 2.0


def make_sparse_directions(rng: RngHandle, d1: int, d2: int, s: int) -> DenseMatrix:
    """Columns with s random support entries equal to +-1/sqrt(s) (unit norm)."""
    if not 1 <= s <= d1:
        raise ParameterError(f"sparsity s={s} must lie in [1, d1={d1}]")
    theta = np.zeros((d1, d2))
    for k in range(d2):
        support = rng.generator.choice(d1, size=s, replace=False)
        signs = rng.generator.choice(np.array([-1.0, 1.0]), size=s)
        theta[support, k] = signs / np.sqrt(s)
    return theta


def banded_precision(d: int, base: float = 0.5) -> DenseMatrix:
    """(Omega)_{ij} = base^{|i - j|}."""
    idx = np.arange(d)
    return base ** np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
