"""Seeded random streams and heavy-tailed samplers.

Streams use numpy's PCG64 bit generator seeded through ``SeedSequence``.
Child streams are keyed by integer tuples (for example
``(noise_index, n_index, replicate)``) so parallel replicates draw the
same numbers regardless of scheduling order.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from htreg.core.matrix import as_dense
from htreg.errors import NumericalFailureError, ParameterError

RNG_ALGORITHM = "PCG64"


class RngHandle:
    """Single-owner random stream.

    Identical seeds (and keys) give bit-identical draws across runs.
    """

    def __init__(self, seed: int, key: Tuple[int, ...] = ()):
        if seed < 0 or seed >= 2**64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, *key: int) -> "RngHandle":
        """Independent stream keyed by ``key``; does not consume draws from self."""
        return RngHandle(self.seed, self.key + tuple(key))

    def __repr__(self) -> str:
        return f"RngHandle(seed={self.seed}, key={self.key})"


def sample_student_t(rng: RngHandle, nu: float, scale: float, count: int) -> NDArray[np.float64]:
    """Draw ``count`` i.i.d. values of ``scale * t_nu``.

    Each draw is a standard normal divided by sqrt(chi2(nu) / nu).
    """
    if nu <= 0:
        raise ParameterError(f"nu must be positive, got {nu}")
    if scale <= 0:
        raise ParameterError(f"scale must be positive, got {scale}")
    if count < 0:
        raise ParameterError(f"count must be non-negative, got {count}")
    g = rng.generator.standard_normal(count)
    w = rng.generator.chisquare(nu, count)
    return scale * g / np.sqrt(w / nu)


def precision_cholesky(precision: ArrayLike) -> NDArray[np.float64]:
    """Lower Cholesky factor L of a symmetric positive definite precision matrix."""
    arr = as_dense(precision, "precision")
    if arr.shape[0] != arr.shape[1]:
        raise ParameterError(f"precision must be square, got {arr.shape}")
    if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(arr).max())):
        raise ParameterError("precision must be symmetric")
    try:
        return np.linalg.cholesky(arr)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(
            "precision matrix is not positive definite", shape=arr.shape
        ) from e


def sample_multivariate_t(
    rng: RngHandle,
    nu: float,
    precision: ArrayLike,
    count: int | None = None,
) -> NDArray[np.float64]:
    """Multivariate t draws whose scale matrix is ``precision^{-1}``.

    Returns ``L^{-T} g * sqrt(nu / w)`` with ``L L^T = precision``, ``g``
    standard normal and ``w ~ chi2(nu)``. With ``count=None`` a single
    vector is returned, otherwise a ``(count, d)`` array.
    """
    if nu <= 0:
        raise ParameterError(f"nu must be positive, got {nu}")
    chol = precision_cholesky(precision)
    d = chol.shape[0]
    rows = 1 if count is None else int(count)
    g = rng.generator.standard_normal((d, rows))
    w = rng.generator.chisquare(nu, rows)
    # Solve L^T x = g column-wise
    x = np.linalg.solve(chol.T, g) * np.sqrt(nu / w)
    out = x.T
    return out[0] if count is None else out
