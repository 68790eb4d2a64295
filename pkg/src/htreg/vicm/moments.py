"""Element-wise truncated moment matrices."""

from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np

from htreg.core.matrix import DenseMatrix
from htreg.errors import ShapeError
from htreg.transforms import TruncationMatrix
from htreg.vicm.models import VicmData, VicmSample
from htreg.vicm.score import score_matrix


def truncated_cross_moment(
    samples: Union[VicmData, Sequence[VicmSample]],
    levels: Optional[TruncationMatrix],
    score_kind: str = "gaussian",
    *,
    score_nu: float = 5.0,
) -> DenseMatrix:
    """(1/n) sum_i psi_{Gamma_1}(y_i S(X_i) Z_i^T), entry-wise.

    ``levels=None`` returns the raw empirical mean (no truncation).
    """
    data = VicmData.coerce(samples)
    sx = score_matrix(data.x, score_kind, nu=score_nu)
    yz = data.y[:, None] * data.z
    if levels is None:
        return (sx.T @ yz) / data.n
    if levels.shape != (data.d1, data.d2):
        raise ShapeError(f"levels {levels.shape} do not match (d1, d2) = ({data.d1}, {data.d2})")
    out = np.empty((data.d1, data.d2))
    # Row by row keeps memory at O(n * d2)
    for j in range(data.d1):
        bound = levels.levels[j]
        out[j] = np.clip(sx[:, j, None] * yz, -bound, bound).mean(axis=0)
    return out


def truncated_covariance(
    samples: Union[VicmData, Sequence[VicmSample]],
    levels: Optional[TruncationMatrix],
) -> DenseMatrix:
    """(1/n) sum_i psi_{Gamma_2}(z_i z_i^T), symmetrized as (A + A^T) / 2."""
    data = VicmData.coerce(samples)
    if levels is None:
        raw = (data.z.T @ data.z) / data.n
    else:
        if levels.shape != (data.d2, data.d2):
            raise ShapeError(f"levels {levels.shape} do not match (d2, d2) = ({data.d2}, {data.d2})")
        products = data.z[:, :, None] * data.z[:, None, :]
        raw = np.clip(products, -levels.levels, levels.levels).mean(axis=0)
    return (raw + raw.T) / 2.0
