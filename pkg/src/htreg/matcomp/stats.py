"""Sufficient statistics of matrix-completion samples."""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from htreg.errors import DataError, ParameterError, ShapeError
from htreg.matcomp.models import McBatch, McSample, McSufficientStats


def accumulate_stats(
    samples: Union[McBatch, Sequence[McSample]],
    d1: int,
    d2: int,
    tau: float = math.inf,
) -> McSufficientStats:
    """Single pass over the data: counts N[j, k] and sums T[j, k] of psi_tau(y).

    ``tau=inf`` gives the untruncated statistics of the standard procedure.

    Raises:
        ParameterError: If tau is not positive.
        DataError: If a cell index is out of range (with the sample position).
    """
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    batch = McBatch.coerce(samples)
    for name, idx, bound in (("row", batch.rows, d1), ("col", batch.cols, d2)):
        bad = np.flatnonzero((idx < 0) | (idx >= bound))
        if bad.size:
            pos = int(bad[0])
            raise DataError(f"{name} index {int(idx[pos])} outside [0, {bound})", position=pos)

    flat = batch.rows * d2 + batch.cols
    clipped = np.clip(batch.responses, -tau, tau)
    counts = np.bincount(flat, minlength=d1 * d2).astype(np.float64)
    sums = np.bincount(flat, weights=clipped, minlength=d1 * d2)
    return McSufficientStats(
        counts=counts.reshape(d1, d2),
        truncated_sums=sums.reshape(d1, d2),
        n=len(batch),
        tau=float(tau),
    )


def merge_stats(a: McSufficientStats, b: McSufficientStats) -> McSufficientStats:
    """Combine statistics accumulated on disjoint shards of the same sample."""
    if a.shape != b.shape:
        raise ShapeError(f"cannot merge stats of shapes {a.shape} and {b.shape}")
    if a.tau != b.tau:
        raise ParameterError(f"cannot merge stats truncated at {a.tau} and {b.tau}")
    return McSufficientStats(
        counts=a.counts + b.counts,
        truncated_sums=a.truncated_sums + b.truncated_sums,
        n=a.n + b.n,
        tau=a.tau,
    )
