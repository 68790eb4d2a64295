"""Synthetic data for matrix completion and varying index coefficient models."""

from __future__ import annotations

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from htreg.core.matrix import DenseMatrix, as_dense
from htreg.core.rng import RngHandle, sample_multivariate_t, sample_student_t
from htreg.errors import ParameterError, ShapeError
from htreg.matcomp.models import McBatch
from htreg.simlab.links import links_for
from htreg.simlab.targets import banded_precision, make_sparse_directions
from htreg.vicm.models import VicmData


def generate_mc_data(
    rng: RngHandle,
    theta_star: DenseMatrix,
    n: int,
    nu: float,
    scale: float,
) -> McBatch:
    """Uniformly sampled cells with y = sqrt(d1 d2) Theta*[j, k] + scale * t_nu.

    ``scale=0`` gives noiseless responses.
    """
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if scale < 0:
        raise ParameterError(f"noise scale must be non-negative, got {scale}")
    theta = as_dense(theta_star, "theta_star")
    d1, d2 = theta.shape
    cells = rng.generator.integers(0, d1 * d2, size=n)
    rows, cols = np.divmod(cells, d2)
    responses = math.sqrt(d1 * d2) * theta[rows, cols]
    if scale > 0:
        responses = responses + sample_student_t(rng, nu, scale, n)
    return McBatch(rows=rows.astype(np.int64), cols=cols.astype(np.int64), responses=responses)


class VicmDesign(BaseModel):
    """Synthetic varying index coefficient design."""

    model_config = ConfigDict(extra="forbid")

    d1: int = Field(default=200, ge=1)
    d2: int = Field(default=9, ge=1)
    s: int = Field(default=5, ge=1)
    battery: str = "nonlinear"
    design: Literal["student_t", "gaussian"] = "student_t"
    x_nu: float = Field(default=5.0, gt=0)
    z_nu: float = Field(default=5.0, gt=0)
    noise_nu: float = Field(default=5.0, gt=0)
    noise_scale: float = Field(default=1.0, ge=0)
    precision_base: float = Field(default=0.5, gt=-1, lt=1)
    # independent Gaussian Z instead of multivariate t
    z_gaussian: bool = False

    @model_validator(mode="after")
    def _sparsity(self) -> "VicmDesign":
        if self.s > self.d1:
            raise ValueError(f"s={self.s} exceeds d1={self.d1}")
        return self

    def z_precision(self) -> DenseMatrix:
        return banded_precision(self.d2, self.precision_base)


def generate_vicm_data(
    rng: RngHandle,
    n: int,
    design: VicmDesign,
    theta_star: Optional[DenseMatrix] = None,
) -> tuple[VicmData, DenseMatrix]:
    """y = sum_k z_k f_k(<X, theta*_k>) + eps.

    X has i.i.d. t_{x_nu} (or standard normal) entries, Z is multivariate
    t_{z_nu} with precision (Omega)_{ij} = base^{|i-j|}, eps is
    noise_scale * t_{noise_nu}. When ``theta_star`` is omitted it is drawn
    from ``rng`` with s-sparse unit columns.
    """
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if theta_star is None:
        theta_star = make_sparse_directions(rng, design.d1, design.d2, design.s)
    theta = as_dense(theta_star, "theta_star")
    if theta.shape != (design.d1, design.d2):
        raise ShapeError(f"theta_star {theta.shape} does not match ({design.d1}, {design.d2})")

    if design.design == "gaussian":
        x = rng.generator.standard_normal((n, design.d1))
    else:
        x = sample_student_t(rng, design.x_nu, 1.0, n * design.d1).reshape(n, design.d1)
    if design.z_gaussian:
        chol_cov = np.linalg.cholesky(np.linalg.inv(design.z_precision()))
        z = rng.generator.standard_normal((n, design.d2)) @ chol_cov.T
    else:
        z = sample_multivariate_t(rng, design.z_nu, design.z_precision(), count=n)

    index = x @ theta
    links = links_for(design.battery, design.d2)
    signal = np.column_stack([f(index[:, k]) for k, f in enumerate(links)])
    y = np.sum(z * signal, axis=1)
    if design.noise_scale > 0:
        y = y + sample_student_t(rng, design.noise_nu, design.noise_scale, n)
    return VicmData(y=y, x=x, z=z), theta
