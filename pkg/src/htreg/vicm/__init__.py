"""Robust direction estimation for varying index coefficient models."""

from htreg.vicm.clime import clime, clime_columns, symmetrize_min
from htreg.vicm.estimator import (
    DirectionDistance,
    direction_distance,
    direction_distance_detail,
    estimate_vicm,
    power_law_gamma,
    power_law_levels,
    select_lambda,
    theorem2_bounds,
    theorem2_lambda,
)
from htreg.vicm.models import VicmConfig, VicmData, VicmFit, VicmSample
from htreg.vicm.moments import truncated_covariance, truncated_cross_moment
from htreg.vicm.score import available_scores, register_score, score, score_matrix

__all__ = [
    "DirectionDistance",
    "VicmConfig",
    "VicmData",
    "VicmFit",
    "VicmSample",
    "available_scores",
    "clime",
    "clime_columns",
    "direction_distance",
    "direction_distance_detail",
    "estimate_vicm",
    "power_law_gamma",
    "power_law_levels",
    "register_score",
    "score",
    "score_matrix",
    "select_lambda",
    "symmetrize_min",
    "theorem2_bounds",
    "theorem2_lambda",
    "truncated_covariance",
    "truncated_cross_moment",
]
