"""Synthetic data, experiment plans and drivers, and rate fitting."""

from htreg.simlab.experiments import (
    mc_target,
    mc_theoretical_slopes,
    run_mc_experiment,
    run_vicm_experiment,
    vicm_target,
)
from htreg.simlab.generators import VicmDesign, generate_mc_data, generate_vicm_data
from htreg.simlab.links import available_batteries, links_for, register_battery
from htreg.simlab.plans import (
    FULL_SCALE,
    McPlan,
    NoiseSpec,
    VicmPlan,
    apply_scale_preset,
    load_plan,
)
from htreg.simlab.records import (
    ERROR_FLOOR,
    ComparisonRow,
    ExperimentRecord,
    ExperimentSummary,
    GroupSummary,
    SlopeFit,
    fit_loglog_slope,
    fit_power_law,
    mean_errors,
    sort_records,
    summarize_records,
)
from htreg.simlab.targets import banded_precision, make_low_rank_target, make_sparse_directions

__all__ = [
    "ERROR_FLOOR",
    "ComparisonRow",
    "ExperimentRecord",
    "ExperimentSummary",
    "FULL_SCALE",
    "GroupSummary",
    "McPlan",
    "NoiseSpec",
    "SlopeFit",
    "VicmDesign",
    "VicmPlan",
    "apply_scale_preset",
    "available_batteries",
    "banded_precision",
    "fit_loglog_slope",
    "fit_power_law",
    "generate_mc_data",
    "generate_vicm_data",
    "links_for",
    "load_plan",
    "make_low_rank_target",
    "make_sparse_directions",
    "mc_target",
    "mc_theoretical_slopes",
    "mean_errors",
    "register_battery",
    "run_mc_experiment",
    "run_vicm_experiment",
    "sort_records",
    "summarize_records",
    "vicm_target",
]
