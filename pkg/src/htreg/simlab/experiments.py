"""Experiment drivers: replicate grids, parallel execution and record collection.

Every replicate draws from a child stream keyed by (1, noise index, n index,
replicate); the shared ground truth comes from the child stream (0,). Records
are sorted before they are returned, so results depend on (plan, seed) only.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from htreg.core.matrix import DenseMatrix
from htreg.core.rng import RngHandle
from htreg.errors import DegenerateDataError, NumericalFailureError, ParameterError
from htreg.matcomp import McConfig, accumulate_stats, schedule_theorem1, solve_mc, theoretical_slope
from htreg.simlab.generators import generate_mc_data, generate_vicm_data
from htreg.simlab.plans import McPlan, VicmPlan
from htreg.simlab.records import ExperimentRecord, sort_records
from htreg.simlab.targets import make_low_rank_target, make_sparse_directions
from htreg.vicm import (
    VicmConfig,
    direction_distance_detail,
    estimate_vicm,
    power_law_gamma,
    select_lambda,
)

logger = logging.getLogger(__name__)

ReplicateCallback = Callable[[Sequence[ExperimentRecord]], None]

_TaskT = TypeVar("_TaskT")

# Failures confined to one replicate; the run records them and continues.
REPLICATE_FAILURES = (NumericalFailureError, DegenerateDataError)


def _resolve_seed(plan_seed: Optional[int], seed: Optional[int]) -> int:
    chosen = seed if seed is not None else plan_seed
    if chosen is None:
        raise ParameterError("no seed given: set 'seed' in the plan or pass one explicitly")
    return chosen


def _run_tasks(
    tasks: Iterable[_TaskT],
    worker: Callable[[_TaskT], List[ExperimentRecord]],
    threads: int,
    on_replicate: Optional[ReplicateCallback],
) -> List[ExperimentRecord]:
    records: List[ExperimentRecord] = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(worker, tasks)
            for batch in results:
                records.extend(batch)
                if on_replicate:
                    on_replicate(batch)
    else:
        for task in tasks:
            batch = worker(task)
            records.extend(batch)
            if on_replicate:
                on_replicate(batch)
    return sort_records(records)


def _warn_failures(records: Sequence[ExperimentRecord]) -> None:
    failed = sum(1 for rec in records if rec.failed)
    unconverged = sum(1 for rec in records if not rec.converged and not rec.failed)
    if failed:
        logger.warning(f"{failed} of {len(records)} fit(s) failed numerically")
    if unconverged:
        logger.warning(f"{unconverged} of {len(records)} fit(s) did not converge")


# -- matrix completion ------------------------------------------------------


def mc_target(plan: McPlan, seed: int) -> DenseMatrix:
    """Ground truth shared by every replicate of a plan."""
    return make_low_rank_target(RngHandle(seed).child(0), plan.d1, plan.rank, plan.n_vectors)


def mc_theoretical_slopes(plan: McPlan) -> Dict[str, float]:
    """Predicted log-log slope of the robust error per noise tag."""
    return {noise.tag: theoretical_slope(noise.moment_index) for noise in plan.noises}


def _mc_replicate(
    plan: McPlan, theta_star: DenseMatrix, root: RngHandle, task: Tuple[int, int, int]
) -> List[ExperimentRecord]:
    i, m, r = task
    noise = plan.noises[i]
    n = plan.n_grid[m]
    batch = generate_mc_data(root.child(1, i, m, r), theta_star, n, noise.nu, noise.scale)

    budget = plan.max_norm_budget
    if budget is None:
        budget = math.sqrt(plan.d1 * plan.d2) * float(np.abs(theta_star).max())
    cfg = McConfig(
        d1=plan.d1,
        d2=plan.d2,
        rank_bound=plan.rank,
        max_norm_budget=budget,
        moment_index=min(noise.moment_index, 2.0),
        confidence=plan.confidence,
        tau_scale=plan.tau_scale,
        lambda_scale=plan.lambda_scale,
        admm=plan.admm,
    )
    sched = schedule_theorem1(cfg, n, plan.l_alpha, alpha=noise.moment_index)
    tau = plan.tau_value if plan.tau_value is not None else sched.tau
    lam = plan.lambda_value if plan.lambda_value is not None else sched.lambda_

    out: List[ExperimentRecord] = []
    for estimator in plan.estimators:
        level = tau if estimator == "robust" else math.inf
        start = time.perf_counter()
        try:
            stats = accumulate_stats(batch, plan.d1, plan.d2, tau=level)
            sol = solve_mc(stats, cfg, lam)
        except REPLICATE_FAILURES as e:
            logger.warning(
                f"{estimator} fit failed (noise={noise.tag}, n={n}, replicate={r}): {e}"
            )
            error, converged, note = None, False, f"failed: {e}"
        else:
            error = float(np.linalg.norm(sol.estimate - theta_star))
            converged = sol.converged
            note = "" if sol.converged else f"ADMM stopped after {sol.iterations} iterations"
        elapsed = time.perf_counter() - start
        out.append(
            ExperimentRecord(
                experiment_id=plan.experiment_id,
                estimator=estimator,
                noise=noise.tag,
                n=n,
                replicate=r,
                error=error,
                converged=converged,
                tau=level if estimator == "robust" else None,
                lambda_=lam,
                note=note,
                wall_time_s=elapsed if plan.include_timings else None,
            )
        )
    return out


def run_mc_experiment(
    plan: McPlan,
    *,
    seed: Optional[int] = None,
    threads: int = 1,
    on_replicate: Optional[ReplicateCallback] = None,
) -> List[ExperimentRecord]:
    """Robust and standard matrix completion over the (noise, n, replicate) grid.

    ``seed`` overrides ``plan.seed``. Non-converged ADMM runs are kept with
    ``converged=False``; a numerical failure in one replicate is logged and
    recorded with ``error=None`` instead of aborting the run.
    """
    root = RngHandle(_resolve_seed(plan.seed, seed))
    theta_star = mc_target(plan, root.seed)
    tasks = list(
        product(range(len(plan.noises)), range(len(plan.n_grid)), range(plan.replicates))
    )
    logger.info(
        f"mc experiment '{plan.experiment_id}': {len(tasks)} replicate(s), "
        f"d={plan.d1}x{plan.d2}, rank={plan.rank}, threads={threads}"
    )
    records = _run_tasks(
        tasks, lambda t: _mc_replicate(plan, theta_star, root, t), threads, on_replicate
    )
    _warn_failures(records)
    return records


# -- varying index coefficient model ------------------------------------------


def vicm_target(plan: VicmPlan, seed: int) -> DenseMatrix:
    d = plan.design
    return make_sparse_directions(RngHandle(seed).child(0), d.d1, d.d2, d.s)


def _vicm_replicate(
    plan: VicmPlan, theta_star: DenseMatrix, root: RngHandle, task: Tuple[int, int]
) -> List[ExperimentRecord]:
    m, r = task
    n = plan.n_grid[m]
    d1, d2 = plan.design.d1, plan.design.d2
    data, _ = generate_vicm_data(root.child(1, 0, m, r), n, plan.design, theta_star)
    gamma = power_law_gamma(n, d2, plan.gamma_scale)
    base = math.sqrt(math.log(d1 * d2) / n)

    out: List[ExperimentRecord] = []
    for estimator in plan.estimators:
        cfg = VicmConfig(
            d1=d1,
            d2=d2,
            score_kind=plan.resolved_score,
            score_nu=plan.resolved_score_nu,
            clime_gamma=gamma,
            lambda_=plan.lambda_value or 0.0,
            truncate=estimator == "robust",
            tuning=plan.tuning,
            calibration_factor=plan.calibration_factor,
            tau1_scale=plan.tau1_scale,
            tau2_scale=plan.tau2_scale,
        )
        start = time.perf_counter()
        try:
            fit = estimate_vicm(data, cfg)
        except REPLICATE_FAILURES as e:
            logger.warning(f"{estimator} fit failed (n={n}, replicate={r}): {e}")
            out.append(
                ExperimentRecord(
                    experiment_id=plan.experiment_id,
                    estimator=estimator,
                    noise=plan.noise_tag,
                    n=n,
                    replicate=r,
                    converged=False,
                    lambda_=plan.lambda_value,
                    note=f"failed: {e}",
                    wall_time_s=time.perf_counter() - start if plan.include_timings else None,
                )
            )
            continue
        if plan.lambda_value is None:
            lam, theta_hat, _ = select_lambda(
                fit.a_matrix, theta_star, [c * base for c in plan.lambda_grid]
            )
        else:
            lam, theta_hat = plan.lambda_value, fit.theta_hat
        elapsed = time.perf_counter() - start
        dist = direction_distance_detail(theta_hat, theta_star)
        note = ""
        if dist.zero_columns:
            note = "zero columns " + ",".join(str(k) for k in dist.zero_columns)
        out.append(
            ExperimentRecord(
                experiment_id=plan.experiment_id,
                estimator=estimator,
                noise=plan.noise_tag,
                n=n,
                replicate=r,
                error=dist.value,
                lambda_=lam,
                note=note,
                wall_time_s=elapsed if plan.include_timings else None,
            )
        )
    return out


def run_vicm_experiment(
    plan: VicmPlan,
    *,
    seed: Optional[int] = None,
    threads: int = 1,
    on_replicate: Optional[ReplicateCallback] = None,
) -> List[ExperimentRecord]:
    """Robust vs standard direction estimation over the (n, replicate) grid.

    The error is the direction distance rho. Without ``plan.lambda_value``
    the penalty is chosen per replicate from the scaled grid by rho.
    """
    root = RngHandle(_resolve_seed(plan.seed, seed))
    theta_star = vicm_target(plan, root.seed)
    tasks = list(product(range(len(plan.n_grid)), range(plan.replicates)))
    logger.info(
        f"vicm experiment '{plan.experiment_id}': {len(tasks)} replicate(s), "
        f"d1={plan.design.d1}, d2={plan.design.d2}, s={plan.design.s}, threads={threads}"
    )
    records = _run_tasks(
        tasks, lambda t: _vicm_replicate(plan, theta_star, root, t), threads, on_replicate
    )
    _warn_failures(records)
    return records
