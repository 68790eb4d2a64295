"""Experiment commands.

- mc-experiment: matrix completion rates under heavy-tailed noise
- vicm-experiment: robust vs standard direction estimation
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional, Union

import typer

from htreg.cli.app import app, exit_on_error, format_suffix, resolve_out
from htreg.config import config
from htreg.orchestrator import RunManager
from htreg.results import (
    OUTPUT_FORMATS,
    side_path,
    write_report,
    write_result_file,
    write_summary,
)
from htreg.runconfig import McRunConfig, VicmRunConfig, load_run_config
from htreg.simlab import (
    ExperimentRecord,
    ExperimentSummary,
    mc_theoretical_slopes,
    run_mc_experiment,
    run_vicm_experiment,
    summarize_records,
)
from htreg.versioning import create_header

CONFIG_OPTION = typer.Option(None, "--config", "-c", help="TOML configuration file")
SEED_OPTION = typer.Option(None, "--seed", help="Root seed (overrides the config file)")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Result file path")
FORMAT_OPTION = typer.Option(None, "--format", "-f", help="Output format: csv or json-lines")
THREADS_OPTION = typer.Option(None, "--threads", "-t", help="Replicate worker threads")


def _check_format(fmt: Optional[str]) -> None:
    if fmt is not None and fmt not in OUTPUT_FORMATS:
        typer.echo(f"❌ Unknown format '{fmt}' (expected one of: {', '.join(OUTPUT_FORMATS)})", err=True)
        raise typer.Exit(2)


def _echo_summary(summary: ExperimentSummary, out: Path) -> None:
    typer.echo(f"✅ Wrote {out}")
    for g in summary.groups:
        slope = "n/a" if g.slope is None else f"{g.slope:.4f} (R^2 {g.r_squared:.4f})"
        line = f"   {g.estimator:<8} {g.noise:<10} slope {slope}"
        if g.theoretical_slope is not None:
            line += f", predicted {g.theoretical_slope:.4f}"
        if g.non_converged:
            line += f", {g.non_converged} not converged"
        if g.failed:
            line += f", {g.failed} failed"
        typer.echo(line)
    for c in summary.comparison:
        typer.echo(f"   n={c.n:<6} {c.noise:<10} robust {c.robust:.4g} vs standard {c.standard:.4g}")


def _finish(
    run: RunManager,
    cfg: Union[McRunConfig, VicmRunConfig],
    kind: str,
    seed: int,
    records: List[ExperimentRecord],
    out: Path,
    fmt: str,
    theoretical: Optional[dict] = None,
) -> ExperimentSummary:
    header = create_header(
        kind,
        cfg.plan.model_dump(mode="json", by_alias=True),
        seed=seed,
        scale_label=cfg.plan.scale,
    )
    write_result_file(out, header, records, fmt)  # type: ignore[arg-type]
    summary = summarize_records(records, theoretical)
    write_summary(side_path(out, ".summary.json"), summary, header)
    write_report(side_path(out, ".report.md"), summary, header)
    run.save_config(cfg)
    run.log_event("results", "written", path=str(out), records=len(records))
    return summary


@app.command("mc-experiment")
def mc_experiment(
    config_path: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Run the matrix-completion phase-transition experiment."""
    _check_format(fmt)
    with exit_on_error():
        cfg = load_run_config(McRunConfig, config_path)
        if seed is not None:
            cfg.plan.seed = seed
        if cfg.plan.seed is None:
            cfg.plan.seed = config.default_seed
        if fmt is not None:
            cfg.output.format = fmt  # type: ignore[assignment]
        fmt_resolved = cfg.output.format
        path = resolve_out(
            out, cfg.output.path, f"{cfg.plan.experiment_id}{format_suffix(fmt_resolved)}"
        )
        n_threads = threads or cfg.threads or config.threads

        typer.echo(f"📊 mc-experiment '{cfg.plan.experiment_id}' (seed {cfg.plan.seed})")
        with RunManager("mc-experiment", path) as run:
            records = run_mc_experiment(
                cfg.plan, threads=n_threads, on_replicate=run.replicate_done
            )
            summary = _finish(
                run,
                cfg,
                "mc",
                cfg.plan.seed,
                records,
                path,
                fmt_resolved,
                mc_theoretical_slopes(cfg.plan),
            )
    _echo_summary(summary, path)


@app.command("vicm-experiment")
def vicm_experiment(
    config_path: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    out: Optional[Path] = OUT_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Run the robust vs standard direction-estimation experiment."""
    _check_format(fmt)
    with exit_on_error():
        cfg = load_run_config(VicmRunConfig, config_path)
        if seed is not None:
            cfg.plan.seed = seed
        if cfg.plan.seed is None:
            cfg.plan.seed = config.default_seed
        if fmt is not None:
            cfg.output.format = fmt  # type: ignore[assignment]
        fmt_resolved = cfg.output.format
        path = resolve_out(
            out, cfg.output.path, f"{cfg.plan.experiment_id}{format_suffix(fmt_resolved)}"
        )
        n_threads = threads or cfg.threads or config.threads

        typer.echo(f"📊 vicm-experiment '{cfg.plan.experiment_id}' (seed {cfg.plan.seed})")
        with RunManager("vicm-experiment", path) as run:
            records = run_vicm_experiment(
                cfg.plan, threads=n_threads, on_replicate=run.replicate_done
            )
            summary = _finish(run, cfg, "vicm", cfg.plan.seed, records, path, fmt_resolved)
    _echo_summary(summary, path)
