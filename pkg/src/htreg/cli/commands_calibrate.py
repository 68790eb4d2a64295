"""Truncation-level calibration command."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np
import typer

from htreg.cli.app import app, exit_on_error, format_suffix, resolve_out
from htreg.cli.commands_experiment import (
    CONFIG_OPTION,
    FORMAT_OPTION,
    OUT_OPTION,
    THREADS_OPTION,
    _check_format,
)
from htreg.config import config
from htreg.datafile import read_vicm_file
from htreg.orchestrator import RunManager
from htreg.results import calibration_rows, write_result_file
from htreg.runconfig import CalibrateRunConfig, load_run_config
from htreg.transforms import calibrate_vicm_levels
from htreg.versioning import create_header


@app.command("calibrate")
def calibrate(
    data_path: Path = typer.Argument(..., help="VICM data file ('d1=<int> d2=<int>' header)"),
    config_path: Optional[Path] = CONFIG_OPTION,
    target1: Optional[float] = typer.Option(None, "--target1", help="Target for Gamma_1 (default factor*log(d1*d2))"),
    target2: Optional[float] = typer.Option(None, "--target2", help="Target for Gamma_2 (default factor*log(d2))"),
    factor: Optional[float] = typer.Option(None, "--factor", help="Multiplier of the default targets"),
    score: Optional[str] = typer.Option(None, "--score", help="Score of X: gaussian or student_t"),
    score_nu: Optional[float] = typer.Option(None, "--score-nu", help="Degrees of freedom of the student_t score"),
    out: Optional[Path] = OUT_OPTION,
    fmt: Optional[str] = FORMAT_OPTION,
    threads: Optional[int] = THREADS_OPTION,
):
    """Solve the adaptive truncation equations for Gamma_1 and Gamma_2.

    Writes one row per matrix entry with its level, equation residual and
    saturation flag.
    """
    _check_format(fmt)
    with exit_on_error():
        cfg = load_run_config(CalibrateRunConfig, config_path)
        overrides = {
            "target1": target1,
            "target2": target2,
            "factor": factor,
            "score_kind": score,
            "score_nu": score_nu,
        }
        updates = {k: v for k, v in overrides.items() if v is not None}
        if fmt is not None:
            updates["output"] = cfg.output.model_copy(update={"format": fmt})
        cfg = CalibrateRunConfig.model_validate({**cfg.model_dump(), **updates})

        data = read_vicm_file(data_path)
        path = resolve_out(
            out, cfg.output.path, f"{data_path.stem}.levels{format_suffix(cfg.output.format)}"
        )
        typer.echo(f"📐 Calibrating {data_path} (n={data.n}, d1={data.d1}, d2={data.d2})")
        with RunManager("calibrate", path) as run:
            levels = calibrate_vicm_levels(
                data,
                cfg.score_kind,
                score_nu=cfg.score_nu,
                target1=cfg.target1,
                target2=cfg.target2,
                factor=cfg.factor,
                threads=threads or cfg.threads or config.threads,
            )
            resolved = cfg.model_dump(mode="json", exclude={"output", "threads"})
            resolved.update(
                data_file=data_path.name,
                n=data.n,
                d1=data.d1,
                d2=data.d2,
                target1=levels.target1,
                target2=levels.target2,
            )
            header = create_header("calibration", resolved)
            write_result_file(path, header, calibration_rows(levels), cfg.output.format)
            run.log_event("results", "written", path=str(path))

    saturated = int(np.sum(levels.saturated1) + np.sum(levels.saturated2))
    typer.echo(f"✅ Wrote {path}")
    typer.echo(f"   target1={levels.target1:.4g}, max residual {float(levels.residual1.max()):.3g}")
    typer.echo(f"   target2={levels.target2:.4g}, max residual {float(levels.residual2.max()):.3g}")
    if saturated:
        typer.echo(f"   ⚠️  {saturated} saturated entr{'y' if saturated == 1 else 'ies'} (target >= nonzero count)")
