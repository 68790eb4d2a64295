"""Data and result-file utilities.

- generate-vicm-data: write a synthetic sample file for calibrate
- validate-results: re-parse a result file and check its schema
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import typer

from htreg.cli.app import EXIT_INVALID, app, exit_on_error, resolve_out
from htreg.config import config
from htreg.core.rng import RngHandle
from htreg.datafile import write_vicm_file
from htreg.runconfig import DataRunConfig, load_run_config, validate_config
from htreg.simlab.generators import generate_vicm_data
from htreg.validate import validate_result_file


@app.command("generate-vicm-data")
def generate_vicm_data_cmd(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="TOML configuration file"),
    n: Optional[int] = typer.Option(None, "--n", help="Number of samples"),
    d1: Optional[int] = typer.Option(None, "--d1", help="Dimension of X"),
    d2: Optional[int] = typer.Option(None, "--d2", help="Dimension of Z"),
    s: Optional[int] = typer.Option(None, "--s", help="Nonzeros per direction"),
    battery: Optional[str] = typer.Option(None, "--battery", help="Link battery: nonlinear or linear"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Root seed (overrides the config file)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Data file path"),
):
    """Write synthetic (y, X, Z) samples in the calibrate input format."""
    with exit_on_error():
        cfg = load_run_config(DataRunConfig, config_path)
        design = {k: v for k, v in {"d1": d1, "d2": d2, "s": s, "battery": battery}.items() if v is not None}
        raw = cfg.model_dump()
        raw["design"] = {**raw["design"], **design}
        if n is not None:
            raw["n"] = n
        if seed is not None:
            raw["seed"] = seed
        cfg = validate_config(DataRunConfig, raw, config_path)

        root_seed = cfg.seed if cfg.seed is not None else config.default_seed
        data, _ = generate_vicm_data(RngHandle(root_seed), cfg.n, cfg.design)
        path = resolve_out(out, cfg.path, f"vicm_n{cfg.n}_seed{root_seed}.txt")
        write_vicm_file(path, data)
    typer.echo(f"✅ Wrote {cfg.n} samples (d1={cfg.design.d1}, d2={cfg.design.d2}) to {path}")


@app.command("validate-results")
def validate_results(
    path: Path = typer.Argument(..., help="Result file to check"),
):
    """Re-parse a result file and verify header, schema and ordering."""
    result = validate_result_file(path)
    typer.echo(str(result))
    if not result.is_valid:
        raise typer.Exit(EXIT_INVALID)
