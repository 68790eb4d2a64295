"""CLI app setup and common utilities.

This module creates the main Typer app and provides the shared helpers
used by all commands: logging setup, output path resolution and the
mapping from failures to exit codes.
"""

from __future__ import annotations

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import typer
from pydantic import ValidationError
from typer import Typer

from htreg.config import config
from htreg.errors import (
    DegenerateDataError,
    NumericalFailureError,
    ParameterError,
)

# Exit codes
EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

# Initialize Typer app
app = Typer(
    name="htreg",
    help="Robust estimators for heavy-tailed regression: matrix completion and varying index coefficient models.",
    no_args_is_help=True,
)

_console_handler: Optional[logging.Handler] = None


def configure_logging(level: str) -> None:
    """Route package logs to stderr at ``level``.

    The handler carries the level so that run log files can still record
    DEBUG messages.
    """
    global _console_handler
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        typer.echo(f"❌ Unknown log level: {level}", err=True)
        raise typer.Exit(EXIT_INVALID)
    logger = logging.getLogger("htreg")
    logger.setLevel(logging.DEBUG)
    if _console_handler is not None:
        logger.removeHandler(_console_handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(numeric)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.addHandler(handler)
    _console_handler = handler


@contextmanager
def exit_on_error() -> Iterator[None]:
    """Translate library failures into messages and exit codes.

    Invalid input (configuration, parameters, data files) exits with 2;
    numerical failures and degenerate data exit with 3.
    """
    try:
        yield
    except (NumericalFailureError, DegenerateDataError) as e:
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(EXIT_NUMERICAL)
    except (ParameterError, ValidationError, FileNotFoundError) as e:
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(EXIT_INVALID)


def resolve_out(out: Optional[Path], configured: Optional[Path], default_name: str) -> Path:
    """--out wins over the config file, which wins over the results directory."""
    if out is not None:
        return out
    if configured is not None:
        return configured
    config.ensure_directories()
    return config.results_dir / default_name


def format_suffix(fmt: str) -> str:
    return ".csv" if fmt == "csv" else ".jsonl"


@app.callback()
def init_app(
    log_level: str = typer.Option(
        config.log_level,
        "--log-level",
        help="Logging level for messages on stderr (DEBUG, INFO, WARNING, ERROR)",
        envvar="HTREG_LOG_LEVEL",
    ),
):
    """Robust estimators for heavy-tailed regression.

    Experiments write a result file plus <stem>.summary.json,
    <stem>.report.md, <stem>.config.toml, <stem>.log and
    <stem>.events.jsonl next to it.
    """
    configure_logging(log_level)
