"""Test configuration and fixtures."""

import gc
import logging
from pathlib import Path
from tempfile import TemporaryDirectory
from typing import Generator

import numpy as np
import pytest

from htreg.core.rng import RngHandle


def _close_loggers():
    """Close file handlers left on the package logger by run managers."""
    logger = logging.getLogger("htreg")
    for handler in logger.handlers[:]:
        if isinstance(handler, logging.FileHandler):
            handler.close()
            logger.removeHandler(handler)


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Provide a temporary directory for result files."""
    with TemporaryDirectory(ignore_cleanup_errors=True) as tmpdir:
        try:
            yield Path(tmpdir)
        finally:
            _close_loggers()
            gc.collect()


@pytest.fixture
def temp_results_dir() -> Generator[Path, None, None]:
    """Point htreg.config.config.results_dir at a temporary directory."""
    import htreg.config

    original = htreg.config.config.results_dir
    with TemporaryDirectory(ignore_cleanup_errors=True) as tmpdir:
        temp_path = Path(tmpdir)
        htreg.config.config.results_dir = temp_path
        try:
            yield temp_path
        finally:
            htreg.config.config.results_dir = original
            _close_loggers()
            gc.collect()


@pytest.fixture
def rng() -> RngHandle:
    """Seeded random stream."""
    return RngHandle(12345)


@pytest.fixture
def np_rng() -> np.random.Generator:
    """Plain numpy generator for building test inputs."""
    return np.random.default_rng(2024)
