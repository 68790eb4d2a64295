"""Run management and logging for htreg command-line runs."""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from pydantic import BaseModel

from htreg.results import side_path
from htreg.runconfig import dump_resolved_config
from htreg.simlab.records import ExperimentRecord


class RunManager:
    """Side files of one run: a text log and a JSON-lines event log.

    Both live next to the result file (``<stem>.log`` and
    ``<stem>.events.jsonl``) and are the only outputs that carry wall-clock
    timestamps.
    """

    def __init__(self, command: str, out_path: Path):
        """Initialize a new run session.

        Args:
            command: Command name (e.g., 'mc-experiment', 'calibrate')
            out_path: Main result file; side files are derived from its stem
        """
        self.command = command
        self.out_path = Path(out_path)
        self.timestamp = datetime.now(timezone.utc)
        self.out_path.parent.mkdir(parents=True, exist_ok=True)

        self.log_path = side_path(self.out_path, ".log")
        self.events_path = side_path(self.out_path, ".events.jsonl")
        self.events_path.write_text("", encoding="utf-8")
        self._handler: Optional[logging.Handler] = None
        self.logger = self._setup_logger()
        self.replicates_done = 0

    def _setup_logger(self) -> logging.Logger:
        """Attach a file handler to the package logger for this run."""
        logger = logging.getLogger("htreg")
        logger.setLevel(logging.DEBUG)

        handler = logging.FileHandler(self.log_path, mode="w", encoding="utf-8")
        handler.setLevel(logging.DEBUG)
        formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        self._handler = handler
        return logger

    def log_event(self, event: str, status: str, **details: Any) -> None:
        """Append one event to the JSON-lines log."""
        entry: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "command": self.command,
            "event": event,
            "status": status,
        }
        entry.update(details)
        with open(self.events_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, default=str) + "\n")
        self.logger.info(f"[{event}] {status}")

    def replicate_done(self, records: Sequence[ExperimentRecord]) -> None:
        """Progress callback for the experiment drivers."""
        self.replicates_done += 1
        if not records:
            return
        first = records[0]
        self.log_event(
            "replicate",
            "done",
            noise=first.noise,
            n=first.n,
            replicate=first.replicate,
            errors={r.estimator: r.error for r in records},
            converged=all(r.converged for r in records),
        )

    def save_config(self, model: BaseModel) -> Path:
        """Write the resolved configuration as ``<stem>.config.toml``."""
        path = dump_resolved_config(model, side_path(self.out_path, ".config.toml"))
        self.logger.info(f"Saved resolved config: {path}")
        return path

    def close(self) -> None:
        if self._handler is not None:
            self._handler.close()
            self.logger.removeHandler(self._handler)
            self._handler = None

    def __enter__(self) -> "RunManager":
        self.log_event("run", "started", out=str(self.out_path))
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc is None:
            self.log_event("run", "completed", replicates=self.replicates_done)
        else:
            self.log_event("run", "failed", error=str(exc))
        self.close()
