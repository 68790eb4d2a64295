"""Configuration and environment handling for htreg."""

import os
from pathlib import Path

from dotenv import load_dotenv


class Config:
    """Central configuration object."""

    def __init__(self):
        # Load .env file if it exists
        env_path = Path(__file__).parent.parent.parent / ".env"
        if env_path.exists():
            load_dotenv(env_path)

        self.project_root = Path(__file__).parent.parent.parent

        # Default location for result files when --out is relative or omitted
        self.results_dir: Path = Path(os.getenv("HTREG_RESULTS_DIR", "results"))
        if not self.results_dir.is_absolute():
            self.results_dir = self.project_root / self.results_dir

        # Logging
        self.log_level: str = os.getenv("HTREG_LOG_LEVEL", "INFO")

        # Replicate workers
        self.threads: int = int(os.getenv("HTREG_THREADS", "1"))

        # Seed used when neither the config file nor --seed provides one
        self.default_seed: int = int(os.getenv("HTREG_DEFAULT_SEED", "20240607"))

    def ensure_directories(self) -> None:
        """Create necessary directories if they don't exist."""
        self.results_dir.mkdir(parents=True, exist_ok=True)


# Global config instance
config = Config()
