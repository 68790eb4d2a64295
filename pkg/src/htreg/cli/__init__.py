"""CLI package for htreg.

The Typer app is created in app.py; importing the command modules below
registers their commands with it.
"""

import htreg.cli.commands_calibrate  # noqa: F401, E402
import htreg.cli.commands_data  # noqa: F401, E402
import htreg.cli.commands_experiment  # noqa: F401, E402
from htreg.cli.app import app

__all__ = ["app"]
