from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import structlog

from cli.config.models import RunConfig


@dataclass
class Context:
    """
    Context class represents everything a subcommand needs for one run.

    Attributes:
        logger: structlog logger
        run_id: string run ID
        subcommand: name of the subcommand being run
        config: validated run configuration
    """

    logger: structlog.stdlib.BoundLogger
    run_id: str
    subcommand: str
    config: RunConfig

    @property
    def out(self) -> Optional[Path]:
        """Output path, or None for standard output."""
        return Path(self.config.out) if self.config.out else None
