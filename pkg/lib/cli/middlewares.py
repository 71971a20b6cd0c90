import uuid

import structlog

from cli.config.models import RunConfig
from lib.cli.context import Context


def create_context(subcommand: str, config: RunConfig) -> Context:
    """
    Create the run context and bind run context variables to the logger.

    Args:
        subcommand: Name of the subcommand
        config: Validated run configuration

    Returns:
        Context: context of this run
    """
    # Generate run ID
    run_id = uuid.uuid4().hex

    # Bind vars to structlog logger
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(
        run_id=run_id,
        subcommand=subcommand,
        seed=config.seed,
        grid=config.grid,
        profile=config.profile,
    )

    return Context(
        logger=structlog.get_logger("wave_toolkit"),
        run_id=run_id,
        subcommand=subcommand,
        config=config,
    )
