"""Convergence rate of the damped evolution to its free asymptote."""
from lib.cli.context import Context
from lib.cli.csv_output import RATE_HEADER
from lib.cli.csv_output import rate_rows
from lib.cli.csv_output import write_csv
from lib.cli.random_data import random_data
from lib.wave.scattering import loglog_slope
from lib.wave.scattering import rate_sweep

NAME = "rate"
HELP = "rate table err_E(t) against the tail integral"


def run(context: Context) -> int:
    """Sweep the configured times and write the rate table.

    Args:
        context: Run context

    Returns:
        Exit status
    """
    config = context.config
    data = random_data(config.grid_spec, config.seed)
    rows = rate_sweep(data, config.model, config.times, config.nodes_per_unit)
    if sum(row.err > 0 for row in rows) >= 2:
        context.logger.info("Rate slope measured", slope=loglog_slope(rows))
    write_csv(context.out, RATE_HEADER, rate_rows(rows))
    return 0
