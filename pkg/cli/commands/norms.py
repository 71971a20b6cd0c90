"""Shared norm report for the waveop and scatter subcommands."""
from typing import List

from lib.cli.context import Context
from lib.cli.csv_output import NORM_HEADER
from lib.cli.csv_output import write_csv
from lib.wave.scattering import DENSE_LIMIT
from lib.wave.scattering import NormMode
from lib.wave.scattering import OperatorHandle
from lib.wave.scattering import operator_norm_estimate


def report_norms(context: Context, handles: List[OperatorHandle]) -> int:
    """Estimate each handle's norm and write the norm report.

    Grids up to the dense limit are assembled; larger ones use power
    iteration.

    Args:
        context: Run context
        handles: Handles to measure

    Returns:
        Exit status
    """
    grid = context.config.grid_spec
    mode = (
        NormMode.DENSE_ASSEMBLY
        if grid.size <= DENSE_LIMIT
        else NormMode.POWER_ITERATION
    )
    rows = []
    for handle in handles:
        estimate = operator_norm_estimate(
            handle,
            grid,
            mode,
            context.config.seed,
        )
        context.logger.info(
            "Norm estimated",
            handle=handle.name,
            horizon=handle.horizon,
            truncation_bound=handle.truncation_bound,
            estimate=estimate,
        )
        rows.append([handle.name, grid.label, mode.value, estimate])
    write_csv(context.out, NORM_HEADER, rows)
    return 0
