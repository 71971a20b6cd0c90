"""Solve the damped wave equation for random data."""
from lib.cli.context import Context
from lib.cli.csv_output import data_header
from lib.cli.csv_output import data_rows
from lib.cli.csv_output import write_csv
from lib.cli.random_data import random_data
from lib.wave.dyson_series import TimeMesh
from lib.wave.dyson_series import propagate_physical
from lib.wave.reference_solver import strang_solve
from lib.wave.spectral_core import energy_norm
from lib.wave.spectral_core import lift_data

NAME = "solve"
HELP = "propagate random data from t_start to t_end (series and Strang)"


def run(context: Context) -> int:
    """Write both solutions at t_end, one row per grid point.

    Args:
        context: Run context

    Returns:
        Exit status
    """
    config = context.config
    grid, model = config.grid_spec, config.model
    data = random_data(grid, config.seed)
    mesh = TimeMesh.build(
        config.t_start,
        config.t_end,
        model=model,
        grid=grid,
        density=config.nodes_per_unit,
        rule=config.quadrature,
    )
    series = propagate_physical(
        config.t_start,
        config.t_end,
        data,
        model,
        mesh,
        config.series_tol,
        config.max_terms,
    )
    strang = strang_solve(
        config.t_start,
        config.t_end,
        data,
        model,
        config.strang_dt,
    )
    gap = energy_norm(lift_data(*series) - lift_data(*strang))
    context.logger.info("Solutions computed", series_vs_strang=gap)
    write_csv(
        context.out,
        data_header(grid.dimension),
        data_rows(series, strang),
    )
    return 0
