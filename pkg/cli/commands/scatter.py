"""Norm report of the scattering operator and its inverse."""
from cli.commands.norms import report_norms
from lib.cli.context import Context
from lib.wave.scattering import scattering_handle

NAME = "scatter"
HELP = "norm report of S = W+ W-^-1 and S^-1"


def run(context: Context) -> int:
    config = context.config
    handles = [
        scattering_handle(
            config.grid_spec,
            config.model,
            inverse=inverse,
            tol=config.horizon_tol,
            horizon_cap=config.horizon_cap,
            density=config.nodes_per_unit,
        )
        for inverse in (False, True)
    ]
    return report_norms(context, handles)
