"""Norm report of the wave operators."""
from cli.commands.norms import report_norms
from lib.cli.context import Context
from lib.wave.scattering import Sign
from lib.wave.scattering import wave_operator_handle

NAME = "waveop"
HELP = "norm report of W+, W+^-1, W- and W-^-1"


def run(context: Context) -> int:
    config = context.config
    handles = [
        wave_operator_handle(
            sign,
            config.grid_spec,
            config.model,
            config.horizon_tol,
            horizon_cap=config.horizon_cap,
            density=config.nodes_per_unit,
            inverse=inverse,
        )
        for sign in (Sign.PLUS, Sign.MINUS)
        for inverse in (False, True)
    ]
    return report_norms(context, handles)
