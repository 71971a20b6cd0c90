"""Per-mode wave operator W+(xi)."""
from lib.cli.context import Context
from lib.cli.csv_output import MODES_HEADER
from lib.cli.csv_output import mode_rows
from lib.cli.csv_output import write_csv
from lib.wave.mode_oracle import mode_wave_operator

NAME = "modes"
HELP = "entries and |det| of W+(xi) for each omega"


def run(context: Context) -> int:
    """Write one row per configured frequency.

    Args:
        context: Run context

    Returns:
        Exit status
    """
    config = context.config
    matrices = [
        mode_wave_operator(
            omega,
            config.model,
            config.horizon_tol,
            horizon_cap=config.horizon_cap,
        )
        for omega in config.omegas
    ]
    write_csv(context.out, MODES_HEADER, mode_rows(matrices))
    return 0
