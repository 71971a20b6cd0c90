"""CSV emission with a header row and 17 significant digits."""
import csv
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import TextIO

from lib.core.text_processor import format_number
from lib.wave.mode_oracle import ModeMatrix
from lib.wave.scattering import RateRow
from lib.wave.spectral_core import Field

RATE_HEADER = ["t", "err_E", "tail_integral", "ratio"]
NORM_HEADER = ["handle_name", "grid", "mode", "estimate"]
MODES_HEADER = [
    "omega",
    "w11_re",
    "w11_im",
    "w12_re",
    "w12_im",
    "w21_re",
    "w21_im",
    "w22_re",
    "w22_im",
    "abs_det",
]


@contextmanager
def open_output(path: Optional[Path]) -> Iterator[TextIO]:
    """Open ``path`` for writing, or yield standard output for None."""
    if path is None:
        yield sys.stdout
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        yield file


def _cell(value: object) -> str:
    if isinstance(value, str):
        return value
    return format_number(value)


def write_csv(
    path: Optional[Path],
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
) -> None:
    """Write rows under a header; numbers use ``format_number``.

    Args:
        path: Output file, or None for standard output
        header: Column names
        rows: Row values, strings kept verbatim
    """
    with open_output(path) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def rate_rows(rows: Sequence[RateRow]) -> List[list]:
    return [[row.t, row.err, row.tail, row.ratio] for row in rows]


def mode_rows(matrices: Sequence[ModeMatrix]) -> List[list]:
    table = []
    for mode in matrices:
        entries = []
        for value in mode.matrix.ravel():
            entries.extend([value.real, value.imag])
        table.append([mode.omega, *entries, abs(mode.det)])
    return table


def data_header(dimension: int) -> List[str]:
    coordinates = [f"x{axis}" for axis in range(dimension)]
    return [
        "index",
        *coordinates,
        "u_series_re",
        "u_series_im",
        "dtu_series_re",
        "dtu_series_im",
        "u_strang_re",
        "u_strang_im",
        "dtu_strang_re",
        "dtu_strang_im",
    ]


def data_rows(series: Sequence[Field], strang: Sequence[Field]) -> List[list]:
    """One row per grid point: coordinates then both solutions."""
    grid = series[0].grid
    coordinates = [axis.ravel() for axis in grid.coordinates()]
    columns = [f.values.ravel() for f in (*series, *strang)]
    table = []
    for index in range(grid.size):
        row: list = [str(index)]
        row.extend(axis[index] for axis in coordinates)
        for column in columns:
            row.extend([column[index].real, column[index].imag])
        table.append(row)
    return table
