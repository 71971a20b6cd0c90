import json

import numpy as np
import structlog

from lib.core.logger import initialize_logger


def test_initialize_logger_writes_json_lines(log_dir):
    initialize_logger("Wave Toolkit")
    structlog.contextvars.bind_contextvars(run_id="abc")
    try:
        structlog.get_logger("test").info("Something happened", value=3)
    finally:
        structlog.contextvars.clear_contextvars()

    lines = (log_dir / "wave_toolkit.log").read_text().splitlines()
    record = json.loads(lines[-1])
    assert record["event"] == "Something happened"
    assert record["value"] == 3
    assert record["run_id"] == "abc"
    assert record["level"] == "info"


def test_numpy_values_are_logged_as_json(log_dir):
    initialize_logger("wave_toolkit")
    structlog.get_logger("test").info(
        "Residuals measured",
        count=np.int64(3),
        residual=np.float64(1e-13),
        entry=np.complex128(1 - 2j),
        small=np.arange(3),
        large=np.zeros((4, 8)),
    )

    lines = (log_dir / "wave_toolkit.log").read_text().splitlines()
    record = json.loads(lines[-1])
    assert record["count"] == 3
    assert record["residual"] == 1e-13
    assert record["entry"] == {"re": 1.0, "im": -2.0}
    assert record["small"] == [0, 1, 2]
    assert record["large"] == {"shape": [4, 8], "dtype": "float64"}
