"""Geodesics of Berger-deformed Sasaki metrics over complex space forms."""

import json

from ._core import (
    BergerError,
    ConstraintViolation,
    DegenerateProjection,
    DimensionMismatch,
    InfeasibleSpeed,
    IntegrationError,
    apply_J,
    connection_sweep,
    curvatures,
    integrate,
    lifted_connection,
    lifted_inner,
    riemann,
    script_R_matrix,
)
from ._core import run_command as _run_command

__all__ = [
    "BergerError",
    "ConstraintViolation",
    "DegenerateProjection",
    "DimensionMismatch",
    "InfeasibleSpeed",
    "IntegrationError",
    "apply_J",
    "connection_sweep",
    "curvatures",
    "integrate",
    "lifted_connection",
    "lifted_inner",
    "riemann",
    "run",
    "script_R_matrix",
]


def run(command, config=None):
    """Run a CLI command in-process. Returns (exit_code, report dict)."""
    code, report = _run_command(command, json.dumps(config or {}))
    return code, json.loads(report)
