"""Nonlocal traffic flow on road networks with optimized traffic lights.

The compiled core lives in ``nltraffic._core``; this package re-exports it and
points bundled-scenario lookup at the scenarios shipped with the package.
"""

import os
from pathlib import Path

_bundled = Path(__file__).with_name("scenarios")
if _bundled.is_dir():
    os.environ.setdefault("NLTRAFFIC_SCENARIO_DIR", str(_bundled))

from ._core import (  # noqa: E402
    ConstraintError,
    CflError,
    Error,
    IoError,
    RangeError,
    Scenario,
    ShapeError,
    SolverError,
    UnsupportedError,
    ValidationError,
    __version__,
    evaluate,
    gradient_check,
    optimize,
    run_cli,
    simulate,
    simulate_coupled,
    sweep,
)

__all__ = [
    "ConstraintError",
    "CflError",
    "Error",
    "IoError",
    "RangeError",
    "Scenario",
    "ShapeError",
    "SolverError",
    "UnsupportedError",
    "ValidationError",
    "__version__",
    "evaluate",
    "gradient_check",
    "optimize",
    "run_cli",
    "simulate",
    "simulate_coupled",
    "sweep",
]
