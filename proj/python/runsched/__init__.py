"""Runnable-level scheduling simulator for block-diagram control software."""

from ._core import (
    AlgebraicLoopError,
    Model,
    ModelError,
    RunResult,
    UnknownSignalError,
    cli,
    compare,
    exec_time_split,
    parse_duration,
    simulate,
)

__all__ = [
    "AlgebraicLoopError",
    "Model",
    "ModelError",
    "RunResult",
    "UnknownSignalError",
    "cli",
    "compare",
    "exec_time_split",
    "parse_duration",
    "simulate",
]
