"""Solver toolkit for the storage allocation problem on a capacitated path."""

from .core import (
    EMPTY,
    InputError,
    RefusalError,
    Placement,
    SapInstance,
    Task,
    Verdict,
    Violation,
    bottleneck,
    check_feasible,
    edge_loads,
    profit,
)

__all__ = [
    "EMPTY",
    "InputError",
    "RefusalError",
    "Placement",
    "SapInstance",
    "Task",
    "Verdict",
    "Violation",
    "bottleneck",
    "check_feasible",
    "edge_loads",
    "profit",
]

__version__ = "0.1.0"
