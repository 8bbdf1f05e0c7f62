"""Makespan scheduling on hybrid platforms with two resource types.

Library layout: :mod:`hybridsched.model` (domain types and validation),
:mod:`hybridsched.engine` (list scheduling, on-line simulation,
spoliation), :mod:`hybridsched.lp` / :mod:`hybridsched.bounds` (lower
bounds), algorithm rosters in :mod:`hybridsched.indep_offline`,
:mod:`hybridsched.indep_online`, :mod:`hybridsched.dag_offline` and
:mod:`hybridsched.dag_online`, generators in :mod:`hybridsched.gen`, the
exact :mod:`hybridsched.oracle`, and the benchmark CLI in
:mod:`hybridsched.cli`.
"""

from .model import (
    Assignment,
    CycleError,
    Instance,
    Placement,
    Platform,
    Schedule,
    Task,
    Violation,
    makespan,
    topological_order,
    validate,
)

__all__ = [
    "Assignment",
    "CycleError",
    "Instance",
    "Placement",
    "Platform",
    "Schedule",
    "Task",
    "Violation",
    "makespan",
    "topological_order",
    "validate",
]

__version__ = "0.1.0"
