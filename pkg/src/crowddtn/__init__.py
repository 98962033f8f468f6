"""Opportunistic DTN routing simulator for static music-event crowds."""

from .engine import Simulation, run
from .metrics import EventKind, EventLog, Report, compute_report
from .routing import Action, ForwardDirective
from .scenario import (
    ConfigError,
    RouterKind,
    RouterParams,
    ScenarioConfig,
    build_contact_graph,
    grid_positions,
    place_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ConfigError",
    "EventKind",
    "EventLog",
    "ForwardDirective",
    "Report",
    "RouterKind",
    "RouterParams",
    "ScenarioConfig",
    "Simulation",
    "build_contact_graph",
    "compute_report",
    "grid_positions",
    "place_scenario",
    "run",
]
