"""Runnable experiments: named scenarios over the protocol simulators."""

from src.core.scenarios import bft, microchain, nakamoto  # noqa: F401
from src.core.scenarios.errors import DuplicateScenario, ScenarioError, UnknownScenario
from src.core.scenarios.pool import parallel_map
from src.core.scenarios.registry import (
    SCENARIOS,
    Scenario,
    get_scenario,
    list_scenarios,
    scenario,
)
from src.core.scenarios.report import ScenarioReport

__all__ = [
    'SCENARIOS',
    'Scenario',
    'ScenarioReport',
    'get_scenario',
    'list_scenarios',
    'scenario',
    'parallel_map',
    'ScenarioError',
    'UnknownScenario',
    'DuplicateScenario',
]
