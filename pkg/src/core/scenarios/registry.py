"""Name-to-runner registry of scenarios."""

from collections.abc import Callable
from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict

from src.core.scenarios.errors import DuplicateScenario, UnknownScenario
from src.core.scenarios.report import ScenarioReport

if TYPE_CHECKING:
    from src.core.run.config import SimConfig

Runner = Callable[['SimConfig', int], ScenarioReport]


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    protocol: str
    description: str
    runner: Callable[..., ScenarioReport]


SCENARIOS: dict[str, Scenario] = {}


def scenario(name: str, protocol: str, description: str) -> Callable[[Runner], Runner]:
    """Register the decorated function as runner of scenario `name`."""

    def register(runner: Runner) -> Runner:
        if name in SCENARIOS:
            raise DuplicateScenario(name)
        SCENARIOS[name] = Scenario(
            name=name, protocol=protocol, description=description, runner=runner
        )
        return runner

    return register


def get_scenario(name: str) -> Scenario:
    """
    Raises:
        UnknownScenario: Listing the registered names.
    """
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenario(name, SCENARIOS)


def list_scenarios() -> list[Scenario]:
    return [SCENARIOS[name] for name in sorted(SCENARIOS)]
