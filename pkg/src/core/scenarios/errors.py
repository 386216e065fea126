"""Domain exceptions for scenarios."""

from collections.abc import Iterable


class ScenarioError(Exception):
    """Base exception for scenario errors."""

    pass


class UnknownScenario(ScenarioError):
    """Raised when a scenario name is not registered."""

    def __init__(self, name: str, available: Iterable[str]) -> None:
        self.name = name
        self.available = sorted(available)
        super().__init__(
            f"Unknown scenario '{name}'. Available: {', '.join(self.available)}"
        )


class DuplicateScenario(ScenarioError):
    """Raised when two scenarios register the same name."""

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"Scenario '{name}' registered twice")
