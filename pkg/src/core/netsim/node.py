"""The node interface the simulator drives, and an adapter for pure step functions."""

from collections.abc import Callable
from typing import Any, Protocol, runtime_checkable

from pydantic import BaseModel

from src.core.netsim.events import Effect, Event


@runtime_checkable
class ProtocolNode(Protocol):
    node_id: int

    def step(self, event: Event) -> list[Effect]: ...

    def snapshot(self) -> dict[str, Any]: ...


class StateMachineNode[S: BaseModel]:
    """
    Hosts an immutable replica state and a pure transition function.

    The function maps (state, event) to (state', effects); this wrapper only
    keeps the latest state so the simulator can drive it like any node.
    """

    def __init__(
        self,
        node_id: int,
        state: S,
        step_fn: Callable[[S, Event], tuple[S, list[Effect]]],
        snapshot_fn: Callable[[S], dict[str, Any]] | None = None,
        sign_fn: Callable[[Any], Any] | None = None,
    ) -> None:
        self.node_id = node_id
        self.state = state
        self._step_fn = step_fn
        self._snapshot_fn = snapshot_fn
        self._sign_fn = sign_fn

    def step(self, event: Event) -> list[Effect]:
        self.state, effects = self._step_fn(self.state, event)
        return effects

    def snapshot(self) -> dict[str, Any]:
        if self._snapshot_fn is not None:
            return self._snapshot_fn(self.state)
        return {}

    def sign_payload(self, payload: Any) -> Any:
        """Re-sign a payload rewritten by an equivocating adversary."""
        return self._sign_fn(payload) if self._sign_fn is not None else payload
