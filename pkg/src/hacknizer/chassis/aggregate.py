"""Aggregate fold runtime and the consumer-side idempotency contract."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.errors import TypeMismatch


@dataclass(frozen=True)
class AggregateDefinition:
    """A stream type plus a pure, deterministic apply(state, envelope) -> state."""

    stream_type: str
    initial_state: Callable[[], Any]
    apply: Callable[[Any, EventEnvelope], Any]


def fold_aggregate(definition: AggregateDefinition, envelopes: Iterable[EventEnvelope]) -> Any:
    state = definition.initial_state()
    for env in envelopes:
        if env.stream_type != definition.stream_type:
            raise TypeMismatch(
                f"envelope of type {env.stream_type!r} folded as {definition.stream_type!r}"
            )
        state = definition.apply(state, env)
    return state


@dataclass
class Deduplicator:
    """Tracks processed event_ids per consumer group.

    An id already present is never handed to the handler again, which turns
    at-least-once delivery into exactly-once effect.
    """

    consumer_group: str
    processed_ids: set[str] = field(default_factory=set)

    def seen(self, event_id: str) -> bool:
        return event_id in self.processed_ids

    def mark(self, event_id: str) -> None:
        self.processed_ids.add(event_id)

    def first_time(self, event_id: str) -> bool:
        if event_id in self.processed_ids:
            return False
        self.processed_ids.add(event_id)
        return True
