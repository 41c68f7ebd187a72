"""Shared microservice chassis: envelopes, event store, fold runtime, bus."""

from hacknizer.chassis.envelope import EventEnvelope, canonical_json
from hacknizer.chassis.clock import SimulatedClock, WallClock
from hacknizer.chassis.ids import IdSource
from hacknizer.chassis.scheduler import Scheduler
from hacknizer.chassis.store import EventStore, StreamHead
from hacknizer.chassis.aggregate import AggregateDefinition, fold_aggregate, Deduplicator
from hacknizer.chassis.bus import InProcessBus, FaultSpec

__all__ = [
    "EventEnvelope",
    "canonical_json",
    "SimulatedClock",
    "WallClock",
    "IdSource",
    "Scheduler",
    "EventStore",
    "StreamHead",
    "AggregateDefinition",
    "fold_aggregate",
    "Deduplicator",
    "InProcessBus",
    "FaultSpec",
]
