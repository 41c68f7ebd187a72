"""Hacknizer: a hackathon platform built as reactive event-sourced
microservices, with a deterministic composition harness that makes the
distributed behaviors verifiable at desk scale."""

from hacknizer.chassis import (
    AggregateDefinition,
    EventEnvelope,
    EventStore,
    FaultSpec,
    InProcessBus,
    fold_aggregate,
)
from hacknizer.harness import (
    ServiceSpec,
    SystemHandle,
    SystemTopology,
    compose,
    default_topology,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateDefinition",
    "EventEnvelope",
    "EventStore",
    "FaultSpec",
    "InProcessBus",
    "fold_aggregate",
    "ServiceSpec",
    "SystemHandle",
    "SystemTopology",
    "compose",
    "default_topology",
    "__version__",
]
