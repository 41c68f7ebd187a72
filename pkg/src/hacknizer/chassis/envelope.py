"""The immutable event envelope and its single-line wire format.

The same line format is used on the bus and in the store log, so a service's
whole database can be inspected with a text viewer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import Any

FIELDS = (
    "event_id",
    "stream_id",
    "stream_type",
    "sequence",
    "event_type",
    "payload",
    "occurred_at",
    "correlation_id",
    "causation_id",
)


def canonical_json(obj: Any) -> str:
    """Canonical serialization: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class EventEnvelope:
    event_id: str
    stream_id: str
    stream_type: str
    sequence: int
    event_type: str
    payload: dict
    occurred_at: int  # epoch milliseconds, UTC
    correlation_id: str
    causation_id: str

    def to_line(self) -> str:
        return canonical_json(asdict(self))

    @classmethod
    def from_line(cls, line: str) -> "EventEnvelope":
        doc = json.loads(line)
        if set(doc) != set(FIELDS):
            missing = set(FIELDS) - set(doc)
            extra = set(doc) - set(FIELDS)
            raise ValueError(f"bad envelope line: missing={missing} extra={extra}")
        return cls(**doc)
