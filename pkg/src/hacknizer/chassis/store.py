"""Append-only event store with optimistic concurrency and an outbox.

One log file per service holds every stream the service owns, keyed by
(stream_id, sequence), with an event_id uniqueness index rebuilt at open.
Publication is decoupled through an outbox: a watermark file records how
much of the log has been acknowledged by the broker, and anything past it
is (re-)published on restart, giving at-least-once semantics.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from hacknizer.chassis.clock import WallClock
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.chassis.ids import IdSource
from hacknizer.errors import (
    BrokerUnavailable,
    EmptyAppend,
    StoreTypeGuard,
    VersionConflict,
)

LOG_NAME = "events.log"
WATERMARK_NAME = "outbox.watermark"


@dataclass(frozen=True)
class StreamHead:
    stream_id: str
    current_version: int


class EventStore:
    """Event log for one service. Thread-safe; appends are linearizable per stream."""

    def __init__(
        self,
        data_dir: str | Path,
        owned_stream_types: Iterable[str] | None = None,
        private_stream_types: Iterable[str] = (),
        clock=None,
        ids: IdSource | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.owned_stream_types = set(owned_stream_types) if owned_stream_types else None
        self.private_stream_types = set(private_stream_types)
        self.clock = clock if clock is not None else WallClock()
        self.ids = ids if ids is not None else IdSource()
        self.publisher: Callable[[str, EventEnvelope], None] | None = None
        self.publish_blocked_hook: Callable[[], None] | None = None

        self._lock = threading.RLock()
        self._log: list[EventEnvelope] = []
        self._streams: dict[str, list[EventEnvelope]] = {}
        self._stream_types: dict[str, str] = {}
        self._event_ids: set[str] = set()
        self._published_upto = 0

        self._log_path = self.data_dir / LOG_NAME
        self._watermark_path = self.data_dir / WATERMARK_NAME
        self._recover()
        self._file = open(self._log_path, "a", encoding="utf-8")

    # -- recovery -----------------------------------------------------------

    def _recover(self) -> None:
        if self._log_path.exists():
            with open(self._log_path, "r", encoding="utf-8") as fh:
                for raw in fh:
                    raw = raw.rstrip("\n")
                    if not raw:
                        continue
                    try:
                        env = EventEnvelope.from_line(raw)
                    except ValueError:
                        break  # torn tail write; everything before it is intact
                    self._index(env)
        if self._watermark_path.exists():
            self._published_upto = int(self._watermark_path.read_text().strip() or 0)
        self._published_upto = min(self._published_upto, len(self._log))

    def _index(self, env: EventEnvelope) -> None:
        if self.owned_stream_types is not None and env.stream_type not in self.owned_stream_types:
            raise StoreTypeGuard(
                f"{self.data_dir} holds stream type {env.stream_type!r}, "
                f"not one of {sorted(self.owned_stream_types)}"
            )
        if env.event_id in self._event_ids:
            raise StoreTypeGuard(f"duplicate event_id {env.event_id} in log")
        self._log.append(env)
        self._streams.setdefault(env.stream_id, []).append(env)
        self._stream_types[env.stream_id] = env.stream_type
        self._event_ids.add(env.event_id)

    # -- write path ---------------------------------------------------------

    def append(
        self,
        stream_id: str,
        stream_type: str,
        expected_version: int,
        events: Sequence[tuple[str, dict]],
        correlation_id: str = "",
        causation_id: str = "",
    ) -> int:
        """Append events atomically; returns the new stream version.

        expected_version must equal the stream's current version or the
        whole batch is rejected with VersionConflict (no prefix is written).
        """
        if not events:
            raise EmptyAppend(f"empty append to {stream_id!r}")
        with self._lock:
            current = len(self._streams.get(stream_id, []))
            if current != expected_version:
                raise VersionConflict(stream_id, expected_version, current)
            known_type = self._stream_types.get(stream_id)
            if known_type is not None and known_type != stream_type:
                raise StoreTypeGuard(
                    f"stream {stream_id!r} is {known_type!r}, not {stream_type!r}"
                )
            envelopes = []
            seq = current
            for event_type, payload in events:
                seq += 1
                envelopes.append(
                    EventEnvelope(
                        event_id=self.ids.event_id(),
                        stream_id=stream_id,
                        stream_type=stream_type,
                        sequence=seq,
                        event_type=event_type,
                        payload=payload,
                        occurred_at=self.clock.now_ms(),
                        correlation_id=correlation_id,
                        causation_id=causation_id,
                    )
                )
            buffer = "".join(env.to_line() + "\n" for env in envelopes)
            self._file.write(buffer)
            self._file.flush()
            for env in envelopes:
                self._index(env)
        # Publication is decoupled: the append is durable even when the
        # broker is down; the blocked hook owns scheduling the retry.
        try:
            self.flush_outbox()
        except BrokerUnavailable:
            if self.publish_blocked_hook is not None:
                self.publish_blocked_hook()
        return seq

    # -- read path ----------------------------------------------------------

    def load(self, stream_id: str, from_version: int = 0) -> list[EventEnvelope]:
        with self._lock:
            stream = self._streams.get(stream_id, [])
            return [env for env in stream if env.sequence > from_version]

    def head(self, stream_id: str) -> StreamHead:
        with self._lock:
            return StreamHead(stream_id, len(self._streams.get(stream_id, [])))

    def scan(self) -> list[EventEnvelope]:
        """Every envelope in log (append) order."""
        with self._lock:
            return list(self._log)

    def stream_ids(self, stream_type: str | None = None) -> list[str]:
        with self._lock:
            if stream_type is None:
                return list(self._streams)
            return [s for s, t in self._stream_types.items() if t == stream_type]

    # -- outbox -------------------------------------------------------------

    def flush_outbox(self) -> int:
        """Publish log entries past the watermark; returns how many went out.

        Raises BrokerUnavailable (watermark untouched for the failed entry)
        so the caller can schedule a retry.
        """
        if self.publisher is None:
            return 0
        sent = 0
        while True:
            with self._lock:
                if self._published_upto >= len(self._log):
                    return sent
                env = self._log[self._published_upto]
                if env.stream_type in self.private_stream_types:
                    self._published_upto += 1
                    self._save_watermark()
                    continue
            try:
                self.publisher(f"{env.stream_type}.events", env)
            except BrokerUnavailable:
                raise
            with self._lock:
                self._published_upto += 1
                self._save_watermark()
                sent += 1

    def unpublished_count(self) -> int:
        with self._lock:
            return len(self._log) - self._published_upto

    def _save_watermark(self) -> None:
        self._watermark_path.write_text(str(self._published_upto))

    def close(self) -> None:
        with self._lock:
            self._file.close()
