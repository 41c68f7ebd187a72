"""In-process pub/sub bus with at-least-once delivery and fault injection.

Delivery contract: each consumer group receives every published envelope at
least once; envelopes sharing a stream_id reach a given group in publish
order (one in-flight delivery per (topic, group, stream) queue). A handler
returning normally acks; an exception or an injected drop leads to
redelivery after ack_timeout_ms, up to max_attempts, then the envelope is
dead-lettered so rate-1.0 faults still quiesce.

Faults apply at delivery, never at publication, so the outbox invariant is
untouched. All randomness comes from the seeded Random handed in.
"""

from __future__ import annotations

import fnmatch
import random
from collections import deque
from dataclasses import dataclass
from typing import Callable

from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.chassis.scheduler import Scheduler
from hacknizer.errors import BrokerUnavailable, InvalidFaultSpec

Handler = Callable[[EventEnvelope], None]


@dataclass(frozen=True)
class FaultSpec:
    kind: str  # drop | duplicate | delay
    topic_pattern: str
    rate: float
    delay_ms: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.kind not in ("drop", "duplicate", "delay"):
            raise InvalidFaultSpec(f"unknown fault kind {self.kind!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise InvalidFaultSpec(f"rate {self.rate} outside [0,1]")
        lo, hi = self.delay_ms
        if lo < 0 or hi < lo:
            raise InvalidFaultSpec(f"bad delay bounds {self.delay_ms}")

    def matches(self, topic: str) -> bool:
        return fnmatch.fnmatchcase(topic, self.topic_pattern)


@dataclass
class BusCounters:
    published: int = 0
    delivered: int = 0
    dropped: int = 0
    duplicated: int = 0
    delayed: int = 0
    redelivered: int = 0
    dead_lettered: int = 0

    def snapshot(self) -> dict:
        return dict(self.__dict__)


class _Delivery:
    __slots__ = ("envelope", "attempts", "delayed_this_attempt", "is_duplicate")

    def __init__(self, envelope: EventEnvelope, is_duplicate: bool = False):
        self.envelope = envelope
        self.attempts = 0
        self.delayed_this_attempt = False
        self.is_duplicate = is_duplicate


class _Queue:
    __slots__ = ("topic", "group", "pending", "active")

    def __init__(self, topic: str, group: str):
        self.topic = topic
        self.group = group
        self.pending: deque[_Delivery] = deque()
        self.active = False


class InProcessBus:
    def __init__(
        self,
        scheduler: Scheduler,
        rng: random.Random,
        ack_timeout_ms: int = 1000,
        max_attempts: int = 20,
    ):
        self.scheduler = scheduler
        self.rng = rng
        self.ack_timeout_ms = ack_timeout_ms
        self.max_attempts = max_attempts
        self.available = True
        self.counters = BusCounters()
        self.faults: list[FaultSpec] = []
        self.dead_letters: list[tuple[str, str, EventEnvelope]] = []
        self.archive: dict[str, list[EventEnvelope]] = {}
        self._handlers: dict[tuple[str, str], Handler] = {}
        self._queues: dict[tuple[str, str, str], _Queue] = {}
        self._lock = scheduler.lock

    # -- wiring ---------------------------------------------------------

    def subscribe(self, topic: str, consumer_group: str, handler: Handler) -> None:
        """Durable subscription from offset zero: a new group gets the backlog."""
        if not topic:
            raise ValueError("empty topic")
        with self._lock:
            fresh = (topic, consumer_group) not in self._handlers
            self._handlers[(topic, consumer_group)] = handler
            if fresh:
                for envelope in self.archive.get(topic, []):
                    self._enqueue(topic, consumer_group, _Delivery(envelope))

    def inject_fault(self, spec: FaultSpec) -> None:
        with self._lock:
            self.faults.append(spec)

    def clear_faults(self) -> None:
        with self._lock:
            self.faults.clear()

    def set_available(self, available: bool) -> None:
        with self._lock:
            self.available = available

    # -- publish ----------------------------------------------------------

    def publish(self, topic: str, envelope: EventEnvelope) -> None:
        if not topic:
            raise ValueError("empty topic")
        with self._lock:
            if not self.available:
                raise BrokerUnavailable(f"broker down; publish to {topic!r} refused")
            self.counters.published += 1
            self.archive.setdefault(topic, []).append(envelope)
            for (t, group), _handler in list(self._handlers.items()):
                if t == topic:
                    self._enqueue(topic, group, _Delivery(envelope))

    def _enqueue(self, topic: str, group: str, delivery: _Delivery) -> None:
        key = (topic, group, delivery.envelope.stream_id)
        queue = self._queues.get(key)
        if queue is None:
            queue = self._queues[key] = _Queue(topic, group)
        queue.pending.append(delivery)
        if not queue.active:
            queue.active = True
            self.scheduler.call_later(0, lambda q=queue: self._deliver(q))

    # -- delivery ---------------------------------------------------------

    def _deliver(self, queue: _Queue) -> None:
        if not queue.pending:
            queue.active = False
            return
        delivery = queue.pending[0]
        topic = queue.topic

        if not delivery.delayed_this_attempt:
            delay = self._fault_delay(topic)
            if delay is not None:
                delivery.delayed_this_attempt = True
                self.counters.delayed += 1
                self.scheduler.call_later(delay, lambda: self._deliver(queue))
                return

        # A copy spawned by the duplicate fault never spawns further copies,
        # so rate 1.0 doubles each message instead of multiplying forever.
        if not delivery.is_duplicate and self._fault_fires("duplicate", topic):
            self.counters.duplicated += 1
            queue.pending.append(_Delivery(delivery.envelope, is_duplicate=True))

        if self._fault_fires("drop", topic):
            self.counters.dropped += 1
            self._retry_or_bury(queue, delivery)
            return

        handler = self._handlers.get((queue.topic, queue.group))
        try:
            if handler is not None:
                handler(delivery.envelope)
        except Exception:
            self._retry_or_bury(queue, delivery)
            return
        self.counters.delivered += 1
        queue.pending.popleft()
        self._advance(queue)

    def _retry_or_bury(self, queue: _Queue, delivery: _Delivery) -> None:
        delivery.attempts += 1
        delivery.delayed_this_attempt = False
        if delivery.attempts >= self.max_attempts:
            self.counters.dead_lettered += 1
            self.dead_letters.append((queue.topic, queue.group, delivery.envelope))
            queue.pending.popleft()
            self._advance(queue)
        else:
            self.counters.redelivered += 1
            self.scheduler.call_later(self.ack_timeout_ms, lambda: self._deliver(queue))

    def _advance(self, queue: _Queue) -> None:
        if queue.pending:
            self.scheduler.call_later(0, lambda: self._deliver(queue))
        else:
            queue.active = False

    # -- faults -------------------------------------------------------------

    def _fault_fires(self, kind: str, topic: str) -> bool:
        # Rate-0 specs draw no randomness, so the trace matches a no-fault run.
        for spec in self.faults:
            if spec.kind == kind and spec.rate > 0 and spec.matches(topic):
                if self.rng.random() < spec.rate:
                    return True
        return False

    def _fault_delay(self, topic: str) -> int | None:
        for spec in self.faults:
            if spec.kind == "delay" and spec.rate > 0 and spec.matches(topic):
                if self.rng.random() < spec.rate:
                    lo, hi = spec.delay_ms
                    return self.rng.randint(lo, hi) if hi > lo else lo
        return None

    # -- introspection ------------------------------------------------------

    def pending_for(self, consumer_group: str) -> int:
        with self._lock:
            return sum(
                len(q.pending) for (_, g, _), q in self._queues.items() if g == consumer_group
            )

    def topics(self) -> list[str]:
        with self._lock:
            return sorted(self.archive)
