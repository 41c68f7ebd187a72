"""Shared service runtime: command consumption, replies, dedupe, retries.

Conventions carried by every service:
  commands arrive on ``<name>.commands``, replies go out on ``<name>.replies``
  with event_type ``<Command>Succeeded`` / ``<Command>Failed``, the reply's
  correlation_id mirrors the command's and its causation_id is the command's
  event_id. Domain events reach ``<stream_type>.events`` through the store
  outbox. Handlers dedupe by command event_id, so redelivery is harmless.
"""

from __future__ import annotations

from typing import Callable

from hacknizer.chassis.aggregate import AggregateDefinition, Deduplicator, fold_aggregate
from hacknizer.chassis.bus import InProcessBus
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.chassis.ids import IdSource
from hacknizer.chassis.scheduler import Scheduler
from hacknizer.chassis.store import EventStore
from hacknizer.errors import BrokerUnavailable, CommandRejected, VersionConflict

MAX_APPEND_RETRIES = 64
OUTBOX_RETRY_MS = 500


class Service:
    """Base for the bounded-context services and the saga coordinator."""

    name = ""  # command/reply topic prefix
    owned_stream_types: tuple[str, ...] = ()
    private_stream_types: tuple[str, ...] = ()

    def __init__(
        self,
        data_dir,
        bus: InProcessBus,
        scheduler: Scheduler,
        clock,
        ids: IdSource,
        config: dict | None = None,
    ):
        self.bus = bus
        self.scheduler = scheduler
        self.clock = clock
        self.ids = ids
        self.config = config or {}
        self.store = EventStore(
            data_dir,
            owned_stream_types=self.owned_stream_types,
            private_stream_types=self.private_stream_types,
            clock=clock,
            ids=ids,
        )
        self.store.publisher = bus.publish
        self.store.publish_blocked_hook = lambda: self.scheduler.call_later(
            OUTBOX_RETRY_MS, self.flush_outbox
        )
        self._dedupe = Deduplicator(consumer_group=f"{self.name}-svc")
        self.commands: dict[str, Callable[[dict], dict]] = {}

    # -- lifecycle ------------------------------------------------------

    def start(self) -> None:
        self.bus.subscribe(f"{self.name}.commands", f"{self.name}-svc", self._on_command)
        self.flush_outbox()

    def flush_outbox(self) -> None:
        try:
            self.store.flush_outbox()
        except BrokerUnavailable:
            self.scheduler.call_later(OUTBOX_RETRY_MS, self.flush_outbox)

    # -- command plumbing -------------------------------------------------

    def _on_command(self, env: EventEnvelope) -> None:
        if not self._dedupe.first_time(env.event_id):
            return
        try:
            result = self.dispatch(env)
            self._reply(env, f"{env.event_type}Succeeded", {"result": result or {}})
        except CommandRejected as err:
            self._reply(
                env,
                f"{env.event_type}Failed",
                {"error": {"code": err.code, "message": err.message}},
            )

    def dispatch(self, env: EventEnvelope) -> dict:
        handler = self.commands.get(env.event_type)
        if handler is None:
            raise CommandRejected("UnknownCommand", env.event_type)
        return handler(env.payload)

    def _reply(self, command_env: EventEnvelope, event_type: str, body: dict) -> None:
        payload = {"command": command_env.event_type, **body}
        reply = EventEnvelope(
            event_id=self.ids.event_id(),
            stream_id=command_env.stream_id,
            stream_type="reply",
            sequence=0,
            event_type=event_type,
            payload=payload,
            occurred_at=self.clock.now_ms(),
            correlation_id=command_env.correlation_id,
            causation_id=command_env.event_id,
        )
        self._publish_with_retry(f"{self.name}.replies", reply)

    def _publish_with_retry(self, topic: str, envelope: EventEnvelope, backoff_ms: int = OUTBOX_RETRY_MS) -> None:
        try:
            self.bus.publish(topic, envelope)
        except BrokerUnavailable:
            self.scheduler.call_later(
                backoff_ms,
                lambda: self._publish_with_retry(topic, envelope, min(backoff_ms * 2, 8000)),
            )

    # -- aggregate access ------------------------------------------------

    def fold(self, definition: AggregateDefinition, stream_id: str):
        envelopes = self.store.load(stream_id)
        return fold_aggregate(definition, envelopes), len(envelopes)

    def retry_append(self, attempt: Callable[[], dict]) -> dict:
        """Run a load-decide-append closure, retrying on version conflicts."""
        for _ in range(MAX_APPEND_RETRIES):
            try:
                return attempt()
            except VersionConflict:
                continue
        raise CommandRejected("Contention", "append kept conflicting; giving up")


def actor_roles(payload: dict) -> tuple[str, list[str]]:
    actor = payload.get("actor") or {}
    return actor.get("user_id", ""), list(actor.get("roles", []))


def require_role(payload: dict, *allowed: str) -> str:
    """Returns the acting user_id; admin always passes."""
    user_id, roles = actor_roles(payload)
    if "admin" in roles or any(r in roles for r in allowed):
        return user_id
    raise CommandRejected("Forbidden", f"requires one of {sorted(allowed)}")
