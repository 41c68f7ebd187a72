"""Single-service process runner for realistic multi-process deployments.

Each process hosts one service against the shared file-backed bus and its
own data directory only. The gateway process reaches the query and user
services through request/reply round-trips over the bus, staying stateless.
"""

from __future__ import annotations

import os
import random
import threading
import uuid

from hacknizer.chassis.clock import WallClock
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.chassis.ids import IdSource
from hacknizer.chassis.scheduler import Scheduler
from hacknizer.errors import CommandRejected, rejected
from hacknizer.filebus import FileBus
from hacknizer.gateway import Gateway
from hacknizer.httpd import GatewayHTTPServer
from hacknizer.services.hackathon import HackathonService
from hacknizer.services.page import PageService
from hacknizer.services.query import QueryService
from hacknizer.services.saga import SagaCoordinator
from hacknizer.services.team import TeamService
from hacknizer.services.user import UserService

ROUND_TRIP_TIMEOUT_S = 5.0

SERVICE_CLASSES = {
    "user": UserService,
    "hackathon": HackathonService,
    "team": TeamService,
    "page": PageService,
    "saga": SagaCoordinator,
}


class BusRoundTrip:
    """Request/reply over the bus for processes without direct references."""

    def __init__(self, bus: FileBus, clock, ids: IdSource, request_topic: str, reply_topic: str):
        self.bus = bus
        self.clock = clock
        self.ids = ids
        self.request_topic = request_topic
        self._waiters: dict[str, dict] = {}
        self._events: dict[str, threading.Event] = {}
        group = f"rt-{uuid.uuid4().hex[:8]}"
        bus.subscribe(reply_topic, group, self._on_reply)

    def _on_reply(self, env: EventEnvelope) -> None:
        event = self._events.get(env.correlation_id)
        if event is not None:
            self._waiters[env.correlation_id] = {
                "event_type": env.event_type,
                "payload": env.payload,
            }
            event.set()

    def call(self, command: str, payload: dict, routing_key: str = "") -> dict:
        correlation_id = self.ids.event_id()
        event = threading.Event()
        self._events[correlation_id] = event
        envelope = EventEnvelope(
            event_id=self.ids.event_id(),
            stream_id=routing_key or correlation_id,
            stream_type="command",
            sequence=0,
            event_type=command,
            payload=payload,
            occurred_at=self.clock.now_ms(),
            correlation_id=correlation_id,
            causation_id=f"route:{command}",
        )
        self.bus.publish(self.request_topic, envelope)
        if not event.wait(ROUND_TRIP_TIMEOUT_S):
            self._events.pop(correlation_id, None)
            raise rejected("Timeout", f"{command} round trip timed out")
        reply = self._waiters.pop(correlation_id)
        self._events.pop(correlation_id, None)
        if reply["event_type"].endswith("Failed"):
            error = reply["payload"].get("error", {})
            raise rejected(error.get("code", "Failed"), error.get("message", ""))
        return reply["payload"].get("result", {})


class QueryRequestServer:
    """Serves read-model queries over the query.requests topic."""

    QUERIES = (
        "list_hackathons",
        "get_overview",
        "get_public_page",
        "get_roster",
        "get_dashboard",
        "get_command",
        "get_saga",
    )

    def __init__(self, query_service: QueryService, bus: FileBus, clock, ids: IdSource):
        self.query = query_service
        self.bus = bus
        self.clock = clock
        self.ids = ids
        bus.subscribe("query.requests", "query-svc", self._on_request)

    def _on_request(self, env: EventEnvelope) -> None:
        name = env.payload.get("query")
        args = env.payload.get("args", [])
        try:
            if name not in self.QUERIES:
                raise rejected("NotFound", str(name))
            result = getattr(self.query, name)(*args)
            reply_type, body = "QuerySucceeded", {"result": result}
        except CommandRejected as err:
            reply_type, body = "QueryFailed", {"error": {"code": err.code, "message": err.message}}
        self.bus.publish(
            "query.replies",
            EventEnvelope(
                event_id=self.ids.event_id(),
                stream_id=env.stream_id,
                stream_type="reply",
                sequence=0,
                event_type=reply_type,
                payload={"command": "Query", **body},
                occurred_at=self.clock.now_ms(),
                correlation_id=env.correlation_id,
                causation_id=env.event_id,
            ),
        )


class RemoteQueryBackend:
    """Gateway-side proxy implementing the query surface over the bus."""

    def __init__(self, round_trip: BusRoundTrip):
        self._rt = round_trip

    def _call(self, query: str, *args):
        try:
            return self._rt.call("Query", {"query": query, "args": list(args)})
        except CommandRejected as err:
            if err.code == "Timeout":
                raise
            raise rejected(err.code, err.message)

    def list_hackathons(self, state=None):
        return self._call("list_hackathons", state)

    def get_overview(self, hackathon_id):
        return self._call("get_overview", hackathon_id)

    def get_public_page(self, hackathon_id):
        return self._call("get_public_page", hackathon_id)

    def get_roster(self, team_id):
        return self._call("get_roster", team_id)

    def get_dashboard(self, user_id):
        return self._call("get_dashboard", user_id)

    def get_command(self, command_id):
        return self._call("get_command", command_id)

    def get_saga(self, saga_id):
        return self._call("get_saga", saga_id)


class RunningProcess:
    def __init__(self, config: dict):
        self.config = dict(config)
        self.role = config["service"]
        self.clock = WallClock()
        self.rng = random.Random(int.from_bytes(os.urandom(8), "big"))
        self.ids = IdSource(self.rng)
        self.scheduler = Scheduler(self.clock)
        self.bus = FileBus(config["broker_dir"])
        self.http = None
        self._parts = []

        if self.role in SERVICE_CLASSES:
            service = SERVICE_CLASSES[self.role](
                config["data_dir"],
                bus=self.bus,
                scheduler=self.scheduler,
                clock=self.clock,
                ids=self.ids,
                config=self.config,
            )
            service.start()
            self._parts.append(service)
        elif self.role == "query":
            query = QueryService(config["data_dir"], self.bus)
            query.restore()
            query.start()
            self._parts.append(QueryRequestServer(query, self.bus, self.clock, self.ids))
        elif self.role == "gateway":
            query_rt = BusRoundTrip(self.bus, self.clock, self.ids, "query.requests", "query.replies")
            user_rt = BusRoundTrip(self.bus, self.clock, self.ids, "user.commands", "user.replies")

            def login(email, password):
                return user_rt.call(
                    "AuthenticateUser", {"email": email, "password": password}, routing_key=email
                )

            gateway = Gateway(
                bus=self.bus,
                clock=self.clock,
                ids=self.ids,
                token_secret=config.get("token_secret", "dev-secret"),
                query_backend=RemoteQueryBackend(query_rt),
                login_backend=login,
            )
            self.http = GatewayHTTPServer(
                gateway, threading.RLock(), port=int(config.get("port", 0))
            )
        else:
            raise ValueError(f"unknown service role {self.role!r}")
        self._pump = self.scheduler.pump_in_thread()

    def stop(self) -> None:
        if self.http is not None:
            self.http.stop()
        self.scheduler.stop_pump()
        self.bus.stop()
        for part in self._parts:
            store = getattr(part, "store", None)
            if store is not None:
                store.close()
