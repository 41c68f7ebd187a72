"""Deterministic composition of the whole system in one process.

compose() starts the four context services, the saga coordinator, the read
side, and the gateway against one in-process bus with isolated per-service
stores. In simulated-clock mode every delivery and timer funnels through a
seeded scheduler, so (seed, scripted input) fully determines every event log
and the quiescence report; drain() advances the clock past all timers and
returns only at quiescence. Wall mode pumps the scheduler on a thread and
promises nothing about determinism.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from pathlib import Path

from hacknizer.chassis.bus import FaultSpec, InProcessBus
from hacknizer.chassis.clock import SimulatedClock, WallClock
from hacknizer.chassis.ids import IdSource
from hacknizer.chassis.scheduler import Scheduler
from hacknizer.errors import DuplicateService, UnsupportedInWallClockMode
from hacknizer.gateway import Gateway
from hacknizer.httpd import GatewayHTTPServer
from hacknizer.services.hackathon import HackathonService
from hacknizer.services.page import PageService
from hacknizer.services.query import QueryService
from hacknizer.services.saga import SagaCoordinator
from hacknizer.services.team import TeamService
from hacknizer.services.user import UserService

SERVICE_ROLES = {
    "user": (UserService, "red"),
    "hackathon": (HackathonService, "green"),
    "team": (TeamService, "blue"),
    "page": (PageService, "yellow"),
    "saga": (SagaCoordinator, "grey"),
    "query": (QueryService, "grey"),
}

DEFAULT_CONFIG = {
    "token_secret": "dev-secret",
    "saga_token": "saga-secret",
    "token_ttl_s": 3600,
    "scrypt_n": 2048,  # desk-scale KDF profile; CLI run mode defaults higher
    "reservation_expiry_ms": 60_000,
    "ack_timeout_ms": 1000,
    "bus_max_attempts": 20,
}


@dataclass(frozen=True)
class ServiceSpec:
    name: str
    role: str
    color: str
    data_dir: str


@dataclass
class SystemTopology:
    services: list[ServiceSpec]
    seed: int = 0
    clock_mode: str = "simulated"  # simulated | wall
    gateway_port: int = 0
    start_http: bool = True
    config: dict = field(default_factory=dict)


def default_topology(base_dir, seed: int = 0, **kwargs) -> SystemTopology:
    base = Path(base_dir)
    services = [
        ServiceSpec(role, role, SERVICE_ROLES[role][1], str(base / role))
        for role in ("user", "hackathon", "team", "page", "saga", "query")
    ]
    return SystemTopology(services=services, seed=seed, **kwargs)


@dataclass(frozen=True)
class QuiescenceReport:
    steps: int
    published: int
    delivered: int
    dropped: int
    duplicated: int
    delayed: int
    redelivered: int
    dead_lettered: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class SystemHandle:
    def __init__(self, topology: SystemTopology):
        self.topology = topology
        self.config = {**DEFAULT_CONFIG, **topology.config}
        self.lock = threading.RLock()
        self.clock = SimulatedClock() if topology.clock_mode == "simulated" else WallClock()
        self.rng = random.Random(topology.seed)
        self.ids = IdSource(self.rng)
        self.scheduler = Scheduler(self.clock, self.lock)
        self.bus = InProcessBus(
            self.scheduler,
            self.rng,
            ack_timeout_ms=int(self.config["ack_timeout_ms"]),
            max_attempts=int(self.config["bus_max_attempts"]),
        )
        self.services: dict[str, object] = {}
        self.http: GatewayHTTPServer | None = None
        self._pump_thread = None
        self._drained_counters = self.bus.counters.snapshot()

        self._validate(topology)
        for spec in topology.services:
            self.services[spec.name] = self._build_service(spec)
        for service in self.services.values():
            service.start()

        query = self._find("query")
        user = self._find("user")
        self.gateway = Gateway(
            bus=self.bus,
            clock=self.clock,
            ids=self.ids,
            token_secret=self.config["token_secret"],
            query_backend=query,
            login_backend=user.authenticate if user else self._no_login,
        )
        if topology.start_http:
            self.http = GatewayHTTPServer(self.gateway, self.lock, port=topology.gateway_port)
        if topology.clock_mode == "wall":
            self._pump_thread = self.scheduler.pump_in_thread()

    @staticmethod
    def _no_login(email, password):
        raise UnsupportedInWallClockMode("no user service composed")

    def _validate(self, topology: SystemTopology) -> None:
        names = [s.name for s in topology.services]
        if len(names) != len(set(names)):
            raise DuplicateService(f"duplicate service names in {names}")
        dirs = [str(Path(s.data_dir).resolve()) for s in topology.services]
        if len(dirs) != len(set(dirs)):
            raise DuplicateService("services must have pairwise-disjoint data directories")
        for spec in topology.services:
            if spec.role not in SERVICE_ROLES:
                raise DuplicateService(f"unknown service role {spec.role!r}")

    def _build_service(self, spec: ServiceSpec):
        cls = SERVICE_ROLES[spec.role][0]
        if spec.role == "query":
            return QueryService(spec.data_dir, self.bus)
        return cls(
            spec.data_dir,
            bus=self.bus,
            scheduler=self.scheduler,
            clock=self.clock,
            ids=self.ids,
            config=self.config,
        )

    def _find(self, role: str):
        for spec in self.topology.services:
            if spec.role == role:
                return self.services[spec.name]
        return None

    # -- harness operations -------------------------------------------------

    @property
    def gateway_base_url(self) -> str:
        return self.http.base_url if self.http else ""

    def request(self, method: str, path: str, body: dict | None = None,
                token: str | None = None) -> tuple[int, dict]:
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        with self.lock:
            return self.gateway.handle(method, path, headers, body)

    def inject_fault(self, spec: FaultSpec) -> None:
        if not self.clock.is_simulated:
            raise UnsupportedInWallClockMode("fault injection needs the simulated clock")
        self.bus.inject_fault(spec)

    def clear_faults(self) -> None:
        self.bus.clear_faults()

    def drain(self, max_steps: int = 1_000_000) -> QuiescenceReport:
        """Run to quiescence; the report covers traffic since the last drain."""
        if not self.clock.is_simulated:
            raise UnsupportedInWallClockMode("drain needs the simulated clock")
        steps = self.scheduler.run_until_idle(max_steps)
        now = self.bus.counters.snapshot()
        delta = {k: now[k] - self._drained_counters[k] for k in now}
        self._drained_counters = now
        return QuiescenceReport(steps=steps, **delta)

    def stores(self) -> dict[str, object]:
        return {
            name: svc.store for name, svc in self.services.items() if hasattr(svc, "store")
        }

    def event_log_bytes(self) -> bytes:
        """Concatenated store logs in topology order, for determinism checks."""
        chunks = []
        for spec in self.topology.services:
            path = Path(spec.data_dir) / "events.log"
            if path.exists():
                chunks.append(f"# {spec.name}\n".encode())
                chunks.append(path.read_bytes())
        return b"".join(chunks)

    def restart_gateway(self) -> None:
        """Crash-restart: rebuild the gateway object and rebind its port."""
        port = 0
        if self.http is not None:
            port = self.http.port
            self.http.stop()
            self.http = None
        query = self._find("query")
        user = self._find("user")
        self.gateway = Gateway(
            bus=self.bus,
            clock=self.clock,
            ids=self.ids,
            token_secret=self.config["token_secret"],
            query_backend=query,
            login_backend=user.authenticate if user else self._no_login,
        )
        if self.topology.start_http:
            self.http = GatewayHTTPServer(self.gateway, self.lock, port=port)

    def stop(self) -> None:
        if self.http is not None:
            self.http.stop()
            self.http = None
        if self._pump_thread is not None:
            self.scheduler.stop_pump()
            self._pump_thread.join(timeout=2)
        for service in self.services.values():
            store = getattr(service, "store", None)
            if store is not None:
                store.close()


def compose(topology: SystemTopology) -> SystemHandle:
    return SystemHandle(topology)
