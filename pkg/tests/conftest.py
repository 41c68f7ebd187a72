"""Shared fixtures: a light service rig and a fully composed system."""

from __future__ import annotations

import random

import pytest

from hacknizer.chassis.bus import InProcessBus
from hacknizer.chassis.clock import SimulatedClock
from hacknizer.chassis.ids import IdSource
from hacknizer.chassis.scheduler import Scheduler
from hacknizer.harness import compose, default_topology

ADMIN_EMAIL = "admin@test.dev"
ADMIN_PASSWORD = "admin-password"

BASE_CONFIG = {
    "admin_email": ADMIN_EMAIL,
    "admin_password": ADMIN_PASSWORD,
    "scrypt_n": 256,  # fast KDF profile for tests
    "token_secret": "test-secret",
    "saga_token": "test-saga-token",
}


class Rig:
    """Minimal runtime for wiring individual services in unit tests."""

    def __init__(self, tmp_path, seed=0, config=None):
        self.tmp_path = tmp_path
        self.clock = SimulatedClock()
        self.rng = random.Random(seed)
        self.ids = IdSource(self.rng)
        self.scheduler = Scheduler(self.clock)
        self.bus = InProcessBus(self.scheduler, self.rng)
        self.config = {**BASE_CONFIG, **(config or {})}
        self._count = 0

    def service(self, cls, **extra_config):
        directory = self.tmp_path / f"svc-{self._count}-{cls.__name__.lower()}"
        self._count += 1
        svc = cls(
            directory,
            bus=self.bus,
            scheduler=self.scheduler,
            clock=self.clock,
            ids=self.ids,
            config={**self.config, **extra_config},
        )
        svc.start()
        return svc

    def drain(self, max_steps=200_000):
        return self.scheduler.run_until_idle(max_steps)


@pytest.fixture
def rig(tmp_path):
    return Rig(tmp_path)


def make_system(tmp_path, seed=0, start_http=False, clock_mode="simulated", **config):
    topology = default_topology(
        tmp_path, seed=seed, start_http=start_http, clock_mode=clock_mode
    )
    topology.config = {**BASE_CONFIG, **config}
    return compose(topology)


@pytest.fixture
def system(tmp_path):
    handle = make_system(tmp_path / "sys")
    handle.drain()
    yield handle
    handle.stop()


@pytest.fixture
def http_system(tmp_path):
    handle = make_system(tmp_path / "sys", start_http=True)
    handle.drain()
    yield handle
    handle.stop()


# -- scripted personas ---------------------------------------------------------


def admin_token(handle) -> str:
    status, body = handle.request(
        "POST", "/api/auth/login", {"email": ADMIN_EMAIL, "password": ADMIN_PASSWORD}
    )
    assert status == 200, body
    return body["token"]


def register_user(handle, email, display_name="Someone", password="password123",
                  roles=()) -> dict:
    status, ack = handle.request(
        "POST", "/api/users",
        {"email": email, "display_name": display_name, "password": password},
    )
    assert status == 202, ack
    handle.drain()
    token = admin_token(handle)
    status, outcome = handle.request("GET", f"/api/commands/{ack['command_id']}", token=token)
    assert status == 200 and outcome["status"] == "succeeded", outcome
    user_id = outcome["result"]["user_id"]
    for role in roles:
        status, role_ack = handle.request(
            "POST", f"/api/users/{user_id}/roles", {"role": role}, token=token
        )
        assert status == 202, role_ack
    handle.drain()
    status, session = handle.request(
        "POST", "/api/auth/login", {"email": email, "password": password}
    )
    assert status == 200, session
    return {"user_id": user_id, "token": session["token"], "email": email}


def resolve_command(handle, command_id, token) -> dict:
    status, body = handle.request("GET", f"/api/commands/{command_id}", token=token)
    assert status == 200, body
    return body


def make_hackathon(handle, organizer, capacity=10, team_min=1, team_max=5,
                   title="Test Hack") -> str:
    status, ack = handle.request(
        "POST",
        "/api/hackathons",
        {
            "title": title,
            "description": "testing",
            "start_ms": 1_767_312_000_000,
            "end_ms": 1_767_398_400_000,
            "capacity": capacity,
            "team_min": team_min,
            "team_max": team_max,
        },
        token=organizer["token"],
    )
    assert status == 202, ack
    handle.drain()
    outcome = resolve_command(handle, ack["command_id"], organizer["token"])
    assert outcome["status"] == "succeeded", outcome
    return outcome["result"]["hackathon_id"]
