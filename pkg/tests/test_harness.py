"""Harness: composition, determinism, drain, fault injection."""

from __future__ import annotations

import pytest

from conftest import make_system, make_hackathon, register_user
from hacknizer.chassis.bus import FaultSpec
from hacknizer.errors import DuplicateService, UnsupportedInWallClockMode
from hacknizer.harness import ServiceSpec, SystemTopology, compose, default_topology


def test_default_topology_composes_and_exposes_gateway(tmp_path):
    handle = make_system(tmp_path, start_http=True)
    try:
        assert handle.gateway_base_url.startswith("http://127.0.0.1:")
        status, body = handle.request("GET", "/api/hackathons")
        assert status == 200 and body["hackathons"] == []
    finally:
        handle.stop()


def test_shared_data_directory_is_refused(tmp_path):
    topology = SystemTopology(
        services=[
            ServiceSpec("user", "user", "red", str(tmp_path / "shared")),
            ServiceSpec("hackathon", "hackathon", "green", str(tmp_path / "shared")),
        ]
    )
    with pytest.raises(DuplicateService):
        compose(topology)


def test_duplicate_service_names_are_refused(tmp_path):
    topology = SystemTopology(
        services=[
            ServiceSpec("svc", "user", "red", str(tmp_path / "a")),
            ServiceSpec("svc", "hackathon", "green", str(tmp_path / "b")),
        ]
    )
    with pytest.raises(DuplicateService):
        compose(topology)


def _scripted_run(base_dir, seed):
    handle = make_system(base_dir, seed=seed)
    try:
        handle.drain()
        organizer = register_user(handle, "org@x.io", roles=("organizer",))
        hk = make_hackathon(handle, organizer, capacity=3)
        handle.request(
            "POST", f"/api/hackathons/{hk}/transition",
            {"action": "open_registration"}, token=organizer["token"],
        )
        handle.drain()
        alice = register_user(handle, "alice@x.io")
        handle.request("POST", f"/api/hackathons/{hk}/participants", {}, token=alice["token"])
        report = handle.drain()
        return handle.event_log_bytes(), report.as_dict()
    finally:
        handle.stop()


def test_same_seed_same_script_gives_byte_identical_logs(tmp_path):
    log_a, report_a = _scripted_run(tmp_path / "run-a", seed=42)
    log_b, report_b = _scripted_run(tmp_path / "run-b", seed=42)
    assert log_a == log_b
    assert report_a == report_b


def test_different_seed_changes_identifiers(tmp_path):
    log_a, _ = _scripted_run(tmp_path / "run-a", seed=1)
    log_b, _ = _scripted_run(tmp_path / "run-b", seed=2)
    assert log_a != log_b


def test_fresh_system_drains_immediately_with_zero_counts(tmp_path):
    handle = make_system(tmp_path, admin_email=None, admin_password=None)
    try:
        report = handle.drain()
        assert report.delivered == report.dropped == report.duplicated == 0
        assert report.steps == 0
    finally:
        handle.stop()


def test_single_publish_single_subscriber_counts_one(tmp_path):
    handle = make_system(tmp_path)
    try:
        handle.drain()
        from hacknizer.chassis.envelope import EventEnvelope

        env = EventEnvelope(
            event_id=handle.ids.event_id(),
            stream_id="x",
            stream_type="hackathon",
            sequence=1,
            event_type="Probe",
            payload={},
            occurred_at=handle.clock.now_ms(),
            correlation_id="",
            causation_id="",
        )
        seen = []
        handle.bus.subscribe("probe.topic", "probe-group", seen.append)
        before = handle.bus.counters.delivered
        handle.bus.publish("probe.topic", env)
        handle.drain()
        assert handle.bus.counters.delivered - before == 1
        assert len(seen) == 1
    finally:
        handle.stop()


def test_rate_zero_fault_changes_nothing(tmp_path):
    def run(with_fault):
        handle = make_system(tmp_path / ("f" if with_fault else "n"), seed=5)
        try:
            handle.drain()
            if with_fault:
                handle.inject_fault(FaultSpec("drop", "*", 0.0))
            register_user(handle, "a@x.io")
            handle.drain()
            return handle.event_log_bytes()
        finally:
            handle.stop()

    assert run(True) == run(False)


def test_fault_scenario_replays_identically_from_seed(tmp_path):
    def run(base):
        handle = make_system(base, seed=77)
        try:
            handle.drain()
            handle.inject_fault(FaultSpec("drop", "*.events", 0.25))
            handle.inject_fault(FaultSpec("duplicate", "*.commands", 0.25))
            organizer = register_user(handle, "org@x.io", roles=("organizer",))
            make_hackathon(handle, organizer)
            report = handle.drain()
            return handle.event_log_bytes(), report.as_dict()
        finally:
            handle.stop()

    assert run(tmp_path / "a") == run(tmp_path / "b")


def test_fault_injection_requires_simulated_clock(tmp_path):
    handle = make_system(tmp_path, clock_mode="wall")
    try:
        with pytest.raises(UnsupportedInWallClockMode):
            handle.inject_fault(FaultSpec("drop", "*", 0.5))
        with pytest.raises(UnsupportedInWallClockMode):
            handle.drain()
    finally:
        handle.stop()


def test_drain_advances_simulated_clock_past_timers(tmp_path):
    handle = make_system(tmp_path)
    try:
        handle.drain()
        start = handle.clock.now_ms()
        fired = []
        handle.scheduler.call_later(30_000, lambda: fired.append(handle.clock.now_ms()))
        handle.drain()
        assert fired == [start + 30_000]
    finally:
        handle.stop()
