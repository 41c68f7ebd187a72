"""Read side: projections, rebuild equivalence, checkpoints, query endpoints."""

from __future__ import annotations

import pytest

from conftest import make_hackathon, make_system, register_user
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.errors import CommandRejected
from hacknizer.services.query import PROJECTIONS, QueryService


def event(event_id, stream_id, stream_type, event_type, payload, seq=1):
    return EventEnvelope(
        event_id=event_id,
        stream_id=stream_id,
        stream_type=stream_type,
        sequence=seq,
        event_type=event_type,
        payload=payload,
        occurred_at=0,
        correlation_id="",
        causation_id="",
    )


HK_CREATED = event(
    "e1", "hk-1", "hackathon", "HackathonCreated",
    {
        "hackathon_id": "hk-1", "organizer_id": "usr-1", "title": "T",
        "description": "", "start_ms": 1, "end_ms": 2, "capacity": 10,
        "team_min": 1, "team_max": 5,
    },
)


class BareQuery(QueryService):
    """Query service detached from a live bus for pure reducer tests."""

    def __init__(self, tmp_path):
        class _NoBus:
            archive = {}

            def subscribe(self, *a):
                pass

            def pending_for(self, group):
                return 0

        super().__init__(tmp_path, _NoBus())


@pytest.fixture
def bare(tmp_path):
    return BareQuery(tmp_path / "q")


def test_hackathon_created_appears_with_zero_counts(bare):
    bare.apply_event("overview", HK_CREATED)
    view = bare.get_overview("hk-1")
    assert view["title"] == "T"
    assert view["team_count"] == 0 and view["participant_count"] == 0
    assert view["state"] == "Draft"


def test_duplicate_envelope_leaves_model_unchanged(bare):
    bare.apply_event("overview", HK_CREATED)
    snapshot = bare.canonical("overview")
    bare.apply_event("overview", HK_CREATED)  # same event_id redelivered
    assert bare.canonical("overview") == snapshot


def test_counts_match_a_counting_oracle(bare):
    """Oracle: count the events directly, then compare to the projection."""
    bare.apply_event("overview", HK_CREATED)
    deliveries = [
        event("p1", "prt-1", "participant", "ParticipantRegistered",
              {"participant_id": "prt-1", "hackathon_id": "hk-1", "user_id": "u1",
               "reservation_id": "r1"}),
        event("p2", "prt-2", "participant", "ParticipantRegistered",
              {"participant_id": "prt-2", "hackathon_id": "hk-1", "user_id": "u2",
               "reservation_id": "r2"}),
        event("p3", "prt-3", "participant", "ParticipantRegistered",
              {"participant_id": "prt-3", "hackathon_id": "hk-1", "user_id": "u3",
               "reservation_id": "r3"}),
        event("t1", "tm-1", "team", "TeamCreated",
              {"team_id": "tm-1", "hackathon_id": "hk-1", "name": "A",
               "creator_participant_id": "prt-1"}),
        event("t2", "tm-1", "team", "TeamMemberJoined", {"participant_id": "prt-2"}, seq=2),
        event("t3", "tm-1", "team", "TeamMemberJoined", {"participant_id": "prt-3"}, seq=3),
    ]
    for env in deliveries:
        bare.apply_event("teams", env)
    expected_participants = sum(
        1 for e in deliveries if e.event_type == "ParticipantRegistered"
    )
    expected_teams = sum(1 for e in deliveries if e.event_type == "TeamCreated")
    view = bare.get_overview("hk-1")
    assert view["participant_count"] == expected_participants == 3
    assert view["team_count"] == expected_teams == 1
    assert bare.get_roster("tm-1")["members"][2]["participant_id"] == "prt-3"


def test_unknown_event_types_are_ignored(bare):
    bare.apply_event("overview", event("x1", "hk-9", "hackathon", "SomethingNew", {"v": 2}))
    assert bare.models["overview"] == {}


def test_poison_envelope_is_quarantined_and_projection_continues(bare):
    poison = event("bad", "hk-1", "hackathon", "HackathonEdited", {"no_patch_key": 1})
    bare.apply_event("overview", HK_CREATED)
    bare.apply_event("overview", poison)
    assert bare.dead_letters and bare.dead_letters[0]["event_id"] == "bad"
    bare.apply_event(
        "overview", event("e2", "hk-1", "hackathon", "RegistrationOpened", {}, seq=2)
    )
    assert bare.get_overview("hk-1")["state"] == "RegistrationOpen"


def test_query_errors(bare):
    with pytest.raises(CommandRejected) as err:
        bare.get_overview("hk-ghost")
    assert err.value.code == "NotFound"
    bare.apply_event(
        "pages",
        event("pg1", "pg::hk-1", "page", "PageCreated",
              {"hackathon_id": "hk-1", "theme": {}, "sections": []}),
    )
    with pytest.raises(CommandRejected) as err:
        bare.get_public_page("hk-1")
    assert err.value.code == "NotPublished"


# -- against a composed system ----------------------------------------------------


def scripted_system(tmp_path):
    handle = make_system(tmp_path, seed=3)
    handle.drain()
    organizer = register_user(handle, "org@x.io", roles=("organizer",))
    hk = make_hackathon(handle, organizer, capacity=4)
    handle.request(
        "POST", f"/api/hackathons/{hk}/sponsors",
        {"sponsor": {"name": "Acme", "tier": "gold"}}, token=organizer["token"],
    )
    handle.request(
        "POST", f"/api/hackathons/{hk}/transition",
        {"action": "open_registration"}, token=organizer["token"],
    )
    handle.drain()
    alice = register_user(handle, "alice@x.io")
    handle.request("POST", f"/api/hackathons/{hk}/participants", {}, token=alice["token"])
    handle.drain()
    handle.request("POST", "/api/teams", {"hackathon_id": hk, "name": "A"}, token=alice["token"])
    handle.request(f"POST", f"/api/pages/{hk}/publish", {}, token=organizer["token"])
    handle.drain()
    return handle, hk


def query_service(handle):
    return handle.services["query"]


def test_rebuild_equals_incremental_for_every_projection(tmp_path):
    handle, _ = scripted_system(tmp_path)
    try:
        query = query_service(handle)
        for name in PROJECTIONS:
            assert query.canonical_rebuilt(name) == query.canonical(name), name
    finally:
        handle.stop()


def test_rebuild_twice_is_identical(tmp_path):
    handle, _ = scripted_system(tmp_path)
    try:
        query = query_service(handle)
        for name in PROJECTIONS:
            assert query.canonical_rebuilt(name) == query.canonical_rebuilt(name)
    finally:
        handle.stop()


def test_empty_logs_give_empty_models(tmp_path):
    handle = make_system(tmp_path, admin_email=None, admin_password=None)
    try:
        handle.drain()
        query = query_service(handle)
        for name in PROJECTIONS:
            assert query.rebuild(name) == {}
            assert query.models[name] == {}
    finally:
        handle.stop()


def test_checkpoint_restore_resumes_from_position(tmp_path):
    handle, hk = scripted_system(tmp_path)
    try:
        query = query_service(handle)
        checkpoint_path = query.checkpoint()
        assert checkpoint_path.exists()

        fresh = QueryService(query.data_dir, handle.bus)
        assert fresh.restore() is True
        for name in PROJECTIONS:
            assert fresh.canonical(name) == query.canonical(name), name

        # later events reach the restored instance through replay
        status, body = handle.request("GET", f"/api/hackathons/{hk}")
        assert status == 200 and body["projection_lag"] == 0
    finally:
        handle.stop()


def test_projection_lag_zero_after_drain_and_counts_backlog(tmp_path):
    handle, hk = scripted_system(tmp_path)
    try:
        status, body = handle.request("GET", f"/api/hackathons/{hk}")
        assert body["projection_lag"] == 0
        assert body["participant_count"] == 1
        assert body["sponsor_count"] == 1
    finally:
        handle.stop()


def test_dashboard_and_roster_resolve_names(tmp_path):
    handle, hk = scripted_system(tmp_path)
    try:
        query = query_service(handle)
        alice_id = next(
            u["user_id"] for u in query.models["directory"].values()
            if u["email"] == "alice@x.io"
        )
        dashboard = query.get_dashboard(alice_id)
        assert len(dashboard["hackathons"]) == 1
        entry = dashboard["hackathons"][0]
        assert entry["team"]["name"] == "A"
        roster = query.get_roster(entry["team"]["team_id"])
        assert roster["members"][0]["display_name"] == "Someone"
    finally:
        handle.stop()
