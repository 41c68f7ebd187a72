"""Hackathon management: lifecycle, sponsors and awards, reservations, winner."""

from __future__ import annotations

import pytest

from hacknizer.chassis.aggregate import fold_aggregate
from hacknizer.errors import CommandRejected
from hacknizer.services.hackathon import (
    ACTIONS,
    STATES,
    HackathonService,
    VALIDATING_DEFINITION,
)

ORGANIZER = {"user_id": "usr-org", "roles": ["organizer", "participant"]}
OTHER_ORGANIZER = {"user_id": "usr-other", "roles": ["organizer", "participant"]}
ADMIN = {"user_id": "usr-root", "roles": ["admin"]}
PARTICIPANT = {"user_id": "usr-p", "roles": ["participant"]}
SAGA_TOKEN = "test-saga-token"


@pytest.fixture
def svc(rig):
    return rig.service(HackathonService)


def create(svc, capacity=10, team_min=1, team_max=5):
    result = svc.create_hackathon(
        ORGANIZER, "Hack", "desc", start_ms=100, end_ms=200,
        capacity=capacity, team_min=team_min, team_max=team_max,
    )
    return result["hackathon_id"]


def advance(svc, hk, *actions):
    for action in actions:
        svc.transition(ORGANIZER, hk, action)


def code_of(err):
    return err.value.code


# -- creation and edition ---------------------------------------------------


def test_organizer_creates_draft_hackathon(svc):
    hk = create(svc)
    state = svc.get_hackathon(hk)
    assert state.state == "Draft"
    assert state.organizer_id == "usr-org"
    assert svc.store.head(hk).current_version == 1


def test_participant_cannot_create(svc):
    with pytest.raises(CommandRejected) as err:
        svc.create_hackathon(PARTICIPANT, "t", "", 1, 2)
    assert code_of(err) == "Forbidden"


def test_start_after_end_is_invalid_schedule(svc):
    with pytest.raises(CommandRejected) as err:
        svc.create_hackathon(ORGANIZER, "t", "", start_ms=200, end_ms=100)
    assert code_of(err) == "InvalidSchedule"


def test_zero_capacity_is_invalid(svc):
    with pytest.raises(CommandRejected) as err:
        svc.create_hackathon(ORGANIZER, "t", "", 1, 2, capacity=0)
    assert code_of(err) == "InvalidCapacity"


def test_edit_in_draft_patches_title(svc):
    hk = create(svc)
    svc.edit_hackathon(ORGANIZER, hk, {"title": "Renamed"})
    assert svc.get_hackathon(hk).title == "Renamed"


def test_edit_after_end_is_locked(svc):
    hk = create(svc)
    advance(svc, hk, "open_registration", "start", "end")
    with pytest.raises(CommandRejected) as err:
        svc.edit_hackathon(ORGANIZER, hk, {"title": "Nope"})
    assert code_of(err) == "EditLocked"


def test_capacity_cannot_drop_below_usage(svc):
    hk = create(svc, capacity=10)
    advance(svc, hk, "open_registration")
    for i in range(5):
        svc.reserve_registration_slot(hk, f"corr-{i}")
    with pytest.raises(CommandRejected) as err:
        svc.edit_hackathon(ORGANIZER, hk, {"capacity": 2})
    assert code_of(err) == "CapacityBelowUsage"


def test_only_owner_or_admin_edits(svc):
    hk = create(svc)
    with pytest.raises(CommandRejected):
        svc.edit_hackathon(OTHER_ORGANIZER, hk, {"title": "X"})
    svc.edit_hackathon(ADMIN, hk, {"title": "Admin edit"})
    assert svc.get_hackathon(hk).title == "Admin edit"


# -- sponsors and awards --------------------------------------------------------


def test_sponsor_and_award_register(svc):
    hk = create(svc)
    sponsor = svc.add_sponsor(ORGANIZER, hk, {"sponsor_id": "sp-1", "name": "Acme", "tier": "gold"})
    assert sponsor["sponsor_id"] == "sp-1"
    award = svc.add_award(ORGANIZER, hk, {"title": "Prize", "sponsor_id": "sp-1"})
    state = svc.get_hackathon(hk)
    assert [s["name"] for s in state.sponsors] == ["Acme"]
    assert state.awards[0]["award_id"] == award["award_id"]


def test_award_with_unknown_sponsor_rejected(svc):
    hk = create(svc)
    with pytest.raises(CommandRejected) as err:
        svc.add_award(ORGANIZER, hk, {"title": "Prize", "sponsor_id": "sp-ghost"})
    assert code_of(err) == "UnknownSponsor"


def test_duplicate_ids_rejected(svc):
    hk = create(svc)
    svc.add_sponsor(ORGANIZER, hk, {"sponsor_id": "sp-1", "name": "A"})
    with pytest.raises(CommandRejected) as err:
        svc.add_sponsor(ORGANIZER, hk, {"sponsor_id": "sp-1", "name": "B"})
    assert code_of(err) == "DuplicateId"
    svc.add_award(ORGANIZER, hk, {"award_id": "aw-1", "title": "A"})
    with pytest.raises(CommandRejected) as err:
        svc.add_award(ORGANIZER, hk, {"award_id": "aw-1", "title": "B"})
    assert code_of(err) == "DuplicateId"


# -- lifecycle table -----------------------------------------------------------


LEGAL = {
    ("Draft", "open_registration"),
    ("RegistrationOpen", "start"),
    ("InProgress", "end"),
}

BUILD_PATH = {
    "Draft": (),
    "RegistrationOpen": ("open_registration",),
    "InProgress": ("open_registration", "start"),
    "Ended": ("open_registration", "start", "end"),
}


def put_in_state(svc, state):
    hk = create(svc)
    advance(svc, hk, *BUILD_PATH.get(state, ()))
    if state == "WinnerDeclared":
        advance(svc, hk, *BUILD_PATH["Ended"])
        svc.add_award(ORGANIZER, hk, {"award_id": "aw", "title": "Prize"})
        svc.record_winner(hk, "tm-1", "aw", SAGA_TOKEN)
    assert svc.get_hackathon(hk).state == state
    return hk


def test_exhaustive_transition_table_has_exactly_three_legal_pairs(rig):
    """Brute force all 5 states x 3 actions against the enumerated oracle."""
    observed_legal = set()
    for state in STATES:
        for action in ACTIONS:
            svc = rig.service(HackathonService)
            hk = put_in_state(svc, state)
            try:
                svc.transition(ORGANIZER, hk, action)
                observed_legal.add((state, action))
            except CommandRejected as err:
                assert err.code == "InvalidTransition", (state, action, err.code)
    assert observed_legal == LEGAL


def test_unknown_action_is_invalid_transition(svc):
    hk = create(svc)
    with pytest.raises(CommandRejected) as err:
        svc.transition(ORGANIZER, hk, "launch")
    assert code_of(err) == "InvalidTransition"


def test_validating_fold_accepts_every_produced_stream(svc):
    hk = put_in_state(svc, "WinnerDeclared")
    fold_aggregate(VALIDATING_DEFINITION, svc.store.load(hk))  # must not raise


# -- registration slots -----------------------------------------------------------


def test_reserve_in_open_state_with_free_capacity(svc):
    hk = create(svc, capacity=2)
    advance(svc, hk, "open_registration")
    result = svc.reserve_registration_slot(hk, "corr-1")
    assert result["reservation_id"].startswith("rsv-")
    assert svc.get_hackathon(hk).slots_used == 1


def test_reserve_when_full_is_capacity_exceeded(svc):
    hk = create(svc, capacity=2)
    advance(svc, hk, "open_registration")
    svc.reserve_registration_slot(hk, "c1")
    svc.reserve_registration_slot(hk, "c2")
    with pytest.raises(CommandRejected) as err:
        svc.reserve_registration_slot(hk, "c3")
    assert code_of(err) == "CapacityExceeded"


def test_reserve_outside_open_state_is_closed(svc):
    hk = create(svc)
    with pytest.raises(CommandRejected) as err:
        svc.reserve_registration_slot(hk, "c1")
    assert code_of(err) == "RegistrationClosed"


def test_same_correlation_reserves_once(svc):
    """Oracle: slots_used must match a single-delivery run exactly."""
    hk = create(svc, capacity=5)
    advance(svc, hk, "open_registration")
    first = svc.reserve_registration_slot(hk, "corr-same")
    second = svc.reserve_registration_slot(hk, "corr-same")
    assert first["reservation_id"] == second["reservation_id"]
    assert svc.get_hackathon(hk).slots_used == 1


def test_release_frees_slot_and_is_idempotent(svc):
    hk = create(svc, capacity=2)
    advance(svc, hk, "open_registration")
    rid = svc.reserve_registration_slot(hk, "c1")["reservation_id"]
    assert svc.release_registration_slot(hk, rid)["released"] is True
    assert svc.get_hackathon(hk).slots_used == 0
    assert svc.release_registration_slot(hk, rid)["released"] is False  # no double free


def test_release_unknown_reservation(svc):
    hk = create(svc)
    advance(svc, hk, "open_registration")
    with pytest.raises(CommandRejected) as err:
        svc.release_registration_slot(hk, "rsv-ghost")
    assert code_of(err) == "UnknownReservation"


def test_unconfirmed_reservation_expires_on_the_simulated_clock(rig):
    svc = rig.service(HackathonService, reservation_expiry_ms=60_000)
    hk = create(svc, capacity=2)
    advance(svc, hk, "open_registration")
    svc.reserve_registration_slot(hk, "c1")
    assert svc.get_hackathon(hk).slots_used == 1
    rig.drain()  # advances past the expiry timer
    state = svc.get_hackathon(hk)
    assert state.slots_used == 0
    released = [e for e in svc.store.load(hk) if e.event_type == "SlotReleased"]
    assert released[0].payload["reason"] == "expired"


# -- winner record -------------------------------------------------------------------


def winner_setup(svc):
    hk = create(svc)
    svc.add_award(ORGANIZER, hk, {"award_id": "aw", "title": "Prize"})
    advance(svc, hk, "open_registration", "start", "end")
    return hk


def test_record_winner_in_ended_state(svc):
    hk = winner_setup(svc)
    svc.record_winner(hk, "tm-1", "aw", SAGA_TOKEN)
    state = svc.get_hackathon(hk)
    assert state.state == "WinnerDeclared"
    assert state.winner == {"team_id": "tm-1", "award_id": "aw"}


def test_record_winner_before_end_is_not_ended(svc):
    hk = create(svc)
    svc.add_award(ORGANIZER, hk, {"award_id": "aw", "title": "P"})
    advance(svc, hk, "open_registration", "start")
    with pytest.raises(CommandRejected) as err:
        svc.record_winner(hk, "tm-1", "aw", SAGA_TOKEN)
    assert code_of(err) == "NotEnded"


def test_second_declaration_is_already_declared(svc):
    hk = winner_setup(svc)
    svc.record_winner(hk, "tm-1", "aw", SAGA_TOKEN)
    with pytest.raises(CommandRejected) as err:
        svc.record_winner(hk, "tm-2", "aw", SAGA_TOKEN)
    assert code_of(err) == "AlreadyDeclared"


def test_unknown_award_rejected(svc):
    hk = winner_setup(svc)
    with pytest.raises(CommandRejected) as err:
        svc.record_winner(hk, "tm-1", "aw-ghost", SAGA_TOKEN)
    assert code_of(err) == "UnknownAward"


def test_winner_requires_the_saga_token(svc):
    hk = winner_setup(svc)
    with pytest.raises(CommandRejected) as err:
        svc.record_winner(hk, "tm-1", "aw", "forged-token")
    assert code_of(err) == "Forbidden"
