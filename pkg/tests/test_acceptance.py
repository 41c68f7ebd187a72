"""Acceptance suite: one test per criterion, each printing a PASS line.

Criteria:
  1. feature-complete end-to-end scenario over HTTP in under 10 s
  2. replay equivalence over >= 1000 random valid commands (zero tolerance)
  3. rebuild equivalence for every projection (canonical byte-equality)
  4. saga atomicity across 200 seeded fault scenarios in under 60 s
  5. optimistic concurrency: 4 writers x 100 appends vs the serial oracle
  6. lifecycle table: exactly 3 legal (state, action) pairs out of 15
  7. isolation: multi-process launch; foreign data directory refused
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
import time
import requests

from conftest import BASE_CONFIG, Rig, admin_token, make_system, register_user
from hacknizer.chassis.aggregate import fold_aggregate
from hacknizer.chassis.bus import FaultSpec
from hacknizer.config import dump_config
from hacknizer.errors import CommandRejected
from hacknizer.services.hackathon import (
    ACTIONS,
    STATES,
    VALIDATING_DEFINITION,
    HackathonService,
)
from hacknizer.services.page import PageService
from hacknizer.services.query import PROJECTIONS
from hacknizer.services.saga import SagaCoordinator
from hacknizer.services.team import TeamService
from hacknizer.services.user import UserService

ORGANIZER_ACTOR = {"user_id": "usr-org", "roles": ["organizer", "participant"]}


def passed(name: str) -> None:
    print(f"\nACCEPTANCE PASS: {name}")


# =============================================================================
# 1. Feature-complete scenario (all eight features, HTTP, < 10 s, lag 0)
# =============================================================================


def test_feature_complete_scenario_under_ten_seconds(tmp_path):
    started = time.monotonic()
    system = make_system(tmp_path, seed=2026, start_http=True)
    try:
        system.drain()
        base = system.gateway_base_url
        session = requests.Session()

        def call(method, path, body=None, token=None, expect=None):
            headers = {"Authorization": f"Bearer {token}"} if token else {}
            response = session.request(
                method, f"{base}{path}", json=body, headers=headers, timeout=5
            )
            if expect is not None:
                assert response.status_code == expect, (path, response.text)
            return response.json()

        def settle(ack, token):
            system.drain()
            outcome = call("GET", f"/api/commands/{ack['command_id']}", token=token, expect=200)
            assert outcome["status"] == "succeeded", outcome
            return outcome["result"]

        # 1) user access control: register, roles, login
        admin = admin_token(system)
        org_ack = call("POST", "/api/users", {
            "email": "organizer@hack.dev", "display_name": "Orla", "password": "organizer-pw",
        }, expect=202)
        org_id = settle(org_ack, admin)["user_id"]
        call("POST", f"/api/users/{org_id}/roles", {"role": "organizer"}, token=admin, expect=202)
        system.drain()
        organizer = call("POST", "/api/auth/login",
                         {"email": "organizer@hack.dev", "password": "organizer-pw"}, expect=200)
        participants = []
        for i in range(3):
            ack = call("POST", "/api/users", {
                "email": f"p{i}@hack.dev", "display_name": f"Player {i}",
                "password": f"player-pw-{i}",
            }, expect=202)
            settle(ack, admin)
            participants.append(call(
                "POST", "/api/auth/login",
                {"email": f"p{i}@hack.dev", "password": f"player-pw-{i}"}, expect=200,
            ))

        # 2) hackathon creation and edition
        ack = call("POST", "/api/hackathons", {
            "title": "Winter Jam", "description": "desk-scale", "start_ms": 1_767_312_000_000,
            "end_ms": 1_767_398_400_000, "capacity": 5, "team_min": 1, "team_max": 3,
        }, token=organizer["token"], expect=202)
        hk = settle(ack, admin)["hackathon_id"]
        ack = call("PATCH", f"/api/hackathons/{hk}",
                   {"patch": {"title": "Winter Jam 2026"}}, token=organizer["token"], expect=202)
        settle(ack, admin)

        # 3) sponsor and award registration
        ack = call("POST", f"/api/hackathons/{hk}/sponsors",
                   {"sponsor": {"sponsor_id": "sp-acme", "name": "Acme", "tier": "gold"}},
                   token=organizer["token"], expect=202)
        settle(ack, admin)
        ack = call("POST", f"/api/hackathons/{hk}/awards",
                   {"award": {"award_id": "aw-grand", "title": "Grand Prize",
                              "sponsor_id": "sp-acme"}},
                   token=organizer["token"], expect=202)
        settle(ack, admin)

        # 4) web page customization (theme, sections, publish)
        ack = call("PATCH", f"/api/pages/{hk}/theme",
                   {"theme": {"primary_color": "#112233", "accent_color": "#ffcc00"}},
                   token=organizer["token"], expect=202)
        settle(ack, admin)
        ack = call("PATCH", f"/api/pages/{hk}/sections", {"ops": [
            {"op": "add", "section": {"section_id": "sponsors", "kind": "sponsors"}},
            {"op": "add", "section": {"section_id": "winner", "kind": "winner"}},
        ]}, token=organizer["token"], expect=202)
        settle(ack, admin)
        ack = call("POST", f"/api/pages/{hk}/publish", {}, token=organizer["token"], expect=202)
        settle(ack, admin)

        # 5) participant registration (saga)
        ack = call("POST", f"/api/hackathons/{hk}/transition",
                   {"action": "open_registration"}, token=organizer["token"], expect=202)
        settle(ack, admin)
        for participant in participants:
            saga_ack = call("POST", f"/api/hackathons/{hk}/participants", {},
                            token=participant["token"], expect=202)
            system.drain()
            saga = call("GET", f"/api/sagas/{saga_ack['saga_id']}",
                        token=participant["token"], expect=200)
            assert saga["status"] == "Completed", saga

        # 6) team composition
        ack = call("POST", "/api/teams", {"hackathon_id": hk, "name": "Pole Stars"},
                   token=participants[0]["token"], expect=202)
        team_id = settle(ack, admin)["team_id"]
        for participant in participants[1:]:
            dashboard = call("GET", "/api/me/dashboard", token=participant["token"], expect=200)
            assert dashboard["hackathons"][0]["hackathon_id"] == hk
            ack = call("POST", f"/api/teams/{team_id}/members", {},
                       token=participant["token"], expect=202)
            settle(ack, admin)

        # 7) project submission (after start)
        ack = call("POST", f"/api/hackathons/{hk}/transition", {"action": "start"},
                   token=organizer["token"], expect=202)
        settle(ack, admin)
        ack = call("POST", f"/api/teams/{team_id}/project",
                   {"project": {"title": "Aurora", "repo_url": "git://aurora"}},
                   token=participants[0]["token"], expect=202)
        settle(ack, admin)

        # 8) winning project choice (saga)
        ack = call("POST", f"/api/hackathons/{hk}/transition", {"action": "end"},
                   token=organizer["token"], expect=202)
        settle(ack, admin)
        saga_ack = call("POST", f"/api/hackathons/{hk}/winner",
                        {"team_id": team_id, "award_id": "aw-grand"},
                        token=organizer["token"], expect=202)
        system.drain()
        winner_saga = call("GET", f"/api/sagas/{saga_ack['saga_id']}",
                           token=organizer["token"], expect=200)
        assert winner_saga["status"] == "Completed", winner_saga

        overview = call("GET", f"/api/hackathons/{hk}", expect=200)
        assert overview["state"] == "WinnerDeclared"
        assert overview["winner"]["team_name"] == "Pole Stars"
        assert overview["winner"]["award_title"] == "Grand Prize"
        assert overview["participant_count"] == 3
        assert overview["projection_lag"] == 0

        page = call("GET", f"/api/pages/{hk}", expect=200)
        winner_section = next(s for s in page["sections"] if s["kind"] == "winner")
        assert winner_section["winner"]["team_name"] == "Pole Stars"
        assert page["projection_lag"] == 0

        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"scenario took {elapsed:.2f}s"
        passed(f"feature-complete scenario in {elapsed:.2f}s with projection_lag 0")
    finally:
        system.stop()


# =============================================================================
# 2. Replay equivalence over >= 1000 random valid commands
# =============================================================================


class LiveMirror:
    """Independent in-memory states fed only by bus deliveries, never reloads."""

    def __init__(self, bus, definitions):
        self.definitions = definitions
        self.states: dict[str, object] = {}
        self.versions: dict[str, int] = {}
        self.order_violations: list[str] = []
        topics = sorted({f"{t}.events" for t in definitions})
        for topic in topics:
            bus.subscribe(topic, "acceptance-mirror", self._apply)

    def _apply(self, env):
        definition = self.definitions[env.stream_type]
        expected = self.versions.get(env.stream_id, 0) + 1
        if env.sequence != expected:
            self.order_violations.append(f"{env.stream_id}: {env.sequence} != {expected}")
        self.versions[env.stream_id] = env.sequence
        state = self.states.get(env.stream_id)
        if state is None:
            state = definition.initial_state()
        self.states[env.stream_id] = definition.apply(state, env)


class CommandFuzzer:
    """Issues only commands that are valid for the current live state."""

    def __init__(self, rig, rng):
        self.rng = rng
        self.rig = rig
        self.users = rig.service(UserService, admin_email=None, admin_password=None)
        self.hackathons = rig.service(HackathonService)
        self.teams = rig.service(TeamService)
        self.pages = rig.service(PageService)
        self.sagas = rig.service(SagaCoordinator)
        self.admin = {"user_id": "usr-root", "roles": ["admin"]}
        self.user_ids: list[str] = []
        self.organizers: list[str] = []
        self.hk_ids: list[str] = []
        self.team_ids: list[str] = []
        self.counter = 0
        self.issued = 0

    def next_id(self, prefix):
        self.counter += 1
        return f"{prefix}-{self.counter}"

    def pick(self, items):
        return items[self.rng.randrange(len(items))]

    def actor(self, user_id):
        account = self.users.get_account(user_id)
        return {"user_id": user_id, "roles": list(account.roles)}

    # -- candidate command builders, one closure per valid option --------------

    def candidates(self):
        options = [self.register_user]
        if self.user_ids:
            options.append(self.assign_organizer)
        if self.organizers:
            options.append(self.create_hackathon)
        for hk_id in self.hk_ids:
            hk = self.hackathons.get_hackathon(hk_id)
            options.extend(self.hackathon_options(hk_id, hk))
        for team_id in self.team_ids:
            options.extend(self.team_options(team_id))
        return options

    def hackathon_options(self, hk_id, hk):
        options = []
        organizer = {"user_id": hk.organizer_id, "roles": ["organizer", "participant"]}
        if hk.state in ("Draft", "RegistrationOpen"):
            options.append(lambda: self.hackathons.edit_hackathon(
                organizer, hk_id, {"title": f"Renamed {self.next_id('t')}"}
            ))
        if hk.state != "WinnerDeclared":
            options.append(lambda: self.hackathons.add_sponsor(
                organizer, hk_id, {"sponsor_id": self.next_id("sp"), "name": "S"}
            ))
            options.append(lambda: self.hackathons.add_award(
                organizer, hk_id, {"award_id": self.next_id("aw"), "title": "A"}
            ))
        action = {"Draft": "open_registration", "RegistrationOpen": "start",
                  "InProgress": "end"}.get(hk.state)
        if action:
            options.append(lambda: self.transition(organizer, hk_id, action))
        if hk.state == "RegistrationOpen":
            if hk.slots_used < hk.capacity:
                options.append(lambda: self.hackathons.reserve_registration_slot(
                    hk_id, self.next_id("corr")
                ))
                fresh = [u for u in self.user_ids
                         if self.teams.find_participant(hk_id, u) is None]
                if fresh:
                    user = self.pick(fresh)
                    options.append(lambda: self.register_participant(hk_id, user))
        pending = [rid for rid, r in hk.reservations.items() if r["status"] == "pending"]
        if pending:
            rid = self.pick(pending)
            options.append(lambda: self.hackathons.release_registration_slot(hk_id, rid))
        if hk.state in ("RegistrationOpen", "InProgress"):
            members = self.confirmed_users(hk_id)
            free = [u for u in members
                    if self.teams.find_participant(hk_id, u).team_id is None]
            if free:
                user = self.pick(free)
                options.append(lambda: self.create_team(hk_id, user))
        page = self.pages.get_page(hk_id)
        if page is not None:
            options.append(lambda: self.pages.update_theme(
                organizer, hk_id,
                {"primary_color": f"#{self.rng.randrange(16**6):06x}",
                 "accent_color": "#ffffff"},
            ))
            options.append(lambda: self.pages.edit_sections(
                organizer, hk_id,
                [{"op": "add", "section": {"section_id": self.next_id("sec"),
                                           "kind": "markdown", "body": "x"}}],
            ))
            if not page.published:
                options.append(lambda: self.pages.publish_page(organizer, hk_id))
        return options

    def team_options(self, team_id):
        team = self.teams.get_team(team_id)
        if team is None or team.disbanded:
            return []
        hk = self.hackathons.get_hackathon(team.hackathon_id)
        options = []
        members = list(team.members)
        if hk.state in ("RegistrationOpen", "InProgress"):
            joinable = [
                u for u in self.confirmed_users(team.hackathon_id)
                if self.teams.find_participant(team.hackathon_id, u).team_id is None
            ]
            if joinable and len(members) < hk.team_max:
                user = self.pick(joinable)
                options.append(lambda: self.teams.join_team(user, team_id))
        if members:
            participant_id = self.pick(members)
            participant_user = self.user_of_participant(team.hackathon_id, participant_id)
            if participant_user and hk.state in ("RegistrationOpen", "InProgress"):
                options.append(lambda: self.teams.leave_team(participant_user, team_id))
            if (participant_user and hk.state == "InProgress"
                    and len(members) >= hk.team_min):
                options.append(lambda: self.teams.submit_project(
                    participant_user, team_id,
                    {"title": f"P{self.counter}", "repo_url": "git://x"},
                ))
        return options

    def confirmed_users(self, hk_id):
        return [
            u for u in self.user_ids if self.teams.find_participant(hk_id, u) is not None
        ]

    def user_of_participant(self, hk_id, participant_id):
        for user in self.user_ids:
            participant = self.teams.find_participant(hk_id, user)
            if participant and participant.participant_id == participant_id:
                return user
        return None

    # -- compound commands ------------------------------------------------------

    def register_user(self):
        n = self.next_id("u")
        result = self.users.register_user(f"{n}@fuzz.dev", f"User {n}", "password123")
        self.user_ids.append(result["user_id"])

    def assign_organizer(self):
        user = self.pick(self.user_ids)
        self.users.assign_role(self.admin, user, "organizer")
        if user not in self.organizers:
            self.organizers.append(user)

    def create_hackathon(self):
        organizer = self.pick(self.organizers)
        result = self.hackathons.create_hackathon(
            self.actor(organizer), f"Hack {self.next_id('h')}", "", 1, 2**53,
            capacity=self.rng.randrange(2, 6), team_min=1,
            team_max=self.rng.randrange(2, 4),
        )
        self.hk_ids.append(result["hackathon_id"])

    def transition(self, organizer, hk_id, action):
        self.hackathons.transition(organizer, hk_id, action)

    def register_participant(self, hk_id, user_id):
        self.sagas.start_saga(
            "participant_registration", {"hackathon_id": hk_id, "user_id": user_id}
        )

    def create_team(self, hk_id, user_id):
        result = self.teams.create_team(user_id, hk_id, f"Team {self.next_id('tm')}")
        self.team_ids.append(result["team_id"])

    def step(self):
        options = self.candidates()
        command = self.pick(options)
        command()
        self.issued += 1
        self.rig.drain()


def test_replay_equivalence_over_1000_commands(tmp_path):
    rig = Rig(tmp_path, seed=20260808)
    rng = random.Random(977)
    fuzzer = CommandFuzzer(rig, rng)
    definitions = {}
    for service in (fuzzer.users, fuzzer.hackathons, fuzzer.teams, fuzzer.pages, fuzzer.sagas):
        definitions.update(service.definitions)
    public = {k: v for k, v in definitions.items() if k != "user_cred"}
    mirror = LiveMirror(rig.bus, public)

    rejected = []
    for _ in range(1000):
        try:
            fuzzer.step()
        except CommandRejected as err:
            rejected.append(err.code)
    rig.drain()

    assert fuzzer.issued + len(rejected) == 1000
    assert not rejected, f"fuzzer issued invalid commands: {rejected[:5]}"
    assert not mirror.order_violations, mirror.order_violations[:5]

    # zero tolerance: every mirror state equals the fold of its persisted stream
    compared = 0
    for service in (fuzzer.users, fuzzer.hackathons, fuzzer.teams, fuzzer.pages, fuzzer.sagas):
        for stream_type, definition in service.definitions.items():
            if stream_type == "user_cred":
                continue
            for stream_id in service.store.stream_ids(stream_type):
                folded = fold_aggregate(definition, service.store.load(stream_id))
                assert mirror.states[stream_id] == folded, stream_id
                assert mirror.versions[stream_id] == service.store.head(stream_id).current_version
                compared += 1
    assert compared >= 100, f"only {compared} streams exercised"
    passed(
        f"replay equivalence: 1000 commands, {compared} streams, "
        "mirror == fold with zero tolerance"
    )


# =============================================================================
# 3. Rebuild equivalence for every projection
# =============================================================================


def test_rebuild_equivalence_after_full_scenario(tmp_path):
    system = make_system(tmp_path, seed=31)
    try:
        system.drain()
        organizer = register_user(system, "org@x.io", roles=("organizer",))
        from conftest import make_hackathon

        hk = make_hackathon(system, organizer, capacity=3)
        system.request(
            "POST", f"/api/hackathons/{hk}/transition",
            {"action": "open_registration"}, token=organizer["token"],
        )
        system.drain()
        for i in range(2):
            member = register_user(system, f"m{i}@x.io")
            system.request(
                "POST", f"/api/hackathons/{hk}/participants", {}, token=member["token"]
            )
            system.drain()
        system.request("POST", f"/api/pages/{hk}/publish", {}, token=organizer["token"])
        system.drain()

        query = system.services["query"]
        for name in PROJECTIONS:
            incremental = query.canonical(name)
            rebuilt = query.canonical_rebuilt(name)
            assert rebuilt == incremental, f"projection {name} diverged"
        passed(f"rebuild equivalence: {len(PROJECTIONS)} projections byte-equal in canonical form")
    finally:
        system.stop()


# =============================================================================
# 4. Saga atomicity under faults: 200 seeded scenarios < 60 s
# =============================================================================


FAULT_TOPICS = (
    "hackathon.commands", "hackathon.replies", "team.commands", "team.replies",
    "hackathon.events", "participant.events", "saga.events",
)


def run_fault_scenario(tmp_path, index):
    scenario_rng = random.Random(5000 + index)
    rig = Rig(tmp_path / f"s{index}", seed=9000 + index)
    hackathons = rig.service(HackathonService)
    teams = rig.service(TeamService)
    coordinator = rig.service(SagaCoordinator)

    capacity = scenario_rng.choice([1, 2, 3])
    hk = hackathons.create_hackathon(
        ORGANIZER_ACTOR, "Fuzz", "", 1, 2**53, capacity=capacity, team_min=1, team_max=4
    )["hackathon_id"]
    hackathons.transition(ORGANIZER_ACTOR, hk, "open_registration")
    rig.drain()

    for topic in FAULT_TOPICS:
        for kind in ("drop", "duplicate", "delay"):
            if scenario_rng.random() < 0.5:
                rate = round(scenario_rng.uniform(0.05, 0.3), 3)
                delay = (0, scenario_rng.randrange(100, 1500)) if kind == "delay" else (0, 0)
                rig.bus.inject_fault(FaultSpec(kind, topic, rate, delay))

    users = [f"usr-{i}" for i in range(scenario_rng.randrange(2, 5))]
    saga_ids = []
    for user in users + [users[0]]:  # one duplicate registration attempt
        saga_ids.append(
            coordinator.start_saga(
                "participant_registration", {"hackathon_id": hk, "user_id": user}
            )["saga_id"]
        )
    rig.drain(max_steps=500_000)

    # -- per-saga atomicity: exactly one of the two end states -------------------
    hk_state = hackathons.get_hackathon(hk)
    for saga_id in saga_ids:
        saga = coordinator.get_instance(saga_id)
        assert saga.status in ("Completed", "Aborted"), (index, saga_id, saga.status)
        reservation_id = hk_state.by_correlation.get(saga_id)
        reservation = hk_state.reservations.get(reservation_id) if reservation_id else None
        user = saga.input["user_id"]
        participant = teams.find_participant(hk, user)
        confirmed_by_this_saga = (
            participant is not None
            and teams.fold(
                teams.definitions["registration_index"], f"reg::{hk}::{user}"
            )[0].get("correlation_id") == saga_id
        )
        if saga.status == "Completed":
            assert confirmed_by_this_saga, (index, saga_id)
            assert reservation is not None and reservation["status"] == "consumed"
        else:
            assert not confirmed_by_this_saga, (index, saga_id)
            assert reservation is None or reservation["status"] == "released"

    # -- global capacity accounting ------------------------------------------------
    pending = [r for r in hk_state.reservations.values() if r["status"] == "pending"]
    assert pending == [], (index, pending)
    consumed = sum(1 for r in hk_state.reservations.values() if r["status"] == "consumed")
    confirmed = len(teams.store.stream_ids("participant"))
    assert hk_state.slots_used == consumed == confirmed, (
        index, hk_state.slots_used, consumed, confirmed,
    )
    assert hk_state.slots_used <= capacity

    # soundness: the accepted stream replays without an illegal transition
    fold_aggregate(VALIDATING_DEFINITION, hackathons.store.load(hk))

    # -- winner phase in a quarter of the scenarios ----------------------------------
    declared_without_submission = 0
    if index % 4 == 0:
        confirmed_users = [u for u in users if teams.find_participant(hk, u)]
        hackathons.add_award(ORGANIZER_ACTOR, hk, {"award_id": "aw", "title": "A"})
        hackathons.transition(ORGANIZER_ACTOR, hk, "start")
        rig.drain(max_steps=500_000)
        team_id = None
        if confirmed_users:
            team_id = teams.create_team(confirmed_users[0], hk, "W")["team_id"]
            if scenario_rng.random() < 0.5:
                teams.submit_project(confirmed_users[0], team_id, {"title": "P"})
        hackathons.transition(ORGANIZER_ACTOR, hk, "end")
        rig.drain(max_steps=500_000)
        if team_id is not None:
            coordinator.start_saga(
                "winner_declaration",
                {"hackathon_id": hk, "team_id": team_id, "award_id": "aw"},
            )
            rig.drain(max_steps=500_000)
        final = hackathons.get_hackathon(hk)
        if final.winner is not None:
            team = teams.get_team(final.winner["team_id"])
            if team is None or team.project is None:
                declared_without_submission = 1
    return declared_without_submission


def test_saga_atomicity_under_200_fault_scenarios(tmp_path):
    started = time.monotonic()
    winner_violations = 0
    for index in range(200):
        winner_violations += run_fault_scenario(tmp_path, index)
    elapsed = time.monotonic() - started
    assert winner_violations == 0
    assert elapsed < 60.0, f"fault scenarios took {elapsed:.1f}s"
    passed(
        f"saga atomicity: 200 seeded fault scenarios in {elapsed:.1f}s, "
        "zero leaked reservations, zero winners without submission"
    )


# =============================================================================
# 5. Optimistic concurrency: 4 writers x 100 vs serial oracle
# =============================================================================


def test_optimistic_concurrency_matches_serial_oracle(tmp_path):
    import threading

    from hacknizer.chassis.clock import SimulatedClock
    from hacknizer.chassis.ids import IdSource
    from hacknizer.chassis.store import EventStore
    from hacknizer.errors import VersionConflict

    store = EventStore(tmp_path / "contested", clock=SimulatedClock(), ids=IdSource())
    accepted = []
    lock = threading.Lock()

    def writer(writer_id):
        for attempt in range(100):
            payload = {"writer": writer_id, "attempt": attempt}
            while True:
                expected = store.head("hot").current_version
                try:
                    version = store.append("hot", "hackathon", expected, [("T", payload)])
                except VersionConflict:
                    continue
                with lock:
                    accepted.append((version, payload))
                break

    threads = [__import__("threading").Thread(target=writer, args=(w,)) for w in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    log = store.load("hot")
    sequences = [e.sequence for e in log]
    assert sequences == list(range(1, 401)), "sequences not contiguous 1..k"
    ids = [e.event_id for e in log]
    assert len(set(ids)) == 400, "duplicate event ids"

    oracle = EventStore(tmp_path / "oracle", clock=SimulatedClock(), ids=IdSource())
    for version, payload in sorted(accepted):
        oracle.append("hot", "hackathon", version - 1, [("T", payload)])
    assert [(e.sequence, e.payload) for e in oracle.load("hot")] == [
        (e.sequence, e.payload) for e in log
    ], "accepted set differs from serial oracle replay"
    passed("optimistic concurrency: 400 contested appends equal the serial oracle")


# =============================================================================
# 6. Lifecycle table: exactly the 3 legal transitions
# =============================================================================


BUILD_PATH = {
    "Draft": (),
    "RegistrationOpen": ("open_registration",),
    "InProgress": ("open_registration", "start"),
    "Ended": ("open_registration", "start", "end"),
}


def test_lifecycle_table_brute_force(tmp_path):
    legal = set()
    checked = 0
    for state in STATES:
        for action in ACTIONS:
            rig = Rig(tmp_path / f"{state}-{action}")
            svc = rig.service(HackathonService)
            hk = svc.create_hackathon(ORGANIZER_ACTOR, "T", "", 1, 2)["hackathon_id"]
            for step in BUILD_PATH.get(state, ()):
                svc.transition(ORGANIZER_ACTOR, hk, step)
            if state == "WinnerDeclared":
                for step in BUILD_PATH["Ended"]:
                    svc.transition(ORGANIZER_ACTOR, hk, step)
                svc.add_award(ORGANIZER_ACTOR, hk, {"award_id": "aw", "title": "A"})
                svc.record_winner(hk, "tm", "aw", BASE_CONFIG["saga_token"])
            assert svc.get_hackathon(hk).state == state
            checked += 1
            try:
                svc.transition(ORGANIZER_ACTOR, hk, action)
                legal.add((state, action))
            except CommandRejected as err:
                assert err.code == "InvalidTransition"
    assert checked == 15
    assert legal == {
        ("Draft", "open_registration"),
        ("RegistrationOpen", "start"),
        ("InProgress", "end"),
    }
    passed("lifecycle table: 15 pairs brute-forced, exactly 3 legal transitions")


# =============================================================================
# 7. Isolation: multi-process launch, foreign data directory refused
# =============================================================================


def launch(role, config_path):
    return subprocess.Popen(
        [sys.executable, "-m", "hacknizer", "run", "--service", role,
         "--config", str(config_path)],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
    )


def wait_ready(process, deadline_s=20):
    start = time.monotonic()
    while time.monotonic() - start < deadline_s:
        line = process.stdout.readline()
        if "ready" in line:
            return line
        if process.poll() is not None:
            raise AssertionError(f"process exited early: {process.stdout.read()}")
    raise AssertionError("service never became ready")


def test_multi_process_isolation(tmp_path):
    broker = tmp_path / "broker"
    shared = {
        "broker_dir": str(broker),
        "token_secret": "mp-secret",
        "saga_token": "mp-saga",
        "scrypt_n": 256,
    }
    roles = ["user", "hackathon", "team", "page", "saga", "query"]
    processes = []
    try:
        for role in roles:
            config = dict(shared, service=role, data_dir=str(tmp_path / role))
            if role == "user":
                config.update(admin_email="root@mp.dev", admin_password="root-password")
            path = tmp_path / f"{role}.conf"
            path.write_text(dump_config(config))
            processes.append(launch(role, path))
        gateway_config = dict(shared, service="gateway", port=0)
        gateway_path = tmp_path / "gateway.conf"
        gateway_path.write_text(dump_config(gateway_config))
        gateway = launch("gateway", gateway_path)
        processes.append(gateway)

        for process in processes[:-1]:
            wait_ready(process)
        ready_line = wait_ready(gateway)
        port = int(ready_line.rsplit("port", 1)[1].strip())
        base = f"http://127.0.0.1:{port}"

        # live query round-trip over the file bus
        listing = requests.get(f"{base}/api/hackathons", timeout=10)
        assert listing.status_code == 200
        assert listing.json()["hackathons"] == []

        # a command crosses processes and resolves
        ack = requests.post(f"{base}/api/users", json={
            "email": "mp@x.dev", "display_name": "MP", "password": "password123",
        }, timeout=10)
        assert ack.status_code == 202
        login = None
        deadline = time.monotonic() + 15
        while time.monotonic() < deadline:
            login = requests.post(f"{base}/api/auth/login", json={
                "email": "mp@x.dev", "password": "password123",
            }, timeout=10)
            if login.status_code == 200:
                break
            time.sleep(0.2)
        assert login is not None and login.status_code == 200, login.text

        # the refusal case: team service pointed at the user service's directory
        foreign = dict(shared, service="team", data_dir=str(tmp_path / "user"))
        foreign_path = tmp_path / "foreign.conf"
        foreign_path.write_text(dump_config(foreign))
        refused = subprocess.run(
            [sys.executable, "-m", "hacknizer", "run", "--service", "team",
             "--config", str(foreign_path)],
            capture_output=True, text=True, timeout=30,
        )
        assert refused.returncode != 0
        assert "stream type" in refused.stderr.lower() or "stream type" in refused.stdout.lower()
        passed("isolation: 7 processes with disjoint stores; foreign directory refused")
    finally:
        for process in processes:
            process.terminate()
        for process in processes:
            try:
                process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                process.kill()
