"""Team management context (blue): participants, teams, project submission.

Hackathon lifecycle and team-size bounds arrive by subscribing to
hackathon.events and folding a local read-only mirror; no cross-database
reads. Membership uses claim-then-seat: the participant stream is claimed
first (serializing a person's moves), then the team stream seats them,
rolling the claim back when seating is rejected. The one-team rule follows
because a participant can hold at most one live claim.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from hacknizer.chassis.aggregate import AggregateDefinition
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.errors import CommandRejected, VersionConflict, rejected
from hacknizer.services.base import Service

ACTIVE_HACKATHON_STATES = ("RegistrationOpen", "InProgress")


@dataclass(frozen=True)
class Participant:
    participant_id: str = ""
    hackathon_id: str = ""
    user_id: str = ""
    reservation_id: str = ""
    team_id: str | None = None


@dataclass(frozen=True)
class Team:
    team_id: str = ""
    hackathon_id: str = ""
    name: str = ""
    members: tuple[str, ...] = ()
    project: dict | None = None
    disbanded: bool = False


def _apply_participant(state: Participant, env: EventEnvelope) -> Participant:
    p = env.payload
    kind = env.event_type
    if kind == "ParticipantRegistered":
        return Participant(
            participant_id=p["participant_id"],
            hackathon_id=p["hackathon_id"],
            user_id=p["user_id"],
            reservation_id=p["reservation_id"],
        )
    if kind == "MembershipClaimed":
        return replace(state, team_id=p["team_id"])
    if kind == "MembershipCleared":
        return replace(state, team_id=None)
    return state


def _apply_team(state: Team, env: EventEnvelope) -> Team:
    p = env.payload
    kind = env.event_type
    if kind == "TeamCreated":
        return Team(
            team_id=p["team_id"],
            hackathon_id=p["hackathon_id"],
            name=p["name"],
            members=(p["creator_participant_id"],),
        )
    if kind == "TeamMemberJoined":
        return replace(state, members=state.members + (p["participant_id"],))
    if kind == "TeamMemberLeft":
        return replace(
            state, members=tuple(m for m in state.members if m != p["participant_id"])
        )
    if kind == "TeamDisbanded":
        return replace(state, disbanded=True)
    if kind == "ProjectSubmitted":
        return replace(
            state,
            project={
                "title": p["title"],
                "description": p.get("description", ""),
                "repo_url": p.get("repo_url", ""),
                "submitted_at_ms": p["submitted_at_ms"],
            },
        )
    return state


def _apply_registration_index(state: dict, env: EventEnvelope) -> dict:
    if env.event_type == "ParticipantIndexed":
        return dict(env.payload)
    return state


def _apply_name_index(state: dict, env: EventEnvelope) -> dict:
    if env.event_type == "NameClaimed":
        return {"claimed": True, "team_id": env.payload["team_id"]}
    if env.event_type == "NameReleased":
        return {"claimed": False, "team_id": None}
    return state


PARTICIPANT_DEFINITION = AggregateDefinition("participant", Participant, _apply_participant)
TEAM_DEFINITION = AggregateDefinition("team", Team, _apply_team)
REGISTRATION_INDEX_DEFINITION = AggregateDefinition(
    "registration_index", dict, _apply_registration_index
)
NAME_INDEX_DEFINITION = AggregateDefinition("team_name_index", dict, _apply_name_index)


class TeamService(Service):
    name = "team"
    owned_stream_types = ("team", "participant", "registration_index", "team_name_index")
    definitions = {
        "team": TEAM_DEFINITION,
        "participant": PARTICIPANT_DEFINITION,
        "registration_index": REGISTRATION_INDEX_DEFINITION,
        "team_name_index": NAME_INDEX_DEFINITION,
    }

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.saga_token = self.config.get("saga_token", "saga-secret")
        self._hackathons: dict[str, dict] = {}  # read-only lifecycle mirror
        self._mirror_seen = set()
        self.commands = {
            "ConfirmParticipant": self._cmd_confirm,
            "CheckParticipant": self._cmd_check_participant,
            "CreateTeam": self._cmd_create_team,
            "JoinTeam": self._cmd_join,
            "LeaveTeam": self._cmd_leave,
            "SubmitProject": self._cmd_submit,
            "VerifySubmission": self._cmd_verify_submission,
        }

    def start(self) -> None:
        super().start()
        self.bus.subscribe("hackathon.events", "team-svc", self._on_hackathon_event)

    # -- hackathon mirror ---------------------------------------------------

    def _on_hackathon_event(self, env: EventEnvelope) -> None:
        if not self._mirror_seen.isdisjoint({env.event_id}):
            return
        self._mirror_seen.add(env.event_id)
        p = env.payload
        kind = env.event_type
        if kind == "HackathonCreated":
            self._hackathons[p["hackathon_id"]] = {
                "state": "Draft",
                "team_min": p["team_min"],
                "team_max": p["team_max"],
            }
            return
        entry = self._hackathons.get(env.stream_id)
        if entry is None:
            return
        if kind == "HackathonEdited":
            patch = p["patch"]
            entry["team_min"] = patch.get("team_min", entry["team_min"])
            entry["team_max"] = patch.get("team_max", entry["team_max"])
        elif kind == "RegistrationOpened":
            entry["state"] = "RegistrationOpen"
        elif kind == "HackathonStarted":
            entry["state"] = "InProgress"
        elif kind == "HackathonEnded":
            entry["state"] = "Ended"
        elif kind == "WinnerDeclared":
            entry["state"] = "WinnerDeclared"

    def _hackathon(self, hackathon_id: str) -> dict:
        entry = self._hackathons.get(hackathon_id)
        if entry is None:
            raise rejected("UnknownHackathon", hackathon_id)
        return entry

    # -- command adapters ------------------------------------------------------

    def _cmd_confirm(self, p):
        return self.confirm_participant(
            p["hackathon_id"], p["user_id"], p["reservation_id"], p["registration_correlation_id"]
        )

    def _cmd_check_participant(self, p):
        """Resolution probe: did a confirm with this correlation actually land?"""
        index, version = self.fold(
            REGISTRATION_INDEX_DEFINITION, f"reg::{p['hackathon_id']}::{p['user_id']}"
        )
        if version and index.get("correlation_id") == p["registration_correlation_id"]:
            return {"confirmed": True, "effect": {"participant_id": index["participant_id"]}}
        return {"confirmed": False}

    def _cmd_create_team(self, p):
        actor = p.get("actor") or {}
        return self.create_team(actor.get("user_id", ""), p["hackathon_id"], p["name"])

    def _cmd_join(self, p):
        actor = p.get("actor") or {}
        return self.join_team(actor.get("user_id", ""), p["team_id"])

    def _cmd_leave(self, p):
        actor = p.get("actor") or {}
        return self.leave_team(actor.get("user_id", ""), p["team_id"], p.get("participant_id"))

    def _cmd_submit(self, p):
        actor = p.get("actor") or {}
        return self.submit_project(actor.get("user_id", ""), p["team_id"], p["project"])

    def _cmd_verify_submission(self, p):
        return self.verify_submission(p["team_id"])

    # -- participant registration (saga step) -----------------------------------

    def confirm_participant(self, hackathon_id, user_id, reservation_id, correlation_id) -> dict:
        index_id = f"reg::{hackathon_id}::{user_id}"
        participant_id = self.ids.entity_id("prt")
        try:
            self.store.append(
                index_id,
                "registration_index",
                0,
                [
                    (
                        "ParticipantIndexed",
                        {
                            "participant_id": participant_id,
                            "user_id": user_id,
                            "hackathon_id": hackathon_id,
                            "correlation_id": correlation_id,
                        },
                    )
                ],
                correlation_id=correlation_id,
            )
        except VersionConflict:
            existing, _ = self.fold(REGISTRATION_INDEX_DEFINITION, index_id)
            if existing.get("correlation_id") == correlation_id:
                return {"participant_id": existing["participant_id"]}  # saga retry
            raise rejected("AlreadyRegistered", f"{user_id} already in {hackathon_id}")
        self.store.append(
            participant_id,
            "participant",
            0,
            [
                (
                    "ParticipantRegistered",
                    {
                        "participant_id": participant_id,
                        "hackathon_id": hackathon_id,
                        "user_id": user_id,
                        "reservation_id": reservation_id,
                    },
                )
            ],
            correlation_id=correlation_id,
        )
        return {"participant_id": participant_id}

    def find_participant(self, hackathon_id, user_id) -> Participant | None:
        index, version = self.fold(
            REGISTRATION_INDEX_DEFINITION, f"reg::{hackathon_id}::{user_id}"
        )
        if version == 0:
            return None
        participant, p_version = self.fold(PARTICIPANT_DEFINITION, index["participant_id"])
        return participant if p_version else None

    # -- team composition ---------------------------------------------------------

    def create_team(self, user_id, hackathon_id, team_name) -> dict:
        hk = self._hackathon(hackathon_id)
        if hk["state"] not in ACTIVE_HACKATHON_STATES:
            raise rejected("HackathonNotActive", hk["state"])
        participant = self._require_participant(hackathon_id, user_id)
        team_id = self.ids.entity_id("tm")
        self._claim_membership(participant, team_id)
        try:
            self._reserve_name(hackathon_id, team_name, team_id)
        except CommandRejected:
            self._clear_membership(participant.participant_id)
            raise
        self.store.append(
            team_id,
            "team",
            0,
            [
                (
                    "TeamCreated",
                    {
                        "team_id": team_id,
                        "hackathon_id": hackathon_id,
                        "name": team_name,
                        "creator_participant_id": participant.participant_id,
                    },
                )
            ],
        )
        return {"team_id": team_id}

    def join_team(self, user_id, team_id) -> dict:
        team, team_version = self.fold(TEAM_DEFINITION, team_id)
        if team_version == 0:
            raise rejected("UnknownTeam", team_id)
        hk = self._hackathon(team.hackathon_id)
        if hk["state"] not in ACTIVE_HACKATHON_STATES:
            raise rejected("HackathonNotActive", hk["state"])
        participant = self._require_participant(team.hackathon_id, user_id)
        self._claim_membership(participant, team_id)

        def seat():
            current, version = self.fold(TEAM_DEFINITION, team_id)
            if current.disbanded:
                raise rejected("TeamDisbanded", team_id)
            if participant.participant_id in current.members:
                return {"team_id": team_id}
            if len(current.members) >= hk["team_max"]:
                raise rejected("TeamFull", f"max {hk['team_max']}")
            self.store.append(
                team_id,
                "team",
                version,
                [("TeamMemberJoined", {"participant_id": participant.participant_id})],
            )
            return {"team_id": team_id}

        try:
            return self.retry_append(seat)
        except CommandRejected:
            self._clear_membership(participant.participant_id)
            raise

    def leave_team(self, user_id, team_id, participant_id=None) -> dict:
        team, _ = self._require_team(team_id)
        participant = self._require_participant(team.hackathon_id, user_id)
        if participant_id is not None and participant_id != participant.participant_id:
            raise rejected("Forbidden", "may only remove yourself")

        def unseat():
            current, version = self.fold(TEAM_DEFINITION, team_id)
            if participant.participant_id not in current.members:
                raise rejected("NotTeamMember", participant.participant_id)
            events = [("TeamMemberLeft", {"participant_id": participant.participant_id})]
            if len(current.members) == 1:
                events.append(("TeamDisbanded", {}))
            self.store.append(team_id, "team", version, events)
            return {"team_id": team_id, "disbanded": len(current.members) == 1}

        result = self.retry_append(unseat)
        self._clear_membership(participant.participant_id)
        if result["disbanded"]:
            self._release_name(team.hackathon_id, team.name)
        return result

    def submit_project(self, user_id, team_id, project: dict) -> dict:
        team, _ = self._require_team(team_id)
        hk = self._hackathon(team.hackathon_id)
        participant = self._require_participant(team.hackathon_id, user_id)

        def attempt():
            current, version = self.fold(TEAM_DEFINITION, team_id)
            if participant.participant_id not in current.members:
                raise rejected("NotTeamMember", participant.participant_id)
            if hk["state"] != "InProgress":
                raise rejected("SubmissionClosed", f"state {hk['state']}")
            if len(current.members) < hk["team_min"]:
                raise rejected("TeamTooSmall", f"min {hk['team_min']}")
            self.store.append(
                team_id,
                "team",
                version,
                [
                    (
                        "ProjectSubmitted",
                        {
                            "title": project["title"],
                            "description": project.get("description", ""),
                            "repo_url": project.get("repo_url", ""),
                            "submitted_at_ms": self.clock.now_ms(),
                        },
                    )
                ],
            )
            return {"team_id": team_id}

        return self.retry_append(attempt)

    def verify_submission(self, team_id) -> dict:
        team, version = self.fold(TEAM_DEFINITION, team_id)
        if version == 0:
            raise rejected("UnknownTeam", team_id)
        if team.project is None:
            raise rejected("NoSubmission", team_id)
        return {"team_id": team_id, "title": team.project["title"]}

    def get_team(self, team_id) -> Team | None:
        team, version = self.fold(TEAM_DEFINITION, team_id)
        return team if version else None

    # -- membership claim/seat helpers ---------------------------------------------

    def _require_participant(self, hackathon_id, user_id) -> Participant:
        participant = self.find_participant(hackathon_id, user_id)
        if participant is None:
            raise rejected("NotParticipant", f"{user_id} in {hackathon_id}")
        return participant

    def _require_team(self, team_id) -> tuple[Team, int]:
        team, version = self.fold(TEAM_DEFINITION, team_id)
        if version == 0:
            raise rejected("UnknownTeam", team_id)
        return team, version

    def _claim_membership(self, participant: Participant, team_id: str) -> None:
        def attempt():
            current, version = self.fold(PARTICIPANT_DEFINITION, participant.participant_id)
            if current.team_id is not None:
                raise rejected("AlreadyInTeam", current.team_id)
            self.store.append(
                participant.participant_id,
                "participant",
                version,
                [("MembershipClaimed", {"team_id": team_id})],
            )
            return {}

        self.retry_append(attempt)

    def _clear_membership(self, participant_id: str) -> None:
        def attempt():
            _, version = self.fold(PARTICIPANT_DEFINITION, participant_id)
            self.store.append(
                participant_id, "participant", version, [("MembershipCleared", {})]
            )
            return {}

        self.retry_append(attempt)

    def _reserve_name(self, hackathon_id, team_name, team_id) -> None:
        stream_id = f"tmname::{hackathon_id}::{team_name.strip().lower()}"

        def attempt():
            state, version = self.fold(NAME_INDEX_DEFINITION, stream_id)
            if state.get("claimed"):
                raise rejected("DuplicateTeamName", team_name)
            self.store.append(
                stream_id, "team_name_index", version, [("NameClaimed", {"team_id": team_id})]
            )
            return {}

        self.retry_append(attempt)

    def _release_name(self, hackathon_id, team_name) -> None:
        stream_id = f"tmname::{hackathon_id}::{team_name.strip().lower()}"

        def attempt():
            state, version = self.fold(NAME_INDEX_DEFINITION, stream_id)
            if version == 0 or not state.get("claimed"):
                return {}
            self.store.append(
                stream_id, "team_name_index", version, [("NameReleased", {})]
            )
            return {}

        self.retry_append(attempt)
