"""CQRS read side: denormalized projections, rebuildable from the event log.

Each projection consumes a fixed topic set and its reducer only writes model
regions owned by those topics, so cross-topic arrival order never changes
the final model. That makes a rebuild (replaying the broker archive topic by
topic) byte-equal, in canonical form, to the incrementally maintained model.

Cross-context joins (winner names, member display names, counts) happen at
query time, never at apply time, keeping reducers pure per topic family.
"""

from __future__ import annotations

import json
from pathlib import Path
from hacknizer.chassis.bus import InProcessBus
from hacknizer.chassis.envelope import EventEnvelope, canonical_json
from hacknizer.errors import rejected
from hacknizer.services.page import apply_section_ops

CONSUMER_GROUP = "query"
CHECKPOINT_NAME = "query_checkpoint.json"

COMMAND_TOPICS = tuple(f"{s}.commands" for s in ("user", "hackathon", "team", "page", "saga"))
REPLY_TOPICS = tuple(f"{s}.replies" for s in ("user", "hackathon", "team", "page", "saga"))


# -- reducers (pure per-topic-family updates) ---------------------------------


def _reduce_directory(model: dict, env: EventEnvelope) -> None:
    p = env.payload
    if env.event_type == "UserRegistered":
        model[p["user_id"]] = {
            "user_id": p["user_id"],
            "email": p["email"],
            "display_name": p["display_name"],
            "roles": sorted(p["roles"]),
            "active": True,
        }
    elif env.event_type == "RoleAssigned":
        user = model.get(env.stream_id)
        if user is not None:
            user["roles"] = sorted({*user["roles"], p["role"]})
    elif env.event_type == "UserDeactivated":
        user = model.get(env.stream_id)
        if user is not None:
            user["active"] = False


def _reduce_overview(model: dict, env: EventEnvelope) -> None:
    p = env.payload
    kind = env.event_type
    if kind == "HackathonCreated":
        model[p["hackathon_id"]] = {
            "hackathon_id": p["hackathon_id"],
            "organizer_id": p["organizer_id"],
            "title": p["title"],
            "description": p.get("description", ""),
            "state": "Draft",
            "schedule": {"start_ms": p["start_ms"], "end_ms": p["end_ms"]},
            "capacity": p["capacity"],
            "team_size": {"min": p["team_min"], "max": p["team_max"]},
            "slots_used": 0,
            "sponsors": [],
            "awards": [],
            "winner": None,
        }
        return
    hk = model.get(env.stream_id)
    if hk is None:
        return
    if kind == "HackathonEdited":
        patch = p["patch"]
        for key in ("title", "description", "capacity"):
            if key in patch:
                hk[key] = patch[key]
        if "start_ms" in patch:
            hk["schedule"]["start_ms"] = patch["start_ms"]
        if "end_ms" in patch:
            hk["schedule"]["end_ms"] = patch["end_ms"]
        if "team_min" in patch:
            hk["team_size"]["min"] = patch["team_min"]
        if "team_max" in patch:
            hk["team_size"]["max"] = patch["team_max"]
    elif kind == "SponsorRegistered":
        hk["sponsors"].append(dict(p["sponsor"]))
    elif kind == "AwardRegistered":
        hk["awards"].append(dict(p["award"]))
    elif kind == "RegistrationOpened":
        hk["state"] = "RegistrationOpen"
    elif kind == "HackathonStarted":
        hk["state"] = "InProgress"
    elif kind == "HackathonEnded":
        hk["state"] = "Ended"
    elif kind == "WinnerDeclared":
        hk["state"] = "WinnerDeclared"
        hk["winner"] = {"team_id": p["team_id"], "award_id": p["award_id"]}
    elif kind == "SlotReserved":
        hk["slots_used"] += 1
    elif kind == "SlotReleased":
        hk["slots_used"] -= 1


def _reduce_teams(model: dict, env: EventEnvelope) -> None:
    p = env.payload
    kind = env.event_type
    teams = model.setdefault("teams", {})
    participants = model.setdefault("participants", {})
    if kind == "ParticipantRegistered":
        participants[p["participant_id"]] = {
            "participant_id": p["participant_id"],
            "hackathon_id": p["hackathon_id"],
            "user_id": p["user_id"],
            "team_id": None,
        }
    elif kind == "MembershipClaimed":
        entry = participants.get(env.stream_id)
        if entry is not None:
            entry["team_id"] = p["team_id"]
    elif kind == "MembershipCleared":
        entry = participants.get(env.stream_id)
        if entry is not None:
            entry["team_id"] = None
    elif kind == "TeamCreated":
        teams[p["team_id"]] = {
            "team_id": p["team_id"],
            "hackathon_id": p["hackathon_id"],
            "name": p["name"],
            "members": [p["creator_participant_id"]],
            "project": None,
            "disbanded": False,
        }
    elif kind == "TeamMemberJoined":
        team = teams.get(env.stream_id)
        if team is not None and p["participant_id"] not in team["members"]:
            team["members"].append(p["participant_id"])
    elif kind == "TeamMemberLeft":
        team = teams.get(env.stream_id)
        if team is not None:
            team["members"] = [m for m in team["members"] if m != p["participant_id"]]
    elif kind == "TeamDisbanded":
        team = teams.get(env.stream_id)
        if team is not None:
            team["disbanded"] = True
    elif kind == "ProjectSubmitted":
        team = teams.get(env.stream_id)
        if team is not None:
            team["project"] = {
                "title": p["title"],
                "description": p.get("description", ""),
                "repo_url": p.get("repo_url", ""),
                "submitted_at_ms": p["submitted_at_ms"],
            }


def _reduce_pages(model: dict, env: EventEnvelope) -> None:
    p = env.payload
    kind = env.event_type
    if kind == "PageCreated":
        model[p["hackathon_id"]] = {
            "hackathon_id": p["hackathon_id"],
            "theme": dict(p["theme"]),
            "sections": [dict(s) for s in p["sections"]],
            "published": False,
            "revision": 1,
        }
        return
    for page in model.values():
        if f"pg::{page['hackathon_id']}" == env.stream_id:
            if kind == "ThemeUpdated":
                page["theme"] = dict(p["theme"])
                page["revision"] += 1
            elif kind == "SectionsEdited":
                page["sections"] = [
                    dict(s) for s in apply_section_ops(tuple(page["sections"]), p["ops"])
                ]
                page["revision"] += 1
            elif kind == "PagePublished":
                page["published"] = True
                page["revision"] += 1
            return


def _reduce_sagas(model: dict, env: EventEnvelope) -> None:
    p = env.payload
    kind = env.event_type
    if kind == "SagaStarted":
        model[p["saga_id"]] = {
            "saga_id": p["saga_id"],
            "saga_type": p["saga_type"],
            "status": "Running",
            "input": {k: v for k, v in p["input"].items() if k != "saga_id"},
            "steps": [{"name": n, "status": "pending", "attempts": 0} for n in p["step_names"]],
            "compensations": [],
            "abort_reason": None,
        }
        return
    saga = model.get(env.stream_id)
    if saga is None:
        return
    if kind == "StepCommandIssued":
        saga["steps"][p["step_index"]]["attempts"] = p["attempt"]
    elif kind == "StepSucceeded":
        saga["steps"][p["step_index"]]["status"] = "succeeded"
    elif kind == "StepFailed":
        saga["steps"][p["step_index"]]["status"] = "failed"
        saga["steps"][p["step_index"]]["error"] = p["error"]
        saga["abort_reason"] = {"step": p["step"], **p["error"]}
    elif kind == "CompensationStarted":
        saga["status"] = "Compensating"
    elif kind == "CompensationConfirmed":
        saga["compensations"].append({"step": p["step"], "outcome": p["outcome"]})
    elif kind == "SagaCompleted":
        saga["status"] = "Completed"
    elif kind == "SagaAborted":
        saga["status"] = "Aborted"
        if p.get("reason"):
            saga["abort_reason"] = p["reason"]


def _reduce_commands(model: dict, env: EventEnvelope) -> None:
    if env.stream_type == "command":
        entry = model.setdefault(env.event_id, {"status": "pending"})
        entry["command"] = env.event_type
        entry["command_id"] = env.event_id
        entry["correlation_id"] = env.correlation_id
    elif env.stream_type == "reply":
        entry = model.setdefault(env.causation_id, {})
        entry.setdefault("command_id", env.causation_id)
        entry["correlation_id"] = env.correlation_id
        entry.setdefault("command", env.payload.get("command"))
        if env.event_type.endswith("Succeeded"):
            entry["status"] = "succeeded"
            entry["result"] = env.payload.get("result", {})
        else:
            entry["status"] = "failed"
            entry["error"] = env.payload.get("error", {})


PROJECTIONS: dict[str, dict] = {
    "directory": {"topics": ("user.events",), "reduce": _reduce_directory},
    "overview": {"topics": ("hackathon.events",), "reduce": _reduce_overview},
    "teams": {"topics": ("team.events", "participant.events"), "reduce": _reduce_teams},
    "pages": {"topics": ("page.events",), "reduce": _reduce_pages},
    "sagas": {"topics": ("saga.events",), "reduce": _reduce_sagas},
    "commands": {"topics": COMMAND_TOPICS + REPLY_TOPICS, "reduce": _reduce_commands},
}


class QueryService:
    """Maintains all read models by consuming the bus; serves the gateway."""

    def __init__(self, data_dir, bus: InProcessBus):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.bus = bus
        self.models: dict[str, dict] = {name: {} for name in PROJECTIONS}
        self.processed: dict[str, set[str]] = {name: set() for name in PROJECTIONS}
        self.dead_letters: list[dict] = []

    def start(self) -> None:
        topics = sorted({t for spec in PROJECTIONS.values() for t in spec["topics"]})
        for topic in topics:
            self.bus.subscribe(
                topic, CONSUMER_GROUP, lambda env, t=topic: self._on_envelope(t, env)
            )

    # -- apply ------------------------------------------------------------

    def _on_envelope(self, topic: str, env: EventEnvelope) -> None:
        for name, spec in PROJECTIONS.items():
            if topic in spec["topics"]:
                self.apply_event(name, env)

    def apply_event(self, projection: str, env: EventEnvelope) -> None:
        """Idempotent per event_id; poison envelopes go to the dead-letter log."""
        if env.event_id in self.processed[projection]:
            return
        self.processed[projection].add(env.event_id)
        try:
            PROJECTIONS[projection]["reduce"](self.models[projection], env)
        except Exception as exc:  # quarantine, keep consuming
            self.dead_letters.append(
                {"projection": projection, "event_id": env.event_id, "error": repr(exc)}
            )

    # -- rebuild ------------------------------------------------------------

    def rebuild(self, projection: str) -> dict:
        """Build the model from scratch off the broker archive."""
        spec = PROJECTIONS[projection]
        model: dict = {}
        seen: set[str] = set()
        for topic in sorted(spec["topics"]):
            for env in self.bus.archive.get(topic, []):
                if env.event_id in seen:
                    continue
                seen.add(env.event_id)
                try:
                    spec["reduce"](model, env)
                except Exception:
                    pass  # mirrors the quarantine path
        return model

    def canonical(self, projection: str) -> str:
        return canonical_json(self.models[projection])

    def canonical_rebuilt(self, projection: str) -> str:
        return canonical_json(self.rebuild(projection))

    # -- checkpoints -----------------------------------------------------------

    def checkpoint(self) -> Path:
        path = self.data_dir / CHECKPOINT_NAME
        doc = {
            "models": self.models,
            "processed": {name: sorted(ids) for name, ids in self.processed.items()},
        }
        path.write_text(canonical_json(doc))
        return path

    def restore(self) -> bool:
        """Load the checkpoint, then catch up by replaying unseen archive entries."""
        path = self.data_dir / CHECKPOINT_NAME
        if not path.exists():
            return False
        doc = json.loads(path.read_text())
        self.models = {name: doc["models"].get(name, {}) for name in PROJECTIONS}
        self.processed = {
            name: set(doc["processed"].get(name, [])) for name in PROJECTIONS
        }
        for name, spec in PROJECTIONS.items():
            for topic in sorted(spec["topics"]):
                for env in self.bus.archive.get(topic, []):
                    self.apply_event(name, env)
        return True

    # -- queries ------------------------------------------------------------------

    def projection_lag(self) -> int:
        return self.bus.pending_for(CONSUMER_GROUP)

    def _teams_of(self, hackathon_id: str) -> list[dict]:
        teams = self.models["teams"].get("teams", {})
        return [t for t in teams.values() if t["hackathon_id"] == hackathon_id]

    def _participants_of(self, hackathon_id: str) -> list[dict]:
        participants = self.models["teams"].get("participants", {})
        return [p for p in participants.values() if p["hackathon_id"] == hackathon_id]

    def _resolve_winner(self, hk: dict) -> dict | None:
        if not hk.get("winner"):
            return None
        team = self.models["teams"].get("teams", {}).get(hk["winner"]["team_id"], {})
        award = next(
            (a for a in hk["awards"] if a["award_id"] == hk["winner"]["award_id"]), {}
        )
        return {
            "team_id": hk["winner"]["team_id"],
            "team_name": team.get("name", ""),
            "award_id": hk["winner"]["award_id"],
            "award_title": award.get("title", ""),
        }

    def _overview_view(self, hk: dict) -> dict:
        live_teams = [t for t in self._teams_of(hk["hackathon_id"]) if not t["disbanded"]]
        return {
            **{k: v for k, v in hk.items() if k != "winner"},
            "team_count": len(live_teams),
            "participant_count": len(self._participants_of(hk["hackathon_id"])),
            "sponsor_count": len(hk["sponsors"]),
            "winner": self._resolve_winner(hk),
            "projection_lag": self.projection_lag(),
        }

    def get_overview(self, hackathon_id: str) -> dict:
        hk = self.models["overview"].get(hackathon_id)
        if hk is None:
            raise rejected("NotFound", hackathon_id)
        return self._overview_view(hk)

    def list_hackathons(self, state: str | None = None) -> dict:
        rows = [
            self._overview_view(hk)
            for hk in self.models["overview"].values()
            if state is None or hk["state"] == state
        ]
        return {"hackathons": rows, "projection_lag": self.projection_lag()}

    def get_public_page(self, hackathon_id: str) -> dict:
        page = self.models["pages"].get(hackathon_id)
        if page is None:
            raise rejected("NotFound", hackathon_id)
        if not page["published"]:
            raise rejected("NotPublished", hackathon_id)
        hk = self.models["overview"].get(hackathon_id, {})
        rendered = []
        for section in page["sections"]:
            kind = section["kind"]
            entry = {"section_id": section["section_id"], "kind": kind}
            if kind == "markdown":
                entry["body"] = section.get("body", "")
            elif kind == "sponsors":
                entry["sponsors"] = hk.get("sponsors", [])
            elif kind == "awards":
                entry["awards"] = hk.get("awards", [])
            elif kind == "schedule":
                entry["schedule"] = hk.get("schedule", {})
            elif kind == "winner":
                entry["winner"] = self._resolve_winner(hk) if hk else None
            rendered.append(entry)
        return {
            "hackathon_id": hackathon_id,
            "title": hk.get("title", ""),
            "theme": page["theme"],
            "sections": rendered,
            "published": True,
            "revision": page["revision"],
            "projection_lag": self.projection_lag(),
        }

    def get_roster(self, team_id: str) -> dict:
        team = self.models["teams"].get("teams", {}).get(team_id)
        if team is None:
            raise rejected("NotFound", team_id)
        directory = self.models["directory"]
        participants = self.models["teams"].get("participants", {})
        members = []
        for pid in team["members"]:
            participant = participants.get(pid, {})
            user = directory.get(participant.get("user_id", ""), {})
            members.append(
                {
                    "participant_id": pid,
                    "user_id": participant.get("user_id", ""),
                    "display_name": user.get("display_name", ""),
                }
            )
        return {
            "team_id": team_id,
            "hackathon_id": team["hackathon_id"],
            "name": team["name"],
            "disbanded": team["disbanded"],
            "members": members,
            "project": team["project"],
            "project_status": "submitted" if team["project"] else "none",
            "projection_lag": self.projection_lag(),
        }

    def get_dashboard(self, user_id: str) -> dict:
        participants = self.models["teams"].get("participants", {})
        teams = self.models["teams"].get("teams", {})
        entries = []
        for participant in participants.values():
            if participant["user_id"] != user_id:
                continue
            hk = self.models["overview"].get(participant["hackathon_id"], {})
            team = teams.get(participant["team_id"]) if participant["team_id"] else None
            entries.append(
                {
                    "hackathon_id": participant["hackathon_id"],
                    "title": hk.get("title", ""),
                    "state": hk.get("state", ""),
                    "participant_id": participant["participant_id"],
                    "team": {"team_id": team["team_id"], "name": team["name"]} if team else None,
                    "submission_state": "submitted" if team and team["project"] else "none",
                }
            )
        return {"user_id": user_id, "hackathons": entries, "projection_lag": self.projection_lag()}

    def get_command(self, command_id: str) -> dict:
        entry = self.models["commands"].get(command_id)
        if entry is None:
            raise rejected("NotFound", command_id)
        return {**entry, "projection_lag": self.projection_lag()}

    def get_saga(self, saga_id: str) -> dict:
        entry = self.models["sagas"].get(saga_id)
        if entry is None:
            raise rejected("NotFound", saga_id)
        return {**entry, "projection_lag": self.projection_lag()}
