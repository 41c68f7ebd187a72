"""Hackathon management context (green): lifecycle, sponsors, awards, capacity.

Lifecycle is a five-state machine (Draft, RegistrationOpen, InProgress,
Ended, WinnerDeclared) with exactly three organizer-driven transitions;
winner declaration moves Ended to WinnerDeclared through the winner saga.
Registration capacity is handled with reservations: reserve increments
slots_used, a confirmation (ParticipantRegistered consumed from team.events)
pins the slot, release or expiry frees it. Reservations are idempotent per
correlation id so saga retries never double-book.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from hacknizer.chassis.aggregate import AggregateDefinition
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.errors import rejected
from hacknizer.services.base import Service, actor_roles, require_role

STATES = ("Draft", "RegistrationOpen", "InProgress", "Ended", "WinnerDeclared")
ACTIONS = ("open_registration", "start", "end")
TRANSITIONS = {
    ("Draft", "open_registration"): ("RegistrationOpened", "RegistrationOpen"),
    ("RegistrationOpen", "start"): ("HackathonStarted", "InProgress"),
    ("InProgress", "end"): ("HackathonEnded", "Ended"),
}

DEFAULT_CAPACITY = 100
DEFAULT_TEAM_MIN = 1
DEFAULT_TEAM_MAX = 5
DEFAULT_RESERVATION_EXPIRY_MS = 60_000

EDITABLE_FIELDS = ("title", "description", "start_ms", "end_ms", "capacity", "team_min", "team_max")


@dataclass(frozen=True)
class Hackathon:
    hackathon_id: str = ""
    organizer_id: str = ""
    title: str = ""
    description: str = ""
    start_ms: int = 0
    end_ms: int = 0
    state: str = "Draft"
    capacity: int = DEFAULT_CAPACITY
    slots_used: int = 0
    team_min: int = DEFAULT_TEAM_MIN
    team_max: int = DEFAULT_TEAM_MAX
    sponsors: tuple[dict, ...] = ()
    awards: tuple[dict, ...] = ()
    winner: dict | None = None
    reservations: dict = field(default_factory=dict)  # reservation_id -> record
    by_correlation: dict = field(default_factory=dict)  # correlation_id -> reservation_id


def _apply(state: Hackathon, env: EventEnvelope) -> Hackathon:
    p = env.payload
    kind = env.event_type
    if kind == "HackathonCreated":
        return Hackathon(
            hackathon_id=p["hackathon_id"],
            organizer_id=p["organizer_id"],
            title=p["title"],
            description=p.get("description", ""),
            start_ms=p["start_ms"],
            end_ms=p["end_ms"],
            capacity=p["capacity"],
            team_min=p["team_min"],
            team_max=p["team_max"],
        )
    if kind == "HackathonEdited":
        return replace(state, **{k: v for k, v in p["patch"].items() if k in EDITABLE_FIELDS})
    if kind == "SponsorRegistered":
        return replace(state, sponsors=state.sponsors + (p["sponsor"],))
    if kind == "AwardRegistered":
        return replace(state, awards=state.awards + (p["award"],))
    if kind == "RegistrationOpened":
        return replace(state, state="RegistrationOpen")
    if kind == "HackathonStarted":
        return replace(state, state="InProgress")
    if kind == "HackathonEnded":
        return replace(state, state="Ended")
    if kind == "WinnerDeclared":
        return replace(
            state,
            state="WinnerDeclared",
            winner={"team_id": p["team_id"], "award_id": p["award_id"]},
        )
    if kind == "SlotReserved":
        reservations = dict(state.reservations)
        reservations[p["reservation_id"]] = {
            "correlation_id": p["correlation_id"],
            "expires_at_ms": p["expires_at_ms"],
            "status": "pending",
        }
        by_corr = dict(state.by_correlation)
        by_corr[p["correlation_id"]] = p["reservation_id"]
        return replace(
            state,
            slots_used=state.slots_used + 1,
            reservations=reservations,
            by_correlation=by_corr,
        )
    if kind == "SlotReleased":
        reservations = dict(state.reservations)
        record = dict(reservations[p["reservation_id"]])
        record["status"] = "released"
        reservations[p["reservation_id"]] = record
        return replace(state, slots_used=state.slots_used - 1, reservations=reservations)
    if kind == "ReservationConsumed":
        reservations = dict(state.reservations)
        record = dict(reservations[p["reservation_id"]])
        record["status"] = "consumed"
        reservations[p["reservation_id"]] = record
        return replace(state, reservations=reservations)
    return state


def _apply_validated(state: Hackathon, env: EventEnvelope) -> Hackathon:
    """Fold that refuses event sequences crossing an illegal transition."""
    kind = env.event_type
    lifecycle = {"RegistrationOpened": "Draft", "HackathonStarted": "RegistrationOpen",
                 "HackathonEnded": "InProgress", "WinnerDeclared": "Ended"}
    if kind in lifecycle and state.state != lifecycle[kind]:
        raise ValueError(f"{kind} from {state.state!r} is illegal")
    if kind == "SlotReserved":
        if state.state != "RegistrationOpen":
            raise ValueError(f"SlotReserved while {state.state!r}")
        if state.slots_used >= state.capacity:
            raise ValueError("SlotReserved beyond capacity")
    if kind in ("SlotReleased", "ReservationConsumed"):
        record = state.reservations.get(env.payload["reservation_id"])
        if record is None or record["status"] != "pending":
            raise ValueError(f"{kind} for non-pending reservation")
    return _apply(state, env)


HACKATHON_DEFINITION = AggregateDefinition("hackathon", Hackathon, _apply)
VALIDATING_DEFINITION = AggregateDefinition("hackathon", Hackathon, _apply_validated)


class HackathonService(Service):
    name = "hackathon"
    owned_stream_types = ("hackathon",)
    definitions = {"hackathon": HACKATHON_DEFINITION}

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.reservation_expiry_ms = int(
            self.config.get("reservation_expiry_ms", DEFAULT_RESERVATION_EXPIRY_MS)
        )
        self.saga_token = self.config.get("saga_token", "saga-secret")
        self._expiry_timers: dict[str, object] = {}
        self._consumed = set()  # dedupe for team.events
        self.commands = {
            "CreateHackathon": self._cmd_create,
            "EditHackathon": self._cmd_edit,
            "AddSponsor": self._cmd_add_sponsor,
            "AddAward": self._cmd_add_award,
            "TransitionHackathon": self._cmd_transition,
            "ReserveSlot": self._cmd_reserve,
            "ReleaseSlot": self._cmd_release,
            "RecordWinner": self._cmd_record_winner,
            "VerifyHackathonEnded": self._cmd_verify_ended,
        }

    def start(self) -> None:
        super().start()
        self.bus.subscribe("participant.events", "hackathon-svc", self._on_team_event)
        self._schedule_recovered_expiries()

    # -- command adapters ---------------------------------------------------

    def _cmd_create(self, p):
        return self.create_hackathon(
            p.get("actor") or {},
            title=p["title"],
            description=p.get("description", ""),
            start_ms=p["start_ms"],
            end_ms=p["end_ms"],
            capacity=p.get("capacity", DEFAULT_CAPACITY),
            team_min=p.get("team_min", DEFAULT_TEAM_MIN),
            team_max=p.get("team_max", DEFAULT_TEAM_MAX),
        )

    def _cmd_edit(self, p):
        return self.edit_hackathon(p.get("actor") or {}, p["hackathon_id"], p["patch"])

    def _cmd_add_sponsor(self, p):
        return self.add_sponsor(p.get("actor") or {}, p["hackathon_id"], p["sponsor"])

    def _cmd_add_award(self, p):
        return self.add_award(p.get("actor") or {}, p["hackathon_id"], p["award"])

    def _cmd_transition(self, p):
        return self.transition(p.get("actor") or {}, p["hackathon_id"], p["action"])

    def _cmd_reserve(self, p):
        return self.reserve_registration_slot(p["hackathon_id"], p["reservation_correlation_id"])

    def _cmd_release(self, p):
        return self.release_registration_slot(
            p["hackathon_id"],
            reservation_id=p.get("reservation_id"),
            correlation_id=p.get("reservation_correlation_id"),
        )

    def _cmd_record_winner(self, p):
        return self.record_winner(
            p["hackathon_id"], p["team_id"], p["award_id"], p.get("saga_token", "")
        )

    def _cmd_verify_ended(self, p):
        return self.verify_ended(p["hackathon_id"])

    # -- operations ----------------------------------------------------------

    def create_hackathon(self, actor, title, description, start_ms, end_ms,
                         capacity=DEFAULT_CAPACITY, team_min=DEFAULT_TEAM_MIN,
                         team_max=DEFAULT_TEAM_MAX) -> dict:
        organizer_id = require_role({"actor": actor}, "organizer")
        if start_ms >= end_ms:
            raise rejected("InvalidSchedule", "start must precede end")
        if capacity < 1:
            raise rejected("InvalidCapacity", str(capacity))
        if not (1 <= team_min <= team_max):
            raise rejected("InvalidCapacity", f"team bounds ({team_min},{team_max})")
        hackathon_id = self.ids.entity_id("hk")
        self.store.append(
            hackathon_id,
            "hackathon",
            0,
            [
                (
                    "HackathonCreated",
                    {
                        "hackathon_id": hackathon_id,
                        "organizer_id": organizer_id,
                        "title": title,
                        "description": description,
                        "start_ms": start_ms,
                        "end_ms": end_ms,
                        "capacity": capacity,
                        "team_min": team_min,
                        "team_max": team_max,
                    },
                )
            ],
        )
        return {"hackathon_id": hackathon_id}

    def edit_hackathon(self, actor, hackathon_id, patch: dict) -> dict:
        def attempt():
            hk, version = self._load(hackathon_id)
            self._require_owner(actor, hk)
            if hk.state not in ("Draft", "RegistrationOpen"):
                raise rejected("EditLocked", f"state {hk.state}")
            clean = {k: v for k, v in patch.items() if k in EDITABLE_FIELDS}
            start = clean.get("start_ms", hk.start_ms)
            end = clean.get("end_ms", hk.end_ms)
            if start >= end:
                raise rejected("InvalidSchedule", "start must precede end")
            if clean.get("capacity", hk.capacity) < hk.slots_used:
                raise rejected(
                    "CapacityBelowUsage", f"{clean['capacity']} < used {hk.slots_used}"
                )
            tmin = clean.get("team_min", hk.team_min)
            tmax = clean.get("team_max", hk.team_max)
            if not (1 <= tmin <= tmax):
                raise rejected("InvalidCapacity", f"team bounds ({tmin},{tmax})")
            self.store.append(
                hackathon_id, "hackathon", version, [("HackathonEdited", {"patch": clean})]
            )
            return {"hackathon_id": hackathon_id}

        return self.retry_append(attempt)

    def add_sponsor(self, actor, hackathon_id, sponsor: dict) -> dict:
        def attempt():
            hk, version = self._load(hackathon_id)
            self._require_owner(actor, hk)
            if hk.state == "WinnerDeclared":
                raise rejected("EditLocked", "hackathon is settled")
            entry = {
                "sponsor_id": sponsor.get("sponsor_id") or self.ids.entity_id("sp"),
                "name": sponsor["name"],
                "tier": sponsor.get("tier", ""),
                "logo_url": sponsor.get("logo_url", ""),
            }
            if any(s["sponsor_id"] == entry["sponsor_id"] for s in hk.sponsors):
                raise rejected("DuplicateId", entry["sponsor_id"])
            self.store.append(
                hackathon_id, "hackathon", version, [("SponsorRegistered", {"sponsor": entry})]
            )
            return {"sponsor_id": entry["sponsor_id"]}

        return self.retry_append(attempt)

    def add_award(self, actor, hackathon_id, award: dict) -> dict:
        def attempt():
            hk, version = self._load(hackathon_id)
            self._require_owner(actor, hk)
            if hk.state == "WinnerDeclared":
                raise rejected("EditLocked", "hackathon is settled")
            entry = {
                "award_id": award.get("award_id") or self.ids.entity_id("aw"),
                "title": award["title"],
                "description": award.get("description", ""),
                "sponsor_id": award.get("sponsor_id"),
            }
            if any(a["award_id"] == entry["award_id"] for a in hk.awards):
                raise rejected("DuplicateId", entry["award_id"])
            if entry["sponsor_id"] and not any(
                s["sponsor_id"] == entry["sponsor_id"] for s in hk.sponsors
            ):
                raise rejected("UnknownSponsor", entry["sponsor_id"])
            self.store.append(
                hackathon_id, "hackathon", version, [("AwardRegistered", {"award": entry})]
            )
            return {"award_id": entry["award_id"]}

        return self.retry_append(attempt)

    def transition(self, actor, hackathon_id, action: str) -> dict:
        def attempt():
            hk, version = self._load(hackathon_id)
            self._require_owner(actor, hk)
            move = TRANSITIONS.get((hk.state, action))
            if move is None:
                raise rejected("InvalidTransition", f"{action} from {hk.state}")
            event_type, new_state = move
            self.store.append(hackathon_id, "hackathon", version, [(event_type, {})])
            return {"hackathon_id": hackathon_id, "state": new_state}

        return self.retry_append(attempt)

    def reserve_registration_slot(self, hackathon_id, correlation_id) -> dict:
        def attempt():
            hk, version = self._load(hackathon_id)
            existing = hk.by_correlation.get(correlation_id)
            if existing is not None:
                return {"reservation_id": existing, "hackathon_id": hackathon_id}
            if hk.state != "RegistrationOpen":
                raise rejected("RegistrationClosed", f"state {hk.state}")
            if hk.slots_used >= hk.capacity:
                raise rejected("CapacityExceeded", f"{hk.slots_used}/{hk.capacity}")
            reservation_id = self.ids.entity_id("rsv")
            expires_at = self.clock.now_ms() + self.reservation_expiry_ms
            self.store.append(
                hackathon_id,
                "hackathon",
                version,
                [
                    (
                        "SlotReserved",
                        {
                            "reservation_id": reservation_id,
                            "correlation_id": correlation_id,
                            "expires_at_ms": expires_at,
                        },
                    )
                ],
            )
            self._schedule_expiry(hackathon_id, reservation_id, expires_at)
            return {"reservation_id": reservation_id, "hackathon_id": hackathon_id}

        return self.retry_append(attempt)

    def release_registration_slot(self, hackathon_id, reservation_id=None, correlation_id=None) -> dict:
        def attempt():
            hk, version = self._load(hackathon_id)
            rid = reservation_id
            if rid is None and correlation_id is not None:
                rid = hk.by_correlation.get(correlation_id)
                if rid is None:  # reservation never happened; nothing to undo
                    return {"hackathon_id": hackathon_id, "released": False}
            record = hk.reservations.get(rid)
            if record is None:
                raise rejected("UnknownReservation", str(rid))
            if record["status"] != "pending":
                return {"hackathon_id": hackathon_id, "released": False}
            self.store.append(
                hackathon_id,
                "hackathon",
                version,
                [("SlotReleased", {"reservation_id": rid, "reason": "released"})],
            )
            self._cancel_expiry(rid)
            return {"hackathon_id": hackathon_id, "released": True}

        return self.retry_append(attempt)

    def record_winner(self, hackathon_id, team_id, award_id, saga_token) -> dict:
        if saga_token != self.saga_token:
            raise rejected("Forbidden", "winner declaration is saga-only")

        def attempt():
            hk, version = self._load(hackathon_id)
            if hk.state == "WinnerDeclared":
                raise rejected("AlreadyDeclared")
            if hk.state != "Ended":
                raise rejected("NotEnded", f"state {hk.state}")
            if not any(a["award_id"] == award_id for a in hk.awards):
                raise rejected("UnknownAward", award_id)
            self.store.append(
                hackathon_id,
                "hackathon",
                version,
                [("WinnerDeclared", {"team_id": team_id, "award_id": award_id})],
            )
            return {"hackathon_id": hackathon_id, "team_id": team_id, "award_id": award_id}

        return self.retry_append(attempt)

    def verify_ended(self, hackathon_id) -> dict:
        hk, version = self._load(hackathon_id)
        if hk.state != "Ended":
            raise rejected("NotEnded", f"state {hk.state}")
        return {"hackathon_id": hackathon_id, "state": hk.state}

    def get_hackathon(self, hackathon_id) -> Hackathon | None:
        state, version = self.fold(HACKATHON_DEFINITION, hackathon_id)
        return state if version else None

    # -- reservation lifecycle ------------------------------------------------

    def _on_team_event(self, env: EventEnvelope) -> None:
        if env.event_type != "ParticipantRegistered" or env.event_id in self._consumed:
            return
        self._consumed.add(env.event_id)
        payload = env.payload

        def attempt():
            hk, version = self._load(payload["hackathon_id"])
            record = hk.reservations.get(payload["reservation_id"])
            if record is None or record["status"] != "pending":
                return {}
            self.store.append(
                payload["hackathon_id"],
                "hackathon",
                version,
                [("ReservationConsumed", {"reservation_id": payload["reservation_id"]})],
            )
            self._cancel_expiry(payload["reservation_id"])
            return {}

        self.retry_append(attempt)

    def _schedule_expiry(self, hackathon_id, reservation_id, expires_at_ms) -> None:
        timer = self.scheduler.call_at(
            expires_at_ms, lambda: self._expire(hackathon_id, reservation_id)
        )
        self._expiry_timers[reservation_id] = timer

    def _cancel_expiry(self, reservation_id) -> None:
        timer = self._expiry_timers.pop(reservation_id, None)
        if timer is not None:
            self.scheduler.cancel(timer)

    def _expire(self, hackathon_id, reservation_id) -> None:
        self._expiry_timers.pop(reservation_id, None)

        def attempt():
            hk, version = self._load(hackathon_id)
            record = hk.reservations.get(reservation_id)
            if record is None or record["status"] != "pending":
                return {}
            self.store.append(
                hackathon_id,
                "hackathon",
                version,
                [("SlotReleased", {"reservation_id": reservation_id, "reason": "expired"})],
            )
            return {}

        self.retry_append(attempt)

    def _schedule_recovered_expiries(self) -> None:
        for stream_id in self.store.stream_ids("hackathon"):
            hk, _ = self._load(stream_id)
            for rid, record in hk.reservations.items():
                if record["status"] == "pending":
                    self._schedule_expiry(stream_id, rid, record["expires_at_ms"])

    # -- helpers ---------------------------------------------------------------

    def _load(self, hackathon_id) -> tuple[Hackathon, int]:
        hk, version = self.fold(HACKATHON_DEFINITION, hackathon_id)
        if version == 0:
            raise rejected("UnknownHackathon", hackathon_id)
        return hk, version

    @staticmethod
    def _require_owner(actor: dict, hk: Hackathon) -> None:
        user_id, roles = actor_roles({"actor": actor})
        if "admin" in roles:
            return
        if "organizer" in roles and user_id == hk.organizer_id:
            return
        raise rejected("Forbidden", "not the organizer of this hackathon")
