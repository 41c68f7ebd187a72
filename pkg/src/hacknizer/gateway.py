"""API gateway: the single entry point for authentication, authorization,
command routing, and query serving.

Mutating routes are fire-and-track: the command is published with a fresh
command_id and the caller gets 202 plus ids to poll via GET /api/commands/…
(saga routes return the saga_id as well). Queries answer synchronously from
the read models. The gateway holds no business state; everything it serves
after a restart comes from the token secret and the read side.

Commands published here carry causation_id "route:<route_id>" so any command
seen on a *.commands topic can be traced back to a route-table entry or a
saga record (no back doors).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable
from urllib.parse import parse_qs, urlsplit

from hacknizer import auth
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.chassis.ids import IdSource
from hacknizer.errors import BrokerUnavailable, CommandRejected

ANY_AUTHENTICATED = "authenticated"


@dataclass(frozen=True)
class RouteEntry:
    route_id: str
    method: str
    path: str
    kind: str  # command | saga | query | login
    required_role: str | None = None  # None = public
    service: str = ""
    command: str = ""
    saga_type: str = ""
    query: str = ""
    schema: tuple[str, ...] = ()
    routing_param: str = ""  # path param used as the command routing key

    def describe(self) -> dict:
        return {
            "route_id": self.route_id,
            "method": self.method,
            "path": self.path,
            "kind": self.kind,
            "required_role": self.required_role,
            "service": self.service,
            "command": self.command,
            "saga_type": self.saga_type,
            "query": self.query,
            "body_fields": list(self.schema),
        }


ROUTES: tuple[RouteEntry, ...] = (
    RouteEntry("register_user", "POST", "/api/users", "command",
               None, "user", "RegisterUser", schema=("email", "display_name", "password")),
    RouteEntry("login", "POST", "/api/auth/login", "login",
               None, schema=("email", "password")),
    RouteEntry("assign_role", "POST", "/api/users/{user_id}/roles", "command",
               "admin", "user", "AssignRole", schema=("role",), routing_param="user_id"),
    RouteEntry("create_hackathon", "POST", "/api/hackathons", "command",
               "organizer", "hackathon", "CreateHackathon",
               schema=("title", "start_ms", "end_ms")),
    RouteEntry("edit_hackathon", "PATCH", "/api/hackathons/{hackathon_id}", "command",
               "organizer", "hackathon", "EditHackathon",
               schema=("patch",), routing_param="hackathon_id"),
    RouteEntry("add_sponsor", "POST", "/api/hackathons/{hackathon_id}/sponsors", "command",
               "organizer", "hackathon", "AddSponsor",
               schema=("sponsor",), routing_param="hackathon_id"),
    RouteEntry("add_award", "POST", "/api/hackathons/{hackathon_id}/awards", "command",
               "organizer", "hackathon", "AddAward",
               schema=("award",), routing_param="hackathon_id"),
    RouteEntry("transition_hackathon", "POST", "/api/hackathons/{hackathon_id}/transition",
               "command", "organizer", "hackathon", "TransitionHackathon",
               schema=("action",), routing_param="hackathon_id"),
    RouteEntry("register_participant", "POST", "/api/hackathons/{hackathon_id}/participants",
               "saga", "participant", saga_type="participant_registration",
               routing_param="hackathon_id"),
    RouteEntry("declare_winner", "POST", "/api/hackathons/{hackathon_id}/winner",
               "saga", "organizer", saga_type="winner_declaration",
               schema=("team_id", "award_id"), routing_param="hackathon_id"),
    RouteEntry("create_team", "POST", "/api/teams", "command",
               "participant", "team", "CreateTeam", schema=("hackathon_id", "name")),
    RouteEntry("join_team", "POST", "/api/teams/{team_id}/members", "command",
               "participant", "team", "JoinTeam", routing_param="team_id"),
    RouteEntry("leave_team", "DELETE", "/api/teams/{team_id}/members/{participant_id}",
               "command", "participant", "team", "LeaveTeam", routing_param="team_id"),
    RouteEntry("submit_project", "POST", "/api/teams/{team_id}/project", "command",
               "participant", "team", "SubmitProject",
               schema=("project",), routing_param="team_id"),
    RouteEntry("update_theme", "PATCH", "/api/pages/{hackathon_id}/theme", "command",
               "organizer", "page", "UpdateTheme",
               schema=("theme",), routing_param="hackathon_id"),
    RouteEntry("edit_sections", "PATCH", "/api/pages/{hackathon_id}/sections", "command",
               "organizer", "page", "EditSections",
               schema=("ops",), routing_param="hackathon_id"),
    RouteEntry("publish_page", "POST", "/api/pages/{hackathon_id}/publish", "command",
               "organizer", "page", "PublishPage", routing_param="hackathon_id"),
    RouteEntry("list_hackathons", "GET", "/api/hackathons", "query", None,
               query="list_hackathons"),
    RouteEntry("get_hackathon", "GET", "/api/hackathons/{hackathon_id}", "query", None,
               query="get_overview"),
    RouteEntry("get_public_page", "GET", "/api/pages/{hackathon_id}", "query", None,
               query="get_public_page"),
    RouteEntry("get_roster", "GET", "/api/teams/{team_id}", "query", ANY_AUTHENTICATED,
               query="get_roster"),
    RouteEntry("get_dashboard", "GET", "/api/me/dashboard", "query", ANY_AUTHENTICATED,
               query="get_dashboard"),
    RouteEntry("get_command", "GET", "/api/commands/{command_id}", "query", ANY_AUTHENTICATED,
               query="get_command"),
    RouteEntry("get_saga", "GET", "/api/sagas/{saga_id}", "query", ANY_AUTHENTICATED,
               query="get_saga"),
)


@dataclass(frozen=True)
class Principal:
    user_id: str
    roles: tuple[str, ...]
    expires_at_ms: int

    def has_role(self, role: str) -> bool:
        return role in self.roles or "admin" in self.roles


@dataclass
class Request:
    method: str
    path: str
    headers: dict = field(default_factory=dict)
    body: dict | None = None


class Gateway:
    def __init__(
        self,
        bus,
        clock,
        ids: IdSource,
        token_secret: str,
        query_backend,
        login_backend: Callable[[str, str], dict],
    ):
        self.bus = bus
        self.clock = clock
        self.ids = ids
        self.token_secret = token_secret
        self.query_backend = query_backend
        self.login_backend = login_backend

    # -- request pipeline ---------------------------------------------------

    def handle(self, method: str, path: str, headers: dict | None = None,
               body: dict | None = None) -> tuple[int, dict]:
        headers = headers or {}
        split = urlsplit(path)
        route, params = self._match(method, split.path)
        if route is None:
            return 404, {"error": "NotFound", "message": f"{method} {split.path}"}
        params.update({k: v[0] for k, v in parse_qs(split.query).items()})

        principal, token_error = self.authenticate_request(headers)
        if route.required_role is not None:
            if principal is None:
                return 401, {"error": "Unauthorized", "message": token_error or "token required"}
            if route.required_role != ANY_AUTHENTICATED and not principal.has_role(
                route.required_role
            ):
                return 403, {"error": "Forbidden", "message": f"requires {route.required_role}"}
        if principal is not None:
            params["principal_user_id"] = principal.user_id

        if route.kind == "login":
            return self._login(route, body or {})
        if route.kind == "query":
            return self._query(route, params)
        if route.kind == "command":
            return self._command(route, params, body or {}, principal)
        return self._saga(route, params, body or {}, principal)

    def authenticate_request(self, headers: dict) -> tuple[Principal | None, str | None]:
        header = headers.get("Authorization") or headers.get("authorization") or ""
        if not header:
            return None, None
        parts = header.split(" ", 1)
        if len(parts) != 2 or parts[0].lower() != "bearer":
            return None, "malformed Authorization header"
        try:
            claims = auth.verify_token(self.token_secret, parts[1], self.clock.now_ms())
        except auth.TokenInvalid as exc:
            return None, str(exc)
        return (
            Principal(claims["user_id"], tuple(claims.get("roles", [])), claims["exp_ms"]),
            None,
        )

    # -- dispatch kinds --------------------------------------------------------

    def _login(self, route: RouteEntry, body: dict) -> tuple[int, dict]:
        bad = self._schema_violation(route, body)
        if bad:
            return bad
        try:
            return 200, self.login_backend(body["email"], body["password"])
        except CommandRejected as err:
            status = 403 if err.code == "AccountInactive" else 401
            return status, {"error": err.code, "message": err.message}

    def _query(self, route: RouteEntry, params: dict) -> tuple[int, dict]:
        try:
            if route.query == "list_hackathons":
                return 200, self.query_backend.list_hackathons(params.get("state"))
            if route.query == "get_overview":
                return 200, self.query_backend.get_overview(params["hackathon_id"])
            if route.query == "get_public_page":
                return 200, self.query_backend.get_public_page(params["hackathon_id"])
            if route.query == "get_roster":
                return 200, self.query_backend.get_roster(params["team_id"])
            if route.query == "get_dashboard":
                return 200, self.query_backend.get_dashboard(params["principal_user_id"])
            if route.query == "get_command":
                return 200, self.query_backend.get_command(params["command_id"])
            if route.query == "get_saga":
                return 200, self.query_backend.get_saga(params["saga_id"])
            return 404, {"error": "NotFound"}
        except CommandRejected as err:
            return 404, {"error": err.code, "message": err.message}

    def _command(self, route: RouteEntry, params: dict, body: dict,
                 principal: Principal | None) -> tuple[int, dict]:
        bad = self._schema_violation(route, body)
        if bad:
            return bad
        payload = {**body, **{k: v for k, v in params.items() if k != "principal_user_id"}}
        if principal is not None:
            payload["actor"] = {"user_id": principal.user_id, "roles": sorted(principal.roles)}
        command_id = self.ids.event_id()
        correlation_id = self.ids.event_id()
        routing = params.get(route.routing_param, "") or command_id
        envelope = EventEnvelope(
            event_id=command_id,
            stream_id=routing,
            stream_type="command",
            sequence=0,
            event_type=route.command,
            payload=payload,
            occurred_at=self.clock.now_ms(),
            correlation_id=correlation_id,
            causation_id=f"route:{route.route_id}",
        )
        try:
            self.bus.publish(f"{route.service}.commands", envelope)
        except BrokerUnavailable as exc:
            return 503, {"error": "BrokerUnavailable", "message": str(exc)}
        return 202, {"command_id": command_id, "correlation_id": correlation_id}

    def _saga(self, route: RouteEntry, params: dict, body: dict,
              principal: Principal | None) -> tuple[int, dict]:
        bad = self._schema_violation(route, body)
        if bad:
            return bad
        saga_id = self.ids.entity_id("sg")
        command_id = self.ids.event_id()
        saga_input = {**body, **{k: v for k, v in params.items() if k != "principal_user_id"}}
        if route.saga_type == "participant_registration" and principal is not None:
            saga_input.setdefault("user_id", principal.user_id)
        envelope = EventEnvelope(
            event_id=command_id,
            stream_id=saga_id,
            stream_type="command",
            sequence=0,
            event_type="StartSaga",
            payload={"saga_type": route.saga_type, "input": saga_input, "saga_id": saga_id},
            occurred_at=self.clock.now_ms(),
            correlation_id=saga_id,
            causation_id=f"route:{route.route_id}",
        )
        try:
            self.bus.publish("saga.commands", envelope)
        except BrokerUnavailable as exc:
            return 503, {"error": "BrokerUnavailable", "message": str(exc)}
        return 202, {"saga_id": saga_id, "command_id": command_id, "correlation_id": saga_id}

    # -- helpers -------------------------------------------------------------------

    def _match(self, method: str, path: str) -> tuple[RouteEntry | None, dict]:
        segments = [s for s in path.split("/") if s]
        for route in ROUTES:
            if route.method != method:
                continue
            pattern = [s for s in route.path.split("/") if s]
            if len(pattern) != len(segments):
                continue
            params = {}
            for want, got in zip(pattern, segments):
                if want.startswith("{") and want.endswith("}"):
                    params[want[1:-1]] = got
                elif want != got:
                    break
            else:
                return route, params
        return None, {}

    @staticmethod
    def _schema_violation(route: RouteEntry, body: dict) -> tuple[int, dict] | None:
        for required in route.schema:
            if required not in body or body[required] in (None, ""):
                return 400, {"error": "SchemaViolation", "field": required}
        return None

    @staticmethod
    def route_table() -> list[dict]:
        return [route.describe() for route in ROUTES]
