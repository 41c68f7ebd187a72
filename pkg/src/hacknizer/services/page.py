"""Web page customization context (yellow): per-hackathon public page.

A page stream is created as a reaction to HackathonCreated, keyed by the
hackathon id so duplicate deliveries collapse on the version-0 append. The
page stores theme plus an ordered section list; data-driven section kinds
(sponsors, awards, schedule, winner) hold no copies of other contexts'
data, the read side resolves them at render time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from hacknizer.chassis.aggregate import AggregateDefinition
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.errors import VersionConflict, rejected
from hacknizer.services.base import Service, actor_roles

SECTION_KINDS = ("markdown", "sponsors", "awards", "schedule", "winner")
HEX_COLOR_RE = re.compile(r"^#[0-9a-fA-F]{6}$")

DEFAULT_THEME = {"primary_color": "#1f6feb", "accent_color": "#f0b429", "logo_url": ""}
DEFAULT_SECTIONS = ({"section_id": "about", "kind": "markdown", "body": "# About\n"},)


@dataclass(frozen=True)
class PageDocument:
    hackathon_id: str = ""
    theme: dict = None
    sections: tuple[dict, ...] = ()
    published: bool = False
    revision: int = 0


def _apply(state: PageDocument, env: EventEnvelope) -> PageDocument:
    p = env.payload
    kind = env.event_type
    if kind == "PageCreated":
        return PageDocument(
            hackathon_id=p["hackathon_id"],
            theme=dict(p["theme"]),
            sections=tuple(dict(s) for s in p["sections"]),
            published=False,
            revision=1,
        )
    if kind == "ThemeUpdated":
        return replace(state, theme=dict(p["theme"]), revision=state.revision + 1)
    if kind == "SectionsEdited":
        return replace(
            state,
            sections=apply_section_ops(state.sections, p["ops"]),
            revision=state.revision + 1,
        )
    if kind == "PagePublished":
        return replace(state, published=True, revision=state.revision + 1)
    return state


def apply_section_ops(sections: tuple[dict, ...], ops: list[dict]) -> tuple[dict, ...]:
    """Apply edit ops in order; raises CommandRejected so a batch is all-or-nothing."""
    result = [dict(s) for s in sections]

    def locate(section_id):
        for i, s in enumerate(result):
            if s["section_id"] == section_id:
                return i
        raise rejected("SectionNotFound", section_id)

    for op in ops:
        kind = op["op"]
        if kind == "add":
            section = dict(op["section"])
            if section.get("kind") not in SECTION_KINDS:
                raise rejected("InvalidSection", f"kind {section.get('kind')!r}")
            if not section.get("section_id"):
                raise rejected("InvalidSection", "missing section_id")
            if any(s["section_id"] == section["section_id"] for s in result):
                raise rejected("SectionExists", section["section_id"])
            at = op.get("at", len(result))
            result.insert(max(0, min(at, len(result))), section)
        elif kind == "remove":
            result.pop(locate(op["section_id"]))
        elif kind == "move":
            i = locate(op["section_id"])
            section = result.pop(i)
            to = max(0, min(op["to"], len(result)))
            result.insert(to, section)
        elif kind == "replace":
            i = locate(op["section_id"])
            section = dict(op["section"])
            section["section_id"] = op["section_id"]
            if section.get("kind") not in SECTION_KINDS:
                raise rejected("InvalidSection", f"kind {section.get('kind')!r}")
            result[i] = section
        else:
            raise rejected("InvalidSection", f"unknown op {kind!r}")
    return tuple(result)


PAGE_DEFINITION = AggregateDefinition("page", PageDocument, _apply)


def page_stream_id(hackathon_id: str) -> str:
    return f"pg::{hackathon_id}"


class PageService(Service):
    name = "page"
    owned_stream_types = ("page",)
    definitions = {"page": PAGE_DEFINITION}

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._organizers: dict[str, str] = {}  # hackathon_id -> organizer_id mirror
        self._seen = set()
        self.commands = {
            "UpdateTheme": self._cmd_update_theme,
            "EditSections": self._cmd_edit_sections,
            "PublishPage": self._cmd_publish,
        }

    def start(self) -> None:
        super().start()
        self.bus.subscribe("hackathon.events", "page-svc", self._on_hackathon_event)

    # -- reaction -------------------------------------------------------------

    def _on_hackathon_event(self, env: EventEnvelope) -> None:
        if env.event_id in self._seen:
            return
        self._seen.add(env.event_id)
        if env.event_type != "HackathonCreated":
            return
        hackathon_id = env.payload["hackathon_id"]
        self._organizers[hackathon_id] = env.payload["organizer_id"]
        try:
            self.store.append(
                page_stream_id(hackathon_id),
                "page",
                0,
                [
                    (
                        "PageCreated",
                        {
                            "hackathon_id": hackathon_id,
                            "theme": dict(DEFAULT_THEME),
                            "sections": [dict(s) for s in DEFAULT_SECTIONS],
                        },
                    )
                ],
                causation_id=env.event_id,
            )
        except VersionConflict:
            pass  # page already exists for this hackathon

    # -- command adapters --------------------------------------------------------

    def _cmd_update_theme(self, p):
        return self.update_theme(p.get("actor") or {}, p["hackathon_id"], p["theme"])

    def _cmd_edit_sections(self, p):
        return self.edit_sections(p.get("actor") or {}, p["hackathon_id"], p["ops"])

    def _cmd_publish(self, p):
        return self.publish_page(p.get("actor") or {}, p["hackathon_id"])

    # -- operations -----------------------------------------------------------------

    def update_theme(self, actor, hackathon_id, theme: dict) -> dict:
        self._require_owner(actor, hackathon_id)
        merged = {**DEFAULT_THEME, **{k: v for k, v in theme.items() if k in DEFAULT_THEME}}
        for key in ("primary_color", "accent_color"):
            if not HEX_COLOR_RE.match(str(merged[key])):
                raise rejected("InvalidColor", f"{key}={merged[key]!r}")

        def attempt():
            page, version = self._load(hackathon_id)
            self.store.append(
                page_stream_id(hackathon_id),
                "page",
                version,
                [("ThemeUpdated", {"theme": merged})],
            )
            return {"hackathon_id": hackathon_id, "revision": page.revision + 1}

        return self.retry_append(attempt)

    def edit_sections(self, actor, hackathon_id, ops: list[dict]) -> dict:
        self._require_owner(actor, hackathon_id)

        def attempt():
            page, version = self._load(hackathon_id)
            apply_section_ops(page.sections, ops)  # validate the whole batch first
            self.store.append(
                page_stream_id(hackathon_id),
                "page",
                version,
                [("SectionsEdited", {"ops": ops})],
            )
            return {"hackathon_id": hackathon_id, "revision": page.revision + 1}

        return self.retry_append(attempt)

    def publish_page(self, actor, hackathon_id) -> dict:
        self._require_owner(actor, hackathon_id)

        def attempt():
            page, version = self._load(hackathon_id)
            if page.published:
                return {"hackathon_id": hackathon_id, "revision": page.revision}
            self.store.append(
                page_stream_id(hackathon_id), "page", version, [("PagePublished", {})]
            )
            return {"hackathon_id": hackathon_id, "revision": page.revision + 1}

        return self.retry_append(attempt)

    def get_page(self, hackathon_id) -> PageDocument | None:
        page, version = self.fold(PAGE_DEFINITION, page_stream_id(hackathon_id))
        return page if version else None

    # -- helpers -----------------------------------------------------------------------

    def _load(self, hackathon_id) -> tuple[PageDocument, int]:
        page, version = self.fold(PAGE_DEFINITION, page_stream_id(hackathon_id))
        if version == 0:
            raise rejected("UnknownPage", hackathon_id)
        return page, version

    def _require_owner(self, actor: dict, hackathon_id: str) -> None:
        user_id, roles = actor_roles({"actor": actor})
        if "admin" in roles:
            return
        organizer = self._organizers.get(hackathon_id)
        if organizer is None:
            raise rejected("UnknownPage", hackathon_id)
        if "organizer" in roles and user_id == organizer:
            return
        raise rejected("Forbidden", "not the organizer of this hackathon")
