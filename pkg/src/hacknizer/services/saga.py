"""Saga orchestration: cross-context transactions with compensation.

The coordinator is itself event-sourced (one stream per saga instance), so
its step log survives restarts and doubles as the audit trail. Step replies
are matched by causation (the reply's causation_id is one of the step's
issued command ids); anything else is stale and ignored.

Failure handling:
  explicit failure reply   -> compensate immediately (business rejections
                              are deterministic; retrying cannot help)
  step timeout             -> retry with exponential backoff, up to
                              MAX_STEP_RETRIES, then resolve-or-compensate
  ambiguous timed-out step -> when the step defines a resolution probe, ask
                              the target service whether the effect landed.
                              The probe shares the step's command routing
                              key, and command delivery is FIFO per routing
                              key, so by the time the probe is answered all
                              earlier attempts have either executed or been
                              dead-lettered. "executed" adopts the step as
                              succeeded; "absent" makes compensation safe.

Compensations run in reverse order of completed steps and are retried with
capped backoff; after MAX_RECOVERY_ATTEMPTS the saga gives up and aborts
anyway (reservation expiry in the hackathon service is the safety net), so
even rate-1.0 fault scenarios quiesce.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

from hacknizer.chassis.aggregate import AggregateDefinition
from hacknizer.chassis.envelope import EventEnvelope
from hacknizer.errors import rejected
from hacknizer.services.base import Service

MAX_STEP_RETRIES = 3  # attempts = 1 + retries
MAX_RECOVERY_ATTEMPTS = 10  # probe / compensation command issues
DEFAULT_STEP_TIMEOUT_MS = 5000
BACKOFF_CAP_MS = 10_000


@dataclass(frozen=True)
class SagaStep:
    name: str
    service: str
    command: str
    build: Callable[[dict, dict], dict]
    routing_key: Callable[[dict, dict], str]
    compensation_command: str | None = None
    compensation_build: Callable[[dict, dict], dict] | None = None
    resolve_command: str | None = None
    resolve_build: Callable[[dict, dict], dict] | None = None
    resolve_executed: Callable[[dict], bool] | None = None
    timeout_ms: int = DEFAULT_STEP_TIMEOUT_MS


@dataclass(frozen=True)
class SagaDefinition:
    saga_type: str
    input_fields: tuple[str, ...]
    steps: tuple[SagaStep, ...]


@dataclass(frozen=True)
class StepRecord:
    name: str
    status: str = "pending"  # pending | succeeded | failed | skipped
    attempts: int = 0
    command_ids: tuple[str, ...] = ()
    reply: dict | None = None
    error: dict | None = None


@dataclass(frozen=True)
class SagaInstance:
    saga_id: str = ""
    saga_type: str = ""
    input: dict = field(default_factory=dict)
    status: str = "Running"  # Running | Resolving | Compensating | Completed | Aborted
    steps: tuple[StepRecord, ...] = ()
    current_step: int = 0
    plan: tuple[str, ...] = ()  # compensation plan, reverse order
    comp_index: int = 0
    comp_attempts: int = 0
    comp_command_ids: tuple[str, ...] = ()
    probe_attempts: int = 0
    probe_command_ids: tuple[str, ...] = ()
    abort_reason: dict | None = None


def _update_step(steps, index, **changes):
    return tuple(
        replace(record, **changes) if i == index else record for i, record in enumerate(steps)
    )


def _apply(state: SagaInstance, env: EventEnvelope) -> SagaInstance:
    p = env.payload
    kind = env.event_type
    if kind == "SagaStarted":
        return SagaInstance(
            saga_id=p["saga_id"],
            saga_type=p["saga_type"],
            input=p["input"],
            steps=tuple(StepRecord(name=n) for n in p["step_names"]),
        )
    if kind == "StepCommandIssued":
        i = p["step_index"]
        record = state.steps[i]
        return replace(
            state,
            steps=_update_step(
                state.steps,
                i,
                attempts=p["attempt"],
                command_ids=record.command_ids + (p["command_id"],),
            ),
        )
    if kind == "StepSucceeded":
        i = p["step_index"]
        return replace(
            state,
            steps=_update_step(state.steps, i, status="succeeded", reply=p["reply"]),
            current_step=i + 1,
            status="Running",
            probe_attempts=0,
            probe_command_ids=(),
        )
    if kind == "StepFailed":
        i = p["step_index"]
        return replace(
            state,
            steps=_update_step(state.steps, i, status="failed", error=p["error"]),
            abort_reason={"step": state.steps[i].name, **p["error"]},
        )
    if kind == "StepResolutionStarted":
        return replace(state, status="Resolving", probe_attempts=0, probe_command_ids=())
    if kind == "ProbeCommandIssued":
        return replace(
            state,
            probe_attempts=p["attempt"],
            probe_command_ids=state.probe_command_ids + (p["command_id"],),
        )
    if kind == "CompensationStarted":
        return replace(
            state,
            status="Compensating",
            plan=tuple(p["plan"]),
            comp_index=0,
            comp_attempts=0,
            comp_command_ids=(),
        )
    if kind == "CompensationCommandIssued":
        return replace(
            state,
            comp_attempts=p["attempt"],
            comp_command_ids=state.comp_command_ids + (p["command_id"],),
        )
    if kind == "CompensationConfirmed":
        return replace(
            state, comp_index=state.comp_index + 1, comp_attempts=0, comp_command_ids=()
        )
    if kind == "SagaCompleted":
        return replace(state, status="Completed")
    if kind == "SagaAborted":
        return replace(state, status="Aborted")
    return state


SAGA_DEFINITION = AggregateDefinition("saga", SagaInstance, _apply)


# -- the saga catalog ---------------------------------------------------------


def registration_saga() -> SagaDefinition:
    return SagaDefinition(
        saga_type="participant_registration",
        input_fields=("hackathon_id", "user_id"),
        steps=(
            SagaStep(
                name="reserve_slot",
                service="hackathon",
                command="ReserveSlot",
                build=lambda inp, ctx: {
                    "hackathon_id": inp["hackathon_id"],
                    "reservation_correlation_id": inp["saga_id"],
                },
                routing_key=lambda inp, ctx: inp["hackathon_id"],
                compensation_command="ReleaseSlot",
                compensation_build=lambda inp, ctx: {
                    "hackathon_id": inp["hackathon_id"],
                    "reservation_correlation_id": inp["saga_id"],
                },
            ),
            SagaStep(
                name="confirm_participant",
                service="team",
                command="ConfirmParticipant",
                build=lambda inp, ctx: {
                    "hackathon_id": inp["hackathon_id"],
                    "user_id": inp["user_id"],
                    "reservation_id": ctx["reserve_slot"]["reservation_id"],
                    "registration_correlation_id": inp["saga_id"],
                },
                routing_key=lambda inp, ctx: f"reg::{inp['hackathon_id']}::{inp['user_id']}",
                resolve_command="CheckParticipant",
                resolve_build=lambda inp, ctx: {
                    "hackathon_id": inp["hackathon_id"],
                    "user_id": inp["user_id"],
                    "registration_correlation_id": inp["saga_id"],
                },
                resolve_executed=lambda reply: bool(reply.get("confirmed")),
            ),
        ),
    )


def winner_saga(saga_token: str) -> SagaDefinition:
    return SagaDefinition(
        saga_type="winner_declaration",
        input_fields=("hackathon_id", "team_id", "award_id"),
        steps=(
            SagaStep(
                name="verify_hackathon_ended",
                service="hackathon",
                command="VerifyHackathonEnded",
                build=lambda inp, ctx: {"hackathon_id": inp["hackathon_id"]},
                routing_key=lambda inp, ctx: inp["hackathon_id"],
            ),
            SagaStep(
                name="verify_submission",
                service="team",
                command="VerifySubmission",
                build=lambda inp, ctx: {"team_id": inp["team_id"]},
                routing_key=lambda inp, ctx: inp["team_id"],
            ),
            SagaStep(
                name="record_winner",
                service="hackathon",
                command="RecordWinner",
                build=lambda inp, ctx: {
                    "hackathon_id": inp["hackathon_id"],
                    "team_id": inp["team_id"],
                    "award_id": inp["award_id"],
                    "saga_token": saga_token,
                },
                routing_key=lambda inp, ctx: inp["hackathon_id"],
            ),
        ),
    )


class SagaCoordinator(Service):
    name = "saga"
    owned_stream_types = ("saga",)
    definitions = {"saga": SAGA_DEFINITION}

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        saga_token = self.config.get("saga_token", "saga-secret")
        self.catalog: dict[str, SagaDefinition] = {
            d.saga_type: d for d in (registration_saga(), winner_saga(saga_token))
        }
        self._timers: dict[str, list] = {}
        self._reply_seen = set()
        self.stale_replies = 0
        self.commands = {"StartSaga": self._cmd_start}

    def start(self) -> None:
        super().start()
        self.bus.subscribe("hackathon.replies", "saga-coord", self._on_reply)
        self.bus.subscribe("team.replies", "saga-coord", self._on_reply)

    # -- starting ---------------------------------------------------------

    def _cmd_start(self, p: dict) -> dict:
        return self.start_saga(p["saga_type"], p["input"], saga_id=p.get("saga_id"))

    def start_saga(self, saga_type: str, input_payload: dict, saga_id: str | None = None) -> dict:
        definition = self.catalog.get(saga_type)
        if definition is None:
            raise rejected("InvalidInput", f"unknown saga type {saga_type!r}")
        if not isinstance(input_payload, dict):
            raise rejected("InvalidInput", "input must be a document")
        missing = [f for f in definition.input_fields if not input_payload.get(f)]
        if missing:
            raise rejected("InvalidInput", f"missing {missing}")
        saga_id = saga_id or self.ids.entity_id("sg")
        enriched = {**input_payload, "saga_id": saga_id}
        self.store.append(
            saga_id,
            "saga",
            0,
            [
                (
                    "SagaStarted",
                    {
                        "saga_id": saga_id,
                        "saga_type": saga_type,
                        "input": enriched,
                        "step_names": [s.name for s in definition.steps],
                    },
                )
            ],
            correlation_id=saga_id,
        )
        self._issue_step(saga_id, 0, attempt=1)
        return {"saga_id": saga_id}

    def get_instance(self, saga_id: str) -> SagaInstance | None:
        instance, version = self.fold(SAGA_DEFINITION, saga_id)
        return instance if version else None

    # -- step issue / reply / timeout ------------------------------------------

    def _issue_step(self, saga_id: str, step_index: int, attempt: int) -> None:
        instance = self.get_instance(saga_id)
        definition = self.catalog[instance.saga_type]
        step = definition.steps[step_index]
        ctx = {r.name: r.reply for r in instance.steps if r.reply is not None}
        command_id = self._append_and_send(
            saga_id,
            "StepCommandIssued",
            {"step_index": step_index, "step": step.name, "attempt": attempt},
            service=step.service,
            command=step.command,
            payload=step.build(instance.input, ctx),
            routing_key=step.routing_key(instance.input, ctx),
        )
        timeout = min(step.timeout_ms * (2 ** (attempt - 1)), BACKOFF_CAP_MS * 4)
        self._schedule(
            saga_id,
            timeout,
            lambda: self._on_step_timeout(saga_id, step_index, attempt, command_id),
        )

    def _on_reply(self, env: EventEnvelope) -> None:
        if env.event_id in self._reply_seen:
            return
        self._reply_seen.add(env.event_id)
        saga_id = env.correlation_id
        instance = self.get_instance(saga_id)
        if instance is None:
            return  # not a saga correlation (gateway command traffic)
        outcome = "succeeded" if env.event_type.endswith("Succeeded") else "failed"
        body = env.payload.get("result") if outcome == "succeeded" else env.payload.get("error")

        if instance.status == "Running":
            index = instance.current_step
            if index >= len(instance.steps):
                return
            record = instance.steps[index]
            if env.causation_id not in record.command_ids:
                self.stale_replies += 1  # wrong step or superseded command
                return
            self._resolve_step(saga_id, index, outcome, body or {})
        elif instance.status == "Resolving":
            if env.causation_id in instance.probe_command_ids:
                self._resolve_probe(saga_id, outcome, body or {})
            else:
                self.stale_replies += 1
        elif instance.status == "Compensating":
            if env.causation_id in instance.comp_command_ids:
                self._confirm_compensation(saga_id, outcome, body or {})
            else:
                self.stale_replies += 1
        else:
            self.stale_replies += 1  # terminal states ignore replies

    def _resolve_step(self, saga_id: str, index: int, outcome: str, body: dict) -> None:
        instance = self.get_instance(saga_id)
        if outcome == "succeeded":
            self._append(
                saga_id, "StepSucceeded", {"step_index": index, "step": instance.steps[index].name, "reply": body}
            )
            self._cancel_timers(saga_id)
            if index + 1 < len(instance.steps):
                self._issue_step(saga_id, index + 1, attempt=1)
            else:
                self._append(saga_id, "SagaCompleted", {})
        else:
            self._append(
                saga_id, "StepFailed", {"step_index": index, "step": instance.steps[index].name, "error": body}
            )
            self._cancel_timers(saga_id)
            self._begin_compensation(saga_id, include_failed_step=False)

    def _on_step_timeout(self, saga_id: str, step_index: int, attempt: int, command_id: str) -> None:
        instance = self.get_instance(saga_id)
        if instance is None or instance.status != "Running":
            return
        if instance.current_step != step_index:
            return
        record = instance.steps[step_index]
        if record.status != "pending" or record.attempts != attempt:
            return  # superseded by a reply or a later attempt
        if attempt <= MAX_STEP_RETRIES:
            self._issue_step(saga_id, step_index, attempt=attempt + 1)
            return
        definition = self.catalog[instance.saga_type]
        step = definition.steps[step_index]
        if step.resolve_command is not None:
            self._append(
                saga_id, "StepResolutionStarted", {"step_index": step_index, "step": step.name}
            )
            self._issue_probe(saga_id, attempt=1)
        else:
            self._append(
                saga_id,
                "StepFailed",
                {
                    "step_index": step_index,
                    "step": step.name,
                    "error": {"code": "StepTimeout", "message": f"{attempt} attempts"},
                },
            )
            self._begin_compensation(saga_id, include_failed_step=True)

    # -- resolution probes ----------------------------------------------------

    def _issue_probe(self, saga_id: str, attempt: int) -> None:
        instance = self.get_instance(saga_id)
        definition = self.catalog[instance.saga_type]
        step = definition.steps[instance.current_step]
        ctx = {r.name: r.reply for r in instance.steps if r.reply is not None}
        command_id = self._append_and_send(
            saga_id,
            "ProbeCommandIssued",
            {"step": step.name, "attempt": attempt},
            service=step.service,
            command=step.resolve_command,
            payload=step.resolve_build(instance.input, ctx),
            routing_key=step.routing_key(instance.input, ctx),
        )
        timeout = min(DEFAULT_STEP_TIMEOUT_MS * (2 ** (attempt - 1)), BACKOFF_CAP_MS)
        self._schedule(saga_id, timeout, lambda: self._on_probe_timeout(saga_id, attempt, command_id))

    def _on_probe_timeout(self, saga_id: str, attempt: int, command_id: str) -> None:
        instance = self.get_instance(saga_id)
        if instance is None or instance.status != "Resolving":
            return
        if instance.probe_attempts != attempt:
            return
        if attempt < MAX_RECOVERY_ATTEMPTS:
            self._issue_probe(saga_id, attempt=attempt + 1)
        else:
            # Unresolvable; assume not executed and rely on the expiry net.
            self._append(
                saga_id,
                "StepFailed",
                {
                    "step_index": instance.current_step,
                    "step": instance.steps[instance.current_step].name,
                    "error": {"code": "StepTimeout", "message": "resolution abandoned"},
                },
            )
            self._begin_compensation(saga_id, include_failed_step=True)

    def _resolve_probe(self, saga_id: str, outcome: str, body: dict) -> None:
        instance = self.get_instance(saga_id)
        index = instance.current_step
        definition = self.catalog[instance.saga_type]
        step = definition.steps[index]
        if outcome == "succeeded" and step.resolve_executed(body):
            effect = body.get("effect") or body
            self._append(
                saga_id, "StepSucceeded", {"step_index": index, "step": step.name, "reply": effect}
            )
            self._cancel_timers(saga_id)
            if index + 1 < len(definition.steps):
                self._issue_step(saga_id, index + 1, attempt=1)
            else:
                self._append(saga_id, "SagaCompleted", {})
        else:
            self._append(
                saga_id,
                "StepFailed",
                {
                    "step_index": index,
                    "step": step.name,
                    "error": {"code": "StepTimeout", "message": "effect did not land"},
                },
            )
            self._cancel_timers(saga_id)
            self._begin_compensation(saga_id, include_failed_step=False)

    # -- compensation -----------------------------------------------------------

    def _begin_compensation(self, saga_id: str, include_failed_step: bool) -> None:
        instance = self.get_instance(saga_id)
        definition = self.catalog[instance.saga_type]
        plan = []
        for i, record in enumerate(instance.steps):
            step = definition.steps[i]
            if step.compensation_command is None:
                continue
            if record.status == "succeeded" or (include_failed_step and record.status == "failed"):
                plan.append(step.name)
        plan.reverse()
        self._append(
            saga_id,
            "CompensationStarted",
            {"reason": instance.abort_reason or {}, "plan": plan},
        )
        if plan:
            self._issue_compensation(saga_id, attempt=1)
        else:
            self._finish_abort(saga_id)

    def _issue_compensation(self, saga_id: str, attempt: int) -> None:
        instance = self.get_instance(saga_id)
        definition = self.catalog[instance.saga_type]
        step_name = instance.plan[instance.comp_index]
        step = next(s for s in definition.steps if s.name == step_name)
        ctx = {r.name: r.reply for r in instance.steps if r.reply is not None}
        command_id = self._append_and_send(
            saga_id,
            "CompensationCommandIssued",
            {"step": step.name, "attempt": attempt},
            service=step.service,
            command=step.compensation_command,
            payload=step.compensation_build(instance.input, ctx),
            routing_key=step.routing_key(instance.input, ctx),
        )
        timeout = min(DEFAULT_STEP_TIMEOUT_MS * (2 ** (attempt - 1)), BACKOFF_CAP_MS)
        self._schedule(
            saga_id, timeout, lambda: self._on_compensation_timeout(saga_id, attempt, command_id)
        )

    def _on_compensation_timeout(self, saga_id: str, attempt: int, command_id: str) -> None:
        instance = self.get_instance(saga_id)
        if instance is None or instance.status != "Compensating":
            return
        if instance.comp_attempts != attempt:
            return
        if attempt < MAX_RECOVERY_ATTEMPTS:
            self._issue_compensation(saga_id, attempt=attempt + 1)
        else:
            self._finish_abort(saga_id, note="compensation abandoned")

    def _confirm_compensation(self, saga_id: str, outcome: str, body: dict) -> None:
        instance = self.get_instance(saga_id)
        step_name = instance.plan[instance.comp_index]
        self._append(
            saga_id,
            "CompensationConfirmed",
            {"step": step_name, "outcome": outcome, "reply": body},
        )
        instance = self.get_instance(saga_id)
        if instance.comp_index < len(instance.plan):
            self._issue_compensation(saga_id, attempt=1)
        else:
            self._finish_abort(saga_id)

    def _finish_abort(self, saga_id: str, note: str = "") -> None:
        instance = self.get_instance(saga_id)
        reason = dict(instance.abort_reason or {})
        if note:
            reason["note"] = note
        self._append(saga_id, "SagaAborted", {"reason": reason})
        self._cancel_timers(saga_id)

    # -- plumbing -------------------------------------------------------------------

    def _append(self, saga_id: str, event_type: str, payload: dict) -> None:
        head = self.store.head(saga_id)
        self.store.append(
            saga_id, "saga", head.current_version, [(event_type, payload)], correlation_id=saga_id
        )

    def _append_and_send(
        self,
        saga_id: str,
        event_type: str,
        event_payload: dict,
        service: str,
        command: str,
        payload: dict,
        routing_key: str,
    ) -> str:
        command_id = self.ids.event_id()
        head = self.store.head(saga_id)
        new_version = self.store.append(
            saga_id,
            "saga",
            head.current_version,
            [(event_type, {**event_payload, "command_id": command_id})],
            correlation_id=saga_id,
        )
        issued = self.store.load(saga_id, new_version - 1)[0]
        envelope = EventEnvelope(
            event_id=command_id,
            stream_id=routing_key,
            stream_type="command",
            sequence=0,
            event_type=command,
            payload=payload,
            occurred_at=self.clock.now_ms(),
            correlation_id=saga_id,
            causation_id=issued.event_id,
        )
        self._publish_with_retry(f"{service}.commands", envelope)
        return command_id

    def _schedule(self, saga_id: str, delay_ms: int, fn) -> None:
        self._timers.setdefault(saga_id, []).append(self.scheduler.call_later(delay_ms, fn))

    def _cancel_timers(self, saga_id: str) -> None:
        for timer in self._timers.pop(saga_id, []):
            self.scheduler.cancel(timer)

    def catalog_table(self) -> list[dict]:
        rows = []
        for definition in self.catalog.values():
            rows.append(
                {
                    "saga_type": definition.saga_type,
                    "input_fields": list(definition.input_fields),
                    "steps": [
                        {
                            "name": s.name,
                            "service": s.service,
                            "command": s.command,
                            "compensation": s.compensation_command,
                            "timeout_ms": s.timeout_ms,
                        }
                        for s in definition.steps
                    ],
                }
            )
        return rows
