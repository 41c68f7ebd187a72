"""Scripted scenario runner for the simulated harness (`hacknizer sim`).

A scenario is a JSON document of steps executed against a composed system.
String values support ${name} substitution from previously saved results,
so ids created mid-run (hackathons, commands, sagas) can flow into later
steps. With a fixed seed the run is fully deterministic; the digest of the
resulting event logs is the reproducibility fingerprint.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

from hacknizer.chassis.bus import FaultSpec
from hacknizer.harness import SystemHandle, compose, default_topology

VAR_RE = re.compile(r"\$\{([a-zA-Z0-9_.]+)\}")

SIM_ADMIN = {"admin_email": "admin@hacknizer.sim", "admin_password": "sim-admin-password"}


class ScenarioError(Exception):
    pass


class ScenarioRunner:
    def __init__(self, handle: SystemHandle):
        self.handle = handle
        self.vars: dict[str, object] = {}
        self.log: list[dict] = []
        self._admin_token = None

    # -- variable substitution ------------------------------------------------

    def _lookup(self, dotted: str):
        value = self.vars
        for part in dotted.split("."):
            if isinstance(value, dict) and part in value:
                value = value[part]
            else:
                raise ScenarioError(f"unknown variable {dotted!r}")
        return value

    def _substitute(self, obj):
        if isinstance(obj, str):
            full = VAR_RE.fullmatch(obj)
            if full:
                return self._lookup(full.group(1))
            return VAR_RE.sub(lambda m: str(self._lookup(m.group(1))), obj)
        if isinstance(obj, dict):
            return {k: self._substitute(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [self._substitute(v) for v in obj]
        return obj

    # -- steps -------------------------------------------------------------------

    def run(self, scenario: dict) -> dict:
        for i, step in enumerate(scenario.get("steps", [])):
            op = step.get("op")
            handler = getattr(self, f"_op_{op}", None)
            if handler is None:
                raise ScenarioError(f"step {i}: unknown op {op!r}")
            handler(self._substitute({k: v for k, v in step.items() if k != "op"}))
        self.handle.drain()
        digest = hashlib.sha256(self.handle.event_log_bytes()).hexdigest()
        # whole-run totals, not just the final drain's delta
        return {
            "report": self.handle.bus.counters.snapshot(),
            "digest": digest,
            "steps_run": len(self.log),
        }

    def _op_request(self, step: dict) -> None:
        token = None
        if step.get("as"):
            token = self.vars.get(f"token:{step['as']}")
            if token is None:
                raise ScenarioError(f"no session for alias {step['as']!r}")
        status, body = self.handle.request(
            step["method"], step["path"], step.get("body"), token=token
        )
        self.log.append({"request": f"{step['method']} {step['path']}", "status": status})
        expect = step.get("expect_status")
        if expect is not None and status != expect:
            raise ScenarioError(f"{step['method']} {step['path']} -> {status} ({body})")
        if step.get("save"):
            self.vars[step["save"]] = body

    def _op_login(self, step: dict) -> None:
        status, body = self.handle.request(
            "POST",
            "/api/auth/login",
            {"email": step["email"], "password": step["password"]},
        )
        if status != 200:
            raise ScenarioError(f"login failed for {step['email']}: {body}")
        self.vars[f"token:{step['save_as']}"] = body["token"]
        self.vars[step["save_as"]] = body
        self.log.append({"login": step["email"], "status": status})

    def _op_drain(self, step: dict) -> None:
        report = self.handle.drain()
        self.log.append({"drain": report.as_dict()})

    def _op_resolve(self, step: dict) -> None:
        """Poll a finished command and pull a field out of its result."""
        source = self.vars.get(step["from"])
        if not isinstance(source, dict) or "command_id" not in source:
            raise ScenarioError(f"{step['from']!r} holds no command acknowledgment")
        status, body = self.handle.request(
            "GET", f"/api/commands/{source['command_id']}", token=self._admin()
        )
        if status != 200:
            raise ScenarioError(f"command {source['command_id']} not resolved: {body}")
        if body.get("status") != "succeeded":
            raise ScenarioError(f"command failed: {body.get('error')}")
        value = body["result"]
        for part in step.get("field", "").split("."):
            if part:
                value = value[part]
        self.vars[step["save"]] = value
        self.log.append({"resolve": step["from"], "value": value})

    def _op_fault(self, step: dict) -> None:
        spec = FaultSpec(
            kind=step["kind"],
            topic_pattern=step.get("topic", "*"),
            rate=float(step["rate"]),
            delay_ms=tuple(step.get("delay_ms", (0, 0))),
        )
        self.handle.inject_fault(spec)
        self.log.append({"fault": step})

    def _op_expect_saga(self, step: dict) -> None:
        source = self.vars.get(step["from"])
        if not isinstance(source, dict) or "saga_id" not in source:
            raise ScenarioError(f"{step['from']!r} holds no saga acknowledgment")
        status, body = self.handle.request(
            "GET", f"/api/sagas/{source['saga_id']}", token=self._admin()
        )
        if status != 200 or body.get("status") != step["status"]:
            raise ScenarioError(
                f"saga {source['saga_id']}: wanted {step['status']}, got {body.get('status')}"
            )
        self.log.append({"saga": source["saga_id"], "status": body["status"]})

    def _admin(self) -> str:
        if self._admin_token is None:
            status, body = self.handle.request(
                "POST",
                "/api/auth/login",
                {"email": SIM_ADMIN["admin_email"], "password": SIM_ADMIN["admin_password"]},
            )
            if status != 200:
                raise ScenarioError("sim admin login failed; was the system composed by sim?")
            self._admin_token = body["token"]
        return self._admin_token


def run_scenario_file(scenario_path, seed: int, workdir, faults_path=None,
                      start_http: bool = False) -> dict:
    scenario = json.loads(Path(scenario_path).read_text())
    topology = default_topology(workdir, seed=seed, start_http=start_http)
    topology.config = dict(SIM_ADMIN)
    handle = compose(topology)
    try:
        handle.drain()
        runner = ScenarioRunner(handle)
        if faults_path:
            for doc in json.loads(Path(faults_path).read_text()):
                runner._op_fault(doc)
        return runner.run(scenario)
    finally:
        handle.stop()
