"""The hacknizer command line.

  hacknizer run   --service <role> --config <file>   one service, own process
  hacknizer sim   --scenario <file> --seed <n>       deterministic scripted run
  hacknizer demo  --port <n>                         whole system, wall clock
  hacknizer sagas --print                            dump the saga catalog
  hacknizer routes [--json]                          dump the gateway route table
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
import tempfile
import threading

from hacknizer.config import load_config
from hacknizer.errors import HacknizerError
from hacknizer.gateway import Gateway
from hacknizer.harness import compose, default_topology
from hacknizer.scenario import SIM_ADMIN, run_scenario_file


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hacknizer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one service in this process")
    run_p.add_argument("--service", required=True,
                       choices=["user", "hackathon", "team", "page", "saga", "query", "gateway"])
    run_p.add_argument("--config", required=True)

    sim_p = sub.add_parser("sim", help="run a scripted scenario on the simulated clock")
    sim_p.add_argument("--scenario", required=True)
    sim_p.add_argument("--seed", type=int, default=0)
    sim_p.add_argument("--faults")
    sim_p.add_argument("--workdir")

    demo_p = sub.add_parser("demo", help="compose the whole system on a wall clock")
    demo_p.add_argument("--port", type=int, default=8080)
    demo_p.add_argument("--seed", type=int, default=0)
    demo_p.add_argument("--workdir")
    demo_p.add_argument("--admin-email", default=SIM_ADMIN["admin_email"])
    demo_p.add_argument("--admin-password", default=SIM_ADMIN["admin_password"])

    sagas_p = sub.add_parser("sagas", help="show the saga catalog")
    sagas_p.add_argument("--print", action="store_true", dest="do_print")

    routes_p = sub.add_parser("routes", help="show the gateway route table")
    routes_p.add_argument("--json", action="store_true", dest="as_json")

    args = parser.parse_args(argv)
    try:
        return {
            "run": _cmd_run,
            "sim": _cmd_sim,
            "demo": _cmd_demo,
            "sagas": _cmd_sagas,
            "routes": _cmd_routes,
        }[args.command](args)
    except HacknizerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_run(args) -> int:
    from hacknizer.runner import RunningProcess

    config = load_config(args.config)
    config.setdefault("service", args.service)
    config["service"] = args.service
    process = RunningProcess(config)
    extra = f" on port {process.http.port}" if process.http else ""
    print(f"hacknizer {args.service} ready{extra}", flush=True)
    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    signal.signal(signal.SIGINT, lambda *_: stop.set())
    stop.wait()
    process.stop()
    return 0


def _cmd_sim(args) -> int:
    if args.workdir:
        result = run_scenario_file(args.scenario, args.seed, args.workdir, args.faults)
    else:
        with tempfile.TemporaryDirectory(prefix="hacknizer-sim-") as workdir:
            result = run_scenario_file(args.scenario, args.seed, workdir, args.faults)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _cmd_demo(args) -> int:
    workdir = args.workdir or tempfile.mkdtemp(prefix="hacknizer-demo-")
    topology = default_topology(
        workdir, seed=args.seed, clock_mode="wall", gateway_port=args.port
    )
    topology.config = {
        "admin_email": args.admin_email,
        "admin_password": args.admin_password,
    }
    handle = compose(topology)
    print(f"hacknizer demo ready at {handle.gateway_base_url} (data in {workdir})", flush=True)
    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    signal.signal(signal.SIGINT, lambda *_: stop.set())
    stop.wait()
    handle.stop()
    return 0


def _cmd_sagas(args) -> int:
    from hacknizer.services.saga import registration_saga, winner_saga

    catalog = [registration_saga(), winner_saga("<saga-token>")]
    rows = []
    for definition in catalog:
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
    print(json.dumps(rows, indent=2))
    return 0


def _cmd_routes(args) -> int:
    table = Gateway.route_table()
    if args.as_json:
        print(json.dumps(table, indent=2))
    else:
        for row in table:
            role = row["required_role"] or "public"
            print(f"{row['method']:6} {row['path']:48} {row['kind']:8} [{role}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
