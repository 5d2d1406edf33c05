"""Command-line entry point: run, replay, verify, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import run_headless
from .events import canonical_json, event_to_line, read_log, write_log
from .replay import fold_log, verify
from .scenario import (
    SHIPPED_SCENARIOS,
    ScenarioError,
    ScenarioSpec,
    load_scenario,
    load_shipped,
    load_transcript,
)


def _resolve_scenario(ref: str) -> ScenarioSpec:
    if Path(ref).exists():
        return load_scenario(Path(ref))
    if ref in SHIPPED_SCENARIOS:
        return load_shipped(ref)
    raise ScenarioError("$", f"no such scenario file or shipped name: {ref!r}")


def cmd_run(args: argparse.Namespace) -> int:
    spec = _resolve_scenario(args.scenario)
    transcript = load_transcript(args.transcript) if args.transcript else []
    mission = run_headless(spec, transcript, max_ticks=args.max_ticks)
    if args.out:
        write_log(mission.log, args.out)
        print(
            f"{spec.name}: {len(mission.log)} events over {mission.world.tick} ticks -> {args.out}",
            file=sys.stderr,
        )
    else:
        for ev in mission.log:
            print(event_to_line(ev))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    state = fold_log(read_log(args.log))
    print(canonical_json(state))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    spec = _resolve_scenario(args.scenario)
    events = read_log(args.log)
    ok, problems = verify(spec, events, max_ticks=args.max_ticks)
    if ok:
        print(f"OK: {args.log} reproduces byte-identically from {spec.name}")
        return 0
    for p in problems:
        print(f"MISMATCH: {p}", file=sys.stderr)
    return 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(tick_seconds=args.tick_seconds), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hotl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless and emit its event log")
    p_run.add_argument("scenario", help="scenario file path or shipped scenario name")
    p_run.add_argument("--transcript", help="operator transcript (JSONL)")
    p_run.add_argument("--max-ticks", type=int, default=300)
    p_run.add_argument("--out", help="write the log here instead of stdout")
    p_run.set_defaults(func=cmd_run)

    p_replay = sub.add_parser("replay", help="fold a log back into final mission state")
    p_replay.add_argument("log")
    p_replay.set_defaults(func=cmd_replay)

    p_verify = sub.add_parser("verify", help="re-run a scenario and byte-compare against a log")
    p_verify.add_argument("scenario")
    p_verify.add_argument("log")
    p_verify.add_argument("--max-ticks", type=int, default=300)
    p_verify.set_defaults(func=cmd_verify)

    p_serve = sub.add_parser("serve", help="start the mission service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--tick-seconds", type=float, default=0.05)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
