"""Command line entry point.

Subcommands: serve (live server, or deterministic replay with --replay),
replay (trace to snapshot stream), scenario (headless metrics run),
metrics (report from a recorded trace), validate-mesh. Reports are JSON on
stdout or --out; exit code 0 on success, 2 on validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import EngineConfig, default_engine_config, load_engine_config
from .metrics import TechniqueBundle, replay_metrics, replay_snapshots, run_scenario
from .navmesh import NavMeshError, load_mesh
from .scenarios import (
    CorruptTrace,
    custom_scenario,
    load_input_trace,
    load_trace,
    save_trace,
    scenario_by_name,
)
from .session import LOCOMOTION_MODES, SessionConfig
from .transitions import TransitionKind


class CliError(Exception):
    pass


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _load_engine(args) -> EngineConfig:
    engine = (load_engine_config(args.config)
              if getattr(args, "config", None) else default_engine_config())
    if getattr(args, "tick_rate", None):
        engine.session.tick_rate = args.tick_rate
    if getattr(args, "mesh", None):
        engine.session.mesh = args.mesh
    return engine


def _session_config(engine: EngineConfig) -> SessionConfig:
    if engine.session.mesh is None:
        raise CliError("no mesh: pass --mesh FILE or set session.mesh in --config")
    return SessionConfig(
        mesh=load_mesh(engine.session.mesh),
        tick_rate=engine.session.tick_rate,
        agent=engine.agent,
        locomotion=engine.locomotion,
        transition=engine.transition,
        max_users=engine.session.max_users,
        default_locomotion_mode=engine.session.default_locomotion_mode,
        avatar_mode=engine.session.avatar_mode,
    )


def _snapshot_lines(stream: list[bytes]) -> str:
    # Frame bodies are canonical JSON already; strip the length prefixes.
    return "".join(frame[4:].decode("utf-8") + "\n" for frame in stream)


def cmd_serve(args) -> int:
    engine = _load_engine(args)
    if args.replay:
        config = _session_config(engine)
        frames = load_trace(args.replay)
        stream = replay_snapshots(config, frames, args.max_ticks)
        _write_output(_snapshot_lines(stream), args.out)
        return 0
    from .netserver import SessionServer

    config = _session_config(engine)
    host, _, port = args.listen.partition(":")
    server = SessionServer(
        config,
        host=host or "127.0.0.1",
        port=int(port or 0),
        ws_port=args.ws_port,
        turbo=args.turbo,
        max_ticks=args.max_ticks,
        wait_for_input=args.wait_for_input,
        record_path=args.record,
    )
    endpoints = f"tcp {server.host}:{server.port}"
    if server.ws_port is not None:
        endpoints += f", ws {server.host}:{server.ws_port}"
    print(f"serving on {endpoints} at {config.tick_rate:g} Hz", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_replay(args) -> int:
    engine = _load_engine(args)
    config = _session_config(engine)
    frames = load_trace(args.trace)
    stream = replay_snapshots(config, frames, args.ticks)
    _write_output(_snapshot_lines(stream), args.out)
    return 0


def cmd_scenario(args) -> int:
    engine = _load_engine(args)
    if args.name == "custom":
        if not args.trace or not getattr(args, "mesh", None):
            raise CliError("custom scenarios need --trace and --mesh")
        scenario = custom_scenario(load_mesh(args.mesh),
                                   load_input_trace(args.trace))
    else:
        scenario = scenario_by_name(args.name)
    bundle = TechniqueBundle(
        locomotion_mode=args.technique,
        transition_kind=args.transition,
        avatar_mode=args.avatar,
    )
    record = [] if args.record else None
    report = run_scenario(
        scenario,
        bundle,
        seed=args.seed,
        tick_rate=engine.session.tick_rate,
        agent=engine.agent,
        locomotion=engine.locomotion,
        transition=dataclasses.replace(
            engine.transition, kind=TransitionKind(args.transition)),
        record=record,
    )
    if args.record:
        save_trace(record, args.record)
    _write_output(json.dumps(report.to_dict(), indent=2, sort_keys=True), args.out)
    return 0


def cmd_metrics(args) -> int:
    engine = _load_engine(args)
    config = _session_config(engine)
    frames = load_trace(args.trace)
    report = replay_metrics(config, frames, args.ticks, measure_user=args.user)
    _write_output(json.dumps(report.to_dict(), indent=2, sort_keys=True), args.out)
    return 0


def cmd_validate_mesh(args) -> int:
    mesh = load_mesh(args.file)
    summary = {
        "valid": True,
        "vertices": len(mesh.vertices),
        "triangles": len(mesh.triangles),
    }
    _write_output(json.dumps(summary, indent=2, sort_keys=True), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sve",
        description="Shared-VE locomotion engine: session server, replay, metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mesh=True):
        p.add_argument("--config", help="engine config JSON file")
        p.add_argument("--tick-rate", type=float, default=None,
                       help="simulation rate in Hz (default 60)")
        p.add_argument("--out", help="write output to this path instead of stdout")
        if mesh:
            p.add_argument("--mesh", help="walkable mesh JSON file")

    p = sub.add_parser("serve", help="run the live session server")
    common(p)
    p.add_argument("--listen", default="127.0.0.1:46100",
                   help="tcp listen address as HOST:PORT")
    p.add_argument("--ws-port", type=int, default=None,
                   help="also accept WebSocket clients on this port")
    p.add_argument("--replay", metavar="TRACE",
                   help="substitute trace frames for network input and exit")
    p.add_argument("--max-ticks", type=int, default=None,
                   help="stop after this many ticks")
    p.add_argument("--turbo", action="store_true",
                   help="tick as fast as possible (fixed logical dt)")
    p.add_argument("--wait-for-input", action="store_true",
                   help="hold tick 0 until the first input frame arrives")
    p.add_argument("--record", metavar="PATH",
                   help="write the applied frame schedule here on shutdown")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("replay", help="replay a recorded trace deterministically")
    common(p)
    p.add_argument("trace", help="session trace file (JSON lines)")
    p.add_argument("--ticks", type=int, default=None,
                   help="number of ticks to simulate")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("scenario", help="run a named scenario headlessly")
    common(p)
    p.add_argument("name", choices=["figure_eight", "fruit_course", "custom"])
    p.add_argument("--technique", default="none", choices=list(LOCOMOTION_MODES),
                   help="locomotion mapper for the mover")
    p.add_argument("--transition", default="walking",
                   choices=[k.value for k in TransitionKind])
    p.add_argument("--avatar", default="smart", choices=["smart", "primitive"])
    p.add_argument("--trace", help="input trace (JSON lines) for custom scenarios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record", help="write the applied frame schedule here")
    p.set_defaults(fn=cmd_scenario)

    p = sub.add_parser("metrics", help="compute a metrics report from a trace")
    common(p)
    p.add_argument("trace", help="session trace file (JSON lines)")
    p.add_argument("--user", type=int, default=0, help="user id to measure")
    p.add_argument("--ticks", type=int, default=None)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("validate-mesh", help="check a mesh file")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_validate_mesh)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, CorruptTrace, NavMeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
