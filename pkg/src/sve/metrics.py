"""Headless scenario runs, replay, and motion metrics.

The optical-flow proxy integrates continuous viewport translation and
rotation; teleport steps and snap turns contribute nothing to it by
definition. It stands in for the optical-flow reasoning behind stuttered
locomotion and is explicitly not a cybersickness predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .agent import AgentConfig
from .geometry import dist_xz, wrap_angle
from .locomotion import LocomotionConfig, sample_to_dict
from .navmesh import NavMesh
from .protocol import WireMessage, encode_message
from .scenarios import Scenario, TraceFrame
from .session import Session, SessionConfig
from .transitions import TransitionConfig, TransitionKind


@dataclass
class TechniqueBundle:
    """Names the mover's mapper and avatar treatment for a run."""

    locomotion_mode: str = "none"
    transition_kind: str = "walking"
    avatar_mode: str = "smart"


@dataclass
class MetricsReport:
    optical_flow_translation: float = 0.0
    optical_flow_rotation: float = 0.0
    teleport_count: int = 0
    net_displacement: float = 0.0
    discrepancy_max: float = 0.0
    discrepancy_mean: float = 0.0
    discrepancy_integral: float = 0.0
    realignment_times: list[float] = field(default_factory=list)
    incomplete_realignments: int = 0
    continuity_violations: int = 0
    ticks: int = 0
    duration: float = 0.0
    scenario: str = ""
    technique: str = ""

    def to_dict(self) -> dict:
        return {
            "optical_flow_translation": self.optical_flow_translation,
            "optical_flow_rotation": self.optical_flow_rotation,
            "teleport_count": self.teleport_count,
            "net_displacement": self.net_displacement,
            "discrepancy_max": self.discrepancy_max,
            "discrepancy_mean": self.discrepancy_mean,
            "discrepancy_integral": self.discrepancy_integral,
            "realignment_times": self.realignment_times,
            "incomplete_realignments": self.incomplete_realignments,
            "continuity_violations": self.continuity_violations,
            "ticks": self.ticks,
            "duration": self.duration,
            "scenario": self.scenario,
            "technique": self.technique,
        }


def schedule_from_scenario(
    scenario: Scenario, bundle: TechniqueBundle, tick_rate: float
) -> tuple[list[TraceFrame], int]:
    """Compile a scenario into an applied-frame schedule for user 0."""
    frames: list[TraceFrame] = [
        TraceFrame(tick=0, user_id=0, join={
            "name": "mover",
            "position": list(scenario.start_position),
            "yaw": scenario.start_yaw,
            "locomotion_mode": bundle.locomotion_mode,
        })
    ]
    if scenario.observer_position is not None:
        frames.append(TraceFrame(tick=0, user_id=1, join={
            "name": "observer",
            "position": list(scenario.observer_position),
            "yaw": 0.0,
            "locomotion_mode": "none",
        }))
    seq = 0
    events: list[tuple[int, dict]] = []
    for t, target in scenario.teleport_schedule:
        events.append((round(t * tick_rate), {
            "teleport_to": list(target),
            "transition_kind": bundle.transition_kind,
        }))
    for sample in scenario.input_trace:
        payload = sample_to_dict(sample)
        payload["transition_kind"] = bundle.transition_kind
        events.append((round(sample.t * tick_rate), payload))
    events.sort(key=lambda e: e[0])
    for tick, payload in events:
        seq += 1
        frames.append(TraceFrame(tick=tick, user_id=0, seq=seq, payload=payload))
    total_ticks = round(scenario.duration * tick_rate)
    return frames, total_ticks


def _frames_by_tick(frames: list[TraceFrame]) -> dict[int, list[TraceFrame]]:
    by_tick: dict[int, list[TraceFrame]] = {}
    for frame in frames:
        by_tick.setdefault(frame.tick, []).append(frame)
    return by_tick


class HeadlessRun:
    """Drives a session from a frame schedule, measuring the observed user."""

    def __init__(
        self,
        config: SessionConfig,
        frames: list[TraceFrame],
        ticks: int,
        measure_user: int = 0,
        collect_snapshots: bool = False,
    ) -> None:
        self.config = config
        self.session = Session(config)
        self.by_tick = _frames_by_tick(frames)
        self.ticks = ticks
        self.measure_user = measure_user
        self.collect_snapshots = collect_snapshots
        self.snapshots: list[bytes] = []
        self.report = MetricsReport(ticks=ticks, duration=ticks * config.dt)

    def run(self) -> MetricsReport:
        session = self.session
        uid = self.measure_user
        dt = self.config.dt
        report = self.report
        base_speed = self.config.agent.base_max_speed
        factor = self.config.transition.speed_factor

        prev_pos = None
        prev_yaw = None
        initial_pos = None
        prev_transition = None
        prev_avatar = None
        pending_start: int | None = None
        discrepancies: list[float] = []

        for tick in range(self.ticks):
            frames = []
            for tf in self.by_tick.get(tick, ()):
                if tf.join is not None:
                    session.join(
                        name=tf.join.get("name", ""),
                        user_id=tf.user_id,
                        position=tuple(tf.join.get("position", (0.0, 0.0, 0.0))),
                        yaw=float(tf.join.get("yaw", 0.0)),
                        locomotion_mode=tf.join.get("locomotion_mode"),
                    )
                    if tf.user_id == uid:
                        joined = session.users[uid]
                        prev_pos = initial_pos = joined.rig.position
                        prev_yaw = joined.rig.yaw
                        prev_avatar = joined.agent.avatar_pose.position
                elif tf.leave:
                    session.leave(tf.user_id)
                else:
                    frames.append((tf.user_id, WireMessage(
                        "InputFrame", seq=tf.seq, session_tick=tick,
                        payload=tf.payload)))
            snapshot, events = session.server_tick(frames)
            if self.collect_snapshots:
                self.snapshots.append(encode_message(snapshot))
            if uid not in session.users:
                continue
            user = session.users[uid]

            teleport_vec = (0.0, 0.0)
            snap_yaw = 0.0
            teleported = False
            for event in events:
                if event.get("user_id") != uid:
                    continue
                if event["event"] == "teleport":
                    report.teleport_count += 1
                    teleported = True
                    teleport_vec = (
                        teleport_vec[0] + event["post"][0] - event["pre"][0],
                        teleport_vec[1] + event["post"][2] - event["pre"][2],
                    )
                elif event["event"] == "snap_turn":
                    snap_yaw += event["delta_yaw"]

            pos = user.rig.position
            yaw = user.rig.yaw
            if initial_pos is None:
                initial_pos = pos
            if prev_pos is not None:
                dx = pos[0] - prev_pos[0] - teleport_vec[0]
                dz = pos[2] - prev_pos[2] - teleport_vec[1]
                report.optical_flow_translation += math.hypot(dx, dz)
                report.optical_flow_rotation += abs(
                    wrap_angle(yaw - prev_yaw - snap_yaw))
            prev_pos, prev_yaw = pos, yaw

            d = dist_xz(pos, user.agent.avatar_pose.position)
            discrepancies.append(d)
            report.discrepancy_max = max(report.discrepancy_max, d)
            report.discrepancy_integral += d * dt

            transition = user.agent.active_transition
            if teleported:
                if self.config.avatar_mode == "primitive":
                    report.realignment_times.append(0.0)
                else:
                    if pending_start is not None:
                        report.incomplete_realignments += 1
                    pending_start = tick
            if pending_start is not None and transition is None and not teleported:
                report.realignment_times.append((tick - pending_start) * dt)
                pending_start = None

            # The transition active while the avatar moved this tick is the
            # one carried in from the previous tick; a transition created
            # this tick has not moved the avatar yet (except Dissolve's
            # sanctioned jump at start).
            governing = prev_transition if prev_transition is not None else transition
            cap = base_speed
            if governing is not None and governing.kind is TransitionKind.AFTERIMAGE:
                cap = base_speed * factor
            dissolve_start = (
                transition is not None
                and transition is not prev_transition
                and transition.kind is TransitionKind.DISSOLVE)
            if not dissolve_start and prev_avatar is not None:
                moved = dist_xz(user.agent.avatar_pose.position, prev_avatar)
                if moved > cap * dt + 1e-9:
                    report.continuity_violations += 1
            prev_avatar = user.agent.avatar_pose.position
            prev_transition = transition

        if pending_start is not None:
            report.incomplete_realignments += 1
        if discrepancies:
            report.discrepancy_mean = sum(discrepancies) / len(discrepancies)
        if initial_pos is not None and prev_pos is not None:
            report.net_displacement = dist_xz(prev_pos, initial_pos)
        return report


def run_scenario(
    scenario: Scenario,
    bundle: TechniqueBundle,
    seed: int = 0,
    tick_rate: float = 60.0,
    agent: AgentConfig | None = None,
    locomotion: LocomotionConfig | None = None,
    transition: TransitionConfig | None = None,
    record: list[TraceFrame] | None = None,
) -> MetricsReport:
    """Advance the full session simulation headlessly and report metrics.

    Runs are deterministic for a fixed seed; the seed is recorded for
    forward compatibility but no current technique draws randomness.
    """
    del seed  # deterministic pipeline; kept in the signature for stability
    config = SessionConfig(
        mesh=scenario.mesh,
        tick_rate=tick_rate,
        agent=agent or AgentConfig(),
        locomotion=locomotion or LocomotionConfig(),
        transition=transition or TransitionConfig(
            kind=TransitionKind(bundle.transition_kind)),
        avatar_mode=bundle.avatar_mode,
        default_locomotion_mode="none",
    )
    frames, ticks = schedule_from_scenario(scenario, bundle, tick_rate)
    if record is not None:
        record.extend(frames)
    run = HeadlessRun(config, frames, ticks)
    report = run.run()
    report.scenario = scenario.name
    report.technique = f"{bundle.locomotion_mode}+{bundle.transition_kind}"
    if bundle.avatar_mode == "primitive":
        report.technique = f"{bundle.locomotion_mode}+primitive"
    return report


def replay_snapshots(
    config: SessionConfig, frames: list[TraceFrame], ticks: int | None = None
) -> list[bytes]:
    """Re-run a recorded schedule, returning the encoded snapshot stream."""
    if ticks is None:
        ticks = (max((f.tick for f in frames), default=0)) + 1
    run = HeadlessRun(config, frames, ticks, collect_snapshots=True)
    run.run()
    return run.snapshots


def replay_metrics(
    config: SessionConfig, frames: list[TraceFrame], ticks: int | None = None,
    measure_user: int = 0,
) -> MetricsReport:
    if ticks is None:
        ticks = (max((f.tick for f in frames), default=0)) + 1
    run = HeadlessRun(config, frames, ticks, measure_user=measure_user)
    return run.run()
