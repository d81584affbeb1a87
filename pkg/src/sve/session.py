"""Authoritative multi-user session simulation.

One Session owns all rigs and avatars and advances them at a fixed tick:
newest input frame per user is mapped to motion commands, commands mutate
the rigs (teleports are logged as events), then every avatar agent ticks
against the updated rigs, and finally a canonical snapshot is produced.
Sequence numbers of broadcast messages are pure functions of the session
tick, so a replayed schedule reproduces the snapshot stream byte for byte.

Rigs are constrained to the walkable mesh: both continuous motion and
teleport targets are projected onto it, which keeps every agent's
pathfinding target valid.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .agent import AgentConfig, AgentState, Zone, tick_agent
from .geometry import wrap_angle
from .locomotion import (
    CommandKind,
    InputSample,
    LocomotionConfig,
    MapperState,
    MotionCommand,
    map_smooth_joystick,
    map_smooth_pushpull,
    map_stuttered_joystick,
    map_stuttered_pushpull,
    sample_from_dict,
    snap_turn,
)
from .navmesh import NavMesh, project_to_mesh
from .protocol import SeqRegression, SeqTracker, WireMessage
from .rig import Pose, UserRig, pose_to_dict, rig_to_dict
from .transitions import TransitionConfig, TransitionKind, TransitionState

LOCOMOTION_MODES = (
    "none",
    "smooth_joystick",
    "stuttered_joystick",
    "smooth_pushpull",
    "stuttered_pushpull",
)

AVATAR_MODES = ("smart", "primitive")


class SessionError(Exception):
    pass


class SessionFull(SessionError):
    pass


@dataclass
class SessionConfig:
    mesh: NavMesh
    tick_rate: float = 60.0
    agent: AgentConfig = field(default_factory=AgentConfig)
    locomotion: LocomotionConfig = field(default_factory=LocomotionConfig)
    transition: TransitionConfig = field(default_factory=TransitionConfig)
    max_users: int = 16
    default_locomotion_mode: str = "smooth_joystick"
    avatar_mode: str = "smart"

    def __post_init__(self) -> None:
        if self.tick_rate <= 0.0:
            raise ValueError("tick_rate must be positive")
        if self.default_locomotion_mode not in LOCOMOTION_MODES:
            raise ValueError(f"unknown locomotion mode {self.default_locomotion_mode!r}")
        if self.avatar_mode not in AVATAR_MODES:
            raise ValueError(f"unknown avatar mode {self.avatar_mode!r}")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


@dataclass
class SessionUser:
    user_id: int
    name: str
    rig: UserRig
    agent: AgentState
    mapper: MapperState
    locomotion_mode: str
    transition_kind: TransitionKind
    sample: InputSample = field(default_factory=InputSample)
    pending_teleport: tuple[float, float, float] | None = None
    last_teleport_seq: int = 0
    strafe_weight: float = 0.0
    imitation_weight: float = 0.0


class Session:
    """Fixed-tick simulation; one logical actor advances it, never shared."""

    def __init__(self, config: SessionConfig) -> None:
        self.config = config
        self.mesh = config.mesh
        self.users: dict[int, SessionUser] = {}
        self.tick = 0
        self._seq_tracker = SeqTracker()
        self._pending_events: list[dict] = []

    def join(
        self,
        name: str = "",
        user_id: int | None = None,
        position: tuple[float, float, float] = (0.0, 0.0, 0.0),
        yaw: float = 0.0,
        locomotion_mode: str | None = None,
    ) -> int:
        if len(self.users) >= self.config.max_users:
            raise SessionFull(f"session capped at {self.config.max_users} users")
        if user_id is None:
            user_id = 0
            while user_id in self.users:
                user_id += 1
        elif user_id in self.users:
            raise SessionError(f"user id {user_id} already joined")
        mode = locomotion_mode or self.config.default_locomotion_mode
        if mode not in LOCOMOTION_MODES:
            raise ValueError(f"unknown locomotion mode {mode!r}")
        spawn = project_to_mesh(self.mesh, position)
        pose = Pose(spawn, yaw)
        self.users[user_id] = SessionUser(
            user_id=user_id,
            name=name,
            rig=UserRig.standing(spawn, yaw),
            agent=AgentState.at(pose),
            mapper=MapperState(),
            locomotion_mode=mode,
            transition_kind=self.config.transition.kind,
        )
        self._pending_events.append(
            {"event": "join", "user_id": user_id, "name": name})
        return user_id

    def leave(self, user_id: int) -> None:
        if user_id in self.users:
            del self.users[user_id]
            self._seq_tracker.forget(user_id)
            self._pending_events.append({"event": "leave", "user_id": user_id})

    def apply_frame(self, user_id: int, msg: WireMessage) -> dict | None:
        """Stage one input frame; returns a drop event when rejected."""
        if user_id not in self.users:
            return {"event": "unknown_user", "user_id": user_id, "seq": msg.seq}
        try:
            self._seq_tracker.check(user_id, msg.seq)
        except SeqRegression:
            return {"event": "seq_regression", "user_id": user_id, "seq": msg.seq}
        user = self.users[user_id]
        payload = msg.payload
        user.sample = sample_from_dict(payload)
        teleport_to = payload.get("teleport_to")
        if teleport_to is not None:
            user.pending_teleport = (
                float(teleport_to[0]), float(teleport_to[1]), float(teleport_to[2]))
        mode = payload.get("locomotion_mode")
        if mode is not None and mode in LOCOMOTION_MODES:
            user.locomotion_mode = mode
        kind = payload.get("transition_kind")
        if kind is not None:
            try:
                user.transition_kind = TransitionKind(kind)
            except ValueError:
                pass
        return None

    def _map_commands(self, user: SessionUser) -> list[MotionCommand]:
        cfg = self.config.locomotion
        dt = self.config.dt
        rig = user.rig
        commands: list[MotionCommand] = []
        if user.pending_teleport is not None:
            target = project_to_mesh(self.mesh, user.pending_teleport)
            offset = (target[0] - rig.position[0], 0.0,
                      target[2] - rig.position[2])
            commands.append(MotionCommand.teleport(offset))
            user.pending_teleport = None
        sample = user.sample
        mode = user.locomotion_mode
        if mode == "smooth_joystick":
            commands.extend(map_smooth_joystick(sample, cfg, dt, rig.yaw))
        elif mode == "stuttered_joystick":
            step_cmds, _ = map_stuttered_joystick(sample, user.mapper, cfg, dt, rig.yaw)
            commands.extend(step_cmds)
            turn_cmds, _ = snap_turn(sample.right_stick[0], user.mapper, cfg)
            commands.extend(turn_cmds)
        elif mode == "smooth_pushpull":
            pp_cmds, _ = map_smooth_pushpull(sample, user.mapper, cfg, rig)
            commands.extend(pp_cmds)
        elif mode == "stuttered_pushpull":
            pp_cmds, _ = map_stuttered_pushpull(sample, user.mapper, cfg, rig)
            commands.extend(pp_cmds)
        return commands

    def _apply_commands(
        self, user: SessionUser, commands: list[MotionCommand], events: list[dict]
    ) -> None:
        rig = user.rig
        pos = rig.position
        yaw = rig.yaw
        continuous_moved = False
        for cmd in commands:
            if cmd.kind is CommandKind.CONTINUOUS:
                pos = (pos[0] + cmd.delta_position[0], pos[1],
                       pos[2] + cmd.delta_position[2])
                yaw = wrap_angle(yaw + cmd.delta_yaw)
                continuous_moved = True
            elif cmd.kind is CommandKind.TELEPORT:
                pre = pos
                jumped = (pos[0] + cmd.target_offset[0], pos[1],
                          pos[2] + cmd.target_offset[2])
                pos = project_to_mesh(self.mesh, jumped)
                user.last_teleport_seq += 1
                events.append({
                    "event": "teleport",
                    "user_id": user.user_id,
                    "pre": list(pre),
                    "post": list(pos),
                    "teleport_seq": user.last_teleport_seq,
                })
            else:
                yaw = wrap_angle(yaw + cmd.delta_yaw)
                events.append({
                    "event": "snap_turn",
                    "user_id": user.user_id,
                    "delta_yaw": cmd.delta_yaw,
                })
        if continuous_moved:
            pos = project_to_mesh(self.mesh, pos)
        rig.rig_origin = Pose(pos, yaw, rig.rig_origin.pitch, rig.rig_origin.roll)

    def _tick_avatars(self) -> None:
        for user_id in sorted(self.users):
            user = self.users[user_id]
            if self.config.avatar_mode == "primitive":
                # Baseline: the avatar hard-snaps to the rig every tick.
                user.agent.avatar_pose = user.rig.rig_origin
                user.strafe_weight = 0.0
                user.imitation_weight = 0.0
                continue
            tcfg = self.config.transition
            if user.transition_kind is not tcfg.kind:
                tcfg = dataclasses.replace(tcfg, kind=user.transition_kind)
            user.agent, output = tick_agent(
                user.agent, user.rig, self.mesh, self.config.agent,
                self.config.dt, tcfg)
            user.strafe_weight = output.strafe_weight
            user.imitation_weight = output.imitation_weight

    def server_tick(
        self, frames: list[tuple[int, WireMessage]] = ()
    ) -> tuple[WireMessage, list[dict]]:
        """Advance one tick: apply the newest frame per user, run mappers and
        agents in ascending user id order, emit the snapshot and events."""
        events: list[dict] = list(self._pending_events)
        self._pending_events.clear()
        for user_id, msg in frames:
            drop = self.apply_frame(user_id, msg)
            if drop is not None:
                events.append(drop)
        for user_id in sorted(self.users):
            user = self.users[user_id]
            commands = self._map_commands(user)
            self._apply_commands(user, commands, events)
        self._tick_avatars()
        snapshot = self.snapshot_message()
        self.tick += 1
        return snapshot, events

    # Message builders. Sequence numbers are derived from the tick so the
    # broadcast stream is reproducible: per tick T the server may send
    # Welcome (3T), Event (3T+1), Snapshot (3T+2).

    def event_message(self, events: list[dict], tick: int | None = None) -> WireMessage:
        t = self.tick if tick is None else tick
        return WireMessage("Event", seq=3 * t + 1,
                           session_tick=t, payload={"events": events})

    def snapshot_message(self) -> WireMessage:
        return WireMessage("Snapshot", seq=3 * self.tick + 2,
                           session_tick=self.tick, payload=self.snapshot_payload())

    def welcome_message(self, user_id: int) -> WireMessage:
        return WireMessage("Welcome", seq=3 * self.tick,
                           session_tick=self.tick,
                           payload={"user_id": user_id,
                                    "snapshot": self.snapshot_payload()})

    def snapshot_payload(self) -> dict:
        users = []
        for user_id in sorted(self.users):
            user = self.users[user_id]
            entry = {
                "user_id": user_id,
                "name": user.name,
                "rig": rig_to_dict(user.rig),
                "avatar": {
                    "pose": pose_to_dict(user.agent.avatar_pose),
                    "zone": user.agent.zone.value,
                    "strafe_weight": user.strafe_weight,
                    "imitation_weight": user.imitation_weight,
                },
                "transition": _transition_to_dict(user.agent.active_transition),
                "last_teleport_seq": user.last_teleport_seq,
            }
            users.append(entry)
        return {"session_tick": self.tick, "users": users}


def _transition_to_dict(tr: TransitionState | None) -> dict | None:
    if tr is None:
        return None
    data = {
        "kind": tr.kind.value,
        "elapsed": tr.elapsed,
        "complete": tr.complete,
        "primary": pose_to_dict(tr.primary_pose),
        "target": list(tr.target),
        "ghosts": [
            {"pose": pose_to_dict(g.pose), "alpha": g.alpha, "expiry": g.expiry}
            for g in tr.ghosts
        ],
        "dissolve_in_alpha": tr.dissolve_in_alpha,
        "dissolve_out_alpha": tr.dissolve_out_alpha,
        "stream": None,
        "user_ghost": None,
        "trail": None,
        "visible_to_owner": tr.visible_to_owner,
    }
    if tr.stream is not None:
        data["stream"] = {"from": list(tr.stream[0]), "to": list(tr.stream[1])}
    if tr.user_ghost_pose is not None:
        data["user_ghost"] = pose_to_dict(tr.user_ghost_pose)
    if tr.trail_pose is not None:
        data["trail"] = pose_to_dict(tr.trail_pose)
    return data
