"""Smart Avatar agent: follows its user, imitates them up close, and hands
its pose to a long-distance transition when the user teleports away.

Zone classification is a pure step function of the avatar-to-rig distance:
beyond the long-distance threshold the avatar is realigned by a transition,
inside the strafing radius its yaw locks onto the user's heading, and inside
the imitation radius head/hand imitation blends in (this module only emits
the blend weights; skeletal work is downstream). tick_agent is a pure
transition function, so identical input streams replay identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .geometry import (
    Vec2,
    bearing_xz,
    dist_xz,
    len_xz,
    slerp_yaw,
    turn_towards,
    wrap_angle,
)
from .navmesh import NavMesh, Path, find_path, locate, project_to_mesh
from .rig import Pose, UserRig
from .transitions import (
    TransitionConfig,
    TransitionState,
    start_transition,
    tick_transition,
    walk_polyline,
)

# Time constant for position easing inside the imitation zone. The easing
# curve is unspecified upstream; exponential smoothing is our choice.
IMITATE_EASE_TAU = 0.15


class Zone(str, Enum):
    FOLLOW = "follow"
    STRAFE = "strafe"
    IMITATE = "imitate"
    LONG_DISTANCE = "long_distance"


class OffMeshTarget(Exception):
    """Raised when there is no walkable mesh under the user's rig."""


@dataclass
class AgentConfig:
    strafing_radius: float = 2.0
    imitation_radius: float = 0.5
    long_distance_threshold: float = 6.0
    base_max_speed: float = 3.5
    max_angular_speed: float = math.pi
    yaw_blend_duration: float = 0.5
    arrival_radius: float = 0.05

    def __post_init__(self) -> None:
        if not (0.0 < self.imitation_radius < self.strafing_radius
                < self.long_distance_threshold):
            raise ValueError(
                "need 0 < imitation_radius < strafing_radius < long_distance_threshold")
        if self.base_max_speed <= 0.0 or self.max_angular_speed <= 0.0:
            raise ValueError("speeds must be positive")
        if self.yaw_blend_duration <= 0.0 or self.arrival_radius <= 0.0:
            raise ValueError("durations and radii must be positive")


@dataclass
class AgentState:
    avatar_pose: Pose
    zone: Zone = Zone.FOLLOW
    yaw_blend: float = 0.0
    current_path: Path | None = None
    active_transition: TransitionState | None = None
    move_yaw: float = 0.0
    path_index: int = 1

    @classmethod
    def at(cls, pose: Pose) -> "AgentState":
        return cls(avatar_pose=pose, move_yaw=pose.yaw)


@dataclass(frozen=True)
class AgentOutput:
    new_pose: Pose
    desired_lateral_velocity: Vec2
    desired_angular_velocity: float
    strafe_weight: float
    imitation_weight: float


def zone_of(distance: float, cfg: AgentConfig) -> Zone:
    """Classify a separation distance; boundaries belong to the inner zone."""
    if distance > cfg.long_distance_threshold:
        return Zone.LONG_DISTANCE
    if distance <= cfg.imitation_radius:
        return Zone.IMITATE
    if distance <= cfg.strafing_radius:
        return Zone.STRAFE
    return Zone.FOLLOW


def imitation_weight(distance: float, cfg: AgentConfig) -> float:
    """1 at full overlap, fading linearly to 0 at the imitation radius."""
    if distance >= cfg.imitation_radius:
        return 0.0
    return 1.0 - distance / cfg.imitation_radius


def _ensure_path(
    state: AgentState, mesh: NavMesh, goal, cfg: AgentConfig
) -> None:
    if (state.current_path is None
            or dist_xz(state.current_path.goal, goal) > cfg.arrival_radius):
        state.current_path = find_path(mesh, state.avatar_pose.position, goal)
        state.path_index = 1


def _output(
    old_pose: Pose,
    state: AgentState,
    distance_after: float,
    cfg: AgentConfig,
    dt: float,
    teleported: bool,
) -> AgentOutput:
    new_pose = state.avatar_pose
    if teleported:
        lateral: Vec2 = (0.0, 0.0)
        angular = 0.0
    else:
        lateral = (
            (new_pose.position[0] - old_pose.position[0]) / dt,
            (new_pose.position[2] - old_pose.position[2]) / dt,
        )
        angular = wrap_angle(new_pose.yaw - old_pose.yaw) / dt
    return AgentOutput(
        new_pose=new_pose,
        desired_lateral_velocity=lateral,
        desired_angular_velocity=angular,
        strafe_weight=state.yaw_blend,
        imitation_weight=imitation_weight(distance_after, cfg),
    )


def tick_agent(
    state: AgentState,
    rig: UserRig,
    mesh: NavMesh,
    cfg: AgentConfig,
    dt: float,
    transition_cfg: TransitionConfig | None = None,
) -> tuple[AgentState, AgentOutput]:
    """Advance the avatar by one tick against the current rig state.

    The transition config selects which long-distance visualization is
    created when the threshold is exceeded; it defaults to Walking.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    tcfg = transition_cfg if transition_cfg is not None else TransitionConfig()
    old_pose = state.avatar_pose

    if state.active_transition is not None:
        tr = state.active_transition
        tick_transition(tr, rig, mesh, tcfg, cfg.base_max_speed,
                        cfg.arrival_radius, dt)
        state.avatar_pose = tr.primary_pose
        state.move_yaw = tr.primary_pose.yaw
        teleported = False
        if tr.complete:
            state.active_transition = None
            distance = dist_xz(state.avatar_pose.position, rig.position)
            state.zone = zone_of(distance, cfg)
            if state.zone is Zone.LONG_DISTANCE:
                # User teleported again on the arrival tick.
                arrived_at = state.avatar_pose.position
                state.active_transition = start_transition(
                    tcfg.kind, state.avatar_pose, rig, mesh, tcfg)
                state.avatar_pose = state.active_transition.primary_pose
                teleported = state.avatar_pose.position != arrived_at
                distance = dist_xz(state.avatar_pose.position, rig.position)
        else:
            state.zone = Zone.LONG_DISTANCE
            distance = dist_xz(state.avatar_pose.position, rig.position)
        return state, _output(old_pose, state, distance, cfg, dt, teleported)

    if locate(mesh, rig.position) is None:
        raise OffMeshTarget("no walkable mesh under the user's rig")
    goal = project_to_mesh(mesh, rig.position)
    distance = dist_xz(state.avatar_pose.position, rig.position)
    zone = zone_of(distance, cfg)

    if zone is Zone.LONG_DISTANCE:
        state.zone = zone
        state.current_path = None
        state.path_index = 1
        state.yaw_blend = 0.0
        state.active_transition = start_transition(
            tcfg.kind, state.avatar_pose, rig, mesh, tcfg)
        state.avatar_pose = state.active_transition.primary_pose
        state.move_yaw = state.avatar_pose.yaw
        teleported = state.avatar_pose.position != old_pose.position
        distance = dist_xz(state.avatar_pose.position, rig.position)
        return state, _output(old_pose, state, distance, cfg, dt, teleported)

    state.zone = zone
    blend_step = dt / cfg.yaw_blend_duration
    pos = state.avatar_pose.position

    if zone is Zone.IMITATE:
        state.yaw_blend = min(1.0, state.yaw_blend + blend_step)
        state.current_path = None
        state.path_index = 1
        # Ease toward the rig, never faster than the walking speed cap.
        factor = 1.0 - math.exp(-dt / IMITATE_EASE_TAU)
        step = (
            (goal[0] - pos[0]) * factor,
            (goal[1] - pos[1]) * factor,
            (goal[2] - pos[2]) * factor,
        )
        cap = cfg.base_max_speed * dt
        step_len = len_xz(step)
        if step_len > cap:
            scale = cap / step_len
            step = (step[0] * scale, step[1] * scale, step[2] * scale)
        pos = (pos[0] + step[0], pos[1] + step[1], pos[2] + step[2])
        if locate(mesh, pos) is None:
            pos = project_to_mesh(mesh, pos)
    else:
        if zone is Zone.STRAFE:
            state.yaw_blend = min(1.0, state.yaw_blend + blend_step)
        else:
            state.yaw_blend = max(0.0, state.yaw_blend - blend_step)
        if distance > cfg.arrival_radius:
            _ensure_path(state, mesh, goal, cfg)
            pos, state.path_index, _, _ = walk_polyline(
                pos, state.current_path.waypoints, state.path_index,
                cfg.base_max_speed * dt)

    moved = (pos[0] - state.avatar_pose.position[0],
             pos[2] - state.avatar_pose.position[2])
    if moved != (0.0, 0.0):
        state.move_yaw = turn_towards(
            state.move_yaw, bearing_xz(moved), cfg.max_angular_speed * dt)
    yaw = slerp_yaw(state.move_yaw, rig.yaw, state.yaw_blend)
    state.avatar_pose = Pose(pos, yaw, state.avatar_pose.pitch,
                             state.avatar_pose.roll)

    distance = dist_xz(pos, rig.position)
    return state, _output(old_pose, state, distance, cfg, dt, teleported=False)
