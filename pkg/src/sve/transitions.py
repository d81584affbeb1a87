"""Long-distance travel visualizations: Walking, Afterimage, Dissolve, Foresight.

Each transition is a deterministic timeline that realigns the solid avatar
with its user after a teleport. State is advanced by tick_transition; poses,
ghost entities, and alphas are data for clients to render, never rendering
itself. The target tracks the user's live position, so a second teleport
mid-transition retargets the timeline instead of stacking a new one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .geometry import Vec3, bearing_xz, dist_xz
from .navmesh import NavMesh, Path, find_path, project_to_mesh
from .rig import Pose, UserRig

_WALK_EPS = 1e-12


class TransitionKind(str, Enum):
    WALKING = "walking"
    AFTERIMAGE = "afterimage"
    DISSOLVE = "dissolve"
    FORESIGHT = "foresight"


@dataclass
class TransitionConfig:
    kind: TransitionKind = TransitionKind.WALKING
    speed_factor: float = 10.0
    ghost_spacing: float = 0.75
    ghost_fade: float = 1.0
    dissolve_duration: float = 0.8

    def __post_init__(self) -> None:
        self.kind = TransitionKind(self.kind)
        if self.speed_factor < 1.0:
            raise ValueError("speed_factor must be >= 1")
        if self.ghost_spacing <= 0.0:
            raise ValueError("ghost_spacing must be positive")
        if self.ghost_fade <= 0.0 or self.dissolve_duration <= 0.0:
            raise ValueError("durations must be positive")


@dataclass
class Ghost:
    pose: Pose
    spawn_time: float
    alpha: float = 1.0
    expiry: str = "timed"  # or "on_pass_through"


@dataclass
class TransitionState:
    kind: TransitionKind
    start_pose: Pose
    target: Vec3
    primary_pose: Pose
    ghosts: list[Ghost] = field(default_factory=list)
    dissolve_in_alpha: float = 0.0
    dissolve_out_alpha: float = 0.0
    stream: tuple[Vec3, Vec3] | None = None
    elapsed: float = 0.0
    complete: bool = False
    user_ghost_pose: Pose | None = None
    trail_pose: Pose | None = None
    visible_to_owner: bool = False
    # Path-following bookkeeping.
    path: Path | None = None
    path_index: int = 1
    trail_path: Path | None = None
    trail_index: int = 1
    since_spawn: float = 0.0


def walk_polyline(
    pos: Vec3,
    waypoints: tuple[Vec3, ...],
    index: int,
    travel: float,
    since_spawn: float = 0.0,
    spacing: float | None = None,
) -> tuple[Vec3, int, float, list[Vec3]]:
    """Advance pos up to travel meters along waypoints[index:].

    When spacing is given, returns the crossing points at every spacing
    meters of walked arc so callers can drop ghosts exactly on the trail.
    """
    spawns: list[Vec3] = []
    while travel > _WALK_EPS and index < len(waypoints):
        target = waypoints[index]
        d = dist_xz(pos, target)
        if d <= _WALK_EPS:
            pos = target
            index += 1
            continue
        step = min(travel, d)
        if spacing is not None:
            to_mark = spacing - since_spawn
            if to_mark < step:
                step = to_mark
        f = step / d
        pos = (
            pos[0] + (target[0] - pos[0]) * f,
            pos[1] + (target[1] - pos[1]) * f,
            pos[2] + (target[2] - pos[2]) * f,
        )
        travel -= step
        if spacing is not None and since_spawn + step >= spacing - _WALK_EPS:
            since_spawn = 0.0
            spawns.append(pos)
        else:
            since_spawn += step
        if step >= d - _WALK_EPS:
            pos = target
            index += 1
    return pos, index, since_spawn, spawns


def _faced(pose: Pose, new_pos: Vec3) -> Pose:
    dx = new_pos[0] - pose.position[0]
    dz = new_pos[2] - pose.position[2]
    if dx == 0.0 and dz == 0.0:
        return pose.moved_to(new_pos)
    return Pose(new_pos, bearing_xz((dx, dz)), pose.pitch, pose.roll)


def start_transition(
    kind: TransitionKind,
    avatar_pose: Pose,
    rig: UserRig,
    mesh: NavMesh,
    cfg: TransitionConfig,
) -> TransitionState:
    """Initialize the transition timeline for a freshly exceeded gap."""
    kind = TransitionKind(kind)
    target = project_to_mesh(mesh, rig.position)
    state = TransitionState(
        kind=kind,
        start_pose=avatar_pose,
        target=target,
        primary_pose=avatar_pose,
    )
    if kind is TransitionKind.DISSOLVE:
        # The original avatar teleports with the user; a static copy stays
        # behind and a matter stream links the two endpoints.
        state.primary_pose = Pose(target, rig.yaw)
        state.ghosts.append(Ghost(pose=avatar_pose, spawn_time=0.0, alpha=1.0))
        state.stream = (avatar_pose.position, target)
        state.dissolve_in_alpha = 0.0
        state.dissolve_out_alpha = 1.0
        return state

    state.path = find_path(mesh, avatar_pose.position, target)
    if kind is TransitionKind.FORESIGHT:
        state.trail_pose = avatar_pose
        state.trail_path = state.path
        state.trail_index = 1
        state.user_ghost_pose = Pose(target, rig.yaw)
    return state


def _retarget(state: TransitionState, rig: UserRig, mesh: NavMesh,
              arrival_radius: float) -> None:
    new_target = project_to_mesh(mesh, rig.position)
    if dist_xz(new_target, state.target) <= arrival_radius:
        return
    state.target = new_target
    if state.kind is TransitionKind.DISSOLVE:
        # Stream restarts from the copy left at the start pose.
        state.stream = (state.ghosts[0].pose.position, new_target)
        return
    state.path = find_path(mesh, state.primary_pose.position, new_target)
    state.path_index = 1
    if state.kind is TransitionKind.FORESIGHT:
        state.trail_path = find_path(mesh, state.trail_pose.position, new_target)
        state.trail_index = 1


def tick_transition(
    state: TransitionState,
    rig: UserRig,
    mesh: NavMesh,
    cfg: TransitionConfig,
    base_speed: float,
    arrival_radius: float,
    dt: float,
) -> TransitionState:
    """Advance the timeline by dt. Walking moves the primary at base speed,
    Afterimage at base * speed_factor while dropping fading ghosts,
    Dissolve crossfades the two endpoints, and Foresight races an invisible
    trail layer ahead of a base-speed runner."""
    if state.complete:
        raise ValueError("transition already complete")
    state.elapsed += dt
    _retarget(state, rig, mesh, arrival_radius)

    kind = state.kind
    if kind is TransitionKind.DISSOLVE:
        state.dissolve_in_alpha = min(1.0, state.elapsed / cfg.dissolve_duration)
        state.dissolve_out_alpha = 1.0 - state.dissolve_in_alpha
        state.ghosts[0].alpha = state.dissolve_out_alpha
        state.primary_pose = Pose(state.target, rig.yaw)
        if state.elapsed >= cfg.dissolve_duration - _WALK_EPS:
            state.complete = True
        return state

    if kind is TransitionKind.WALKING:
        pos, idx, _, _ = walk_polyline(
            state.primary_pose.position, state.path.waypoints,
            state.path_index, base_speed * dt)
        state.primary_pose = _faced(state.primary_pose, pos)
        state.path_index = idx

    elif kind is TransitionKind.AFTERIMAGE:
        pos, idx, since, spawns = walk_polyline(
            state.primary_pose.position, state.path.waypoints,
            state.path_index, base_speed * cfg.speed_factor * dt,
            state.since_spawn, cfg.ghost_spacing)
        for p in spawns:
            state.ghosts.append(Ghost(pose=_faced(state.primary_pose, p),
                                      spawn_time=state.elapsed))
        state.primary_pose = _faced(state.primary_pose, pos)
        state.path_index = idx
        state.since_spawn = since
        for ghost in state.ghosts:
            age = state.elapsed - ghost.spawn_time
            ghost.alpha = max(0.0, 1.0 - age / cfg.ghost_fade)

    elif kind is TransitionKind.FORESIGHT:
        trail_pos, t_idx, since, spawns = walk_polyline(
            state.trail_pose.position, state.trail_path.waypoints,
            state.trail_index, base_speed * cfg.speed_factor * dt,
            state.since_spawn, cfg.ghost_spacing)
        for p in spawns:
            state.ghosts.append(Ghost(pose=_faced(state.trail_pose, p),
                                      spawn_time=state.elapsed,
                                      expiry="on_pass_through"))
        state.trail_pose = _faced(state.trail_pose, trail_pos)
        state.trail_index = t_idx
        state.since_spawn = since

        pos, idx, _, _ = walk_polyline(
            state.primary_pose.position, state.path.waypoints,
            state.path_index, base_speed * dt)
        state.primary_pose = _faced(state.primary_pose, pos)
        state.path_index = idx
        state.user_ghost_pose = Pose(state.target, rig.yaw)
        # Trail images vanish the moment the runner reaches them.
        for ghost in state.ghosts:
            if ghost.alpha > 0.0 and dist_xz(
                    pos, ghost.pose.position) <= cfg.ghost_spacing / 2.0:
                ghost.alpha = 0.0

    if dist_xz(state.primary_pose.position, state.target) <= arrival_radius:
        state.complete = True
    return state
