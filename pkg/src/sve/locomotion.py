"""Controller input to rig motion: smooth and stuttered mappers.

Two input families are supported. Joystick tilts the left stick to move
(speed linear in tilt above a deadzone) and the right stick to turn.
PushPull drags the world with the left hand (the grabbing hand stays
world-fixed) and yaws about the rig with the right hand. Each family has
a smooth variant emitting continuous deltas and a stuttered variant that
quantizes the same motion into fixed-length teleport steps and fixed-angle
snap turns, so teleports contribute no continuous viewport translation.

Mappers are pure functions of (sample, state); all persistent bookkeeping
lives in MapperState, one per user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .geometry import (
    Vec2,
    Vec3,
    bearing_xz,
    len_xz,
    norm_xz,
    rotate_xz,
    wrap_angle,
)
from .rig import Pose, UserRig, pose_from_dict, pose_to_dict

_COUNTDOWN_EPS = 1e-9


class CommandKind(str, Enum):
    CONTINUOUS = "continuous"
    TELEPORT = "teleport"
    SNAP_TURN = "snap_turn"


@dataclass(frozen=True)
class MotionCommand:
    """One rig mutation: a continuous delta, a discrete jump, or a snap turn.

    Teleport offsets and continuous deltas are confined to the XZ plane.
    """

    kind: CommandKind
    delta_position: Vec3 = (0.0, 0.0, 0.0)
    target_offset: Vec3 = (0.0, 0.0, 0.0)
    delta_yaw: float = 0.0

    @classmethod
    def continuous(cls, delta: Vec3, delta_yaw: float = 0.0) -> "MotionCommand":
        return cls(CommandKind.CONTINUOUS, delta_position=(delta[0], 0.0, delta[2]),
                   delta_yaw=delta_yaw)

    @classmethod
    def teleport(cls, offset: Vec3) -> "MotionCommand":
        return cls(CommandKind.TELEPORT, target_offset=(offset[0], 0.0, offset[2]))

    @classmethod
    def snap(cls, delta_yaw: float) -> "MotionCommand":
        return cls(CommandKind.SNAP_TURN, delta_yaw=delta_yaw)


@dataclass
class InputSample:
    """One controller reading; hand poses are rig-local."""

    t: float = 0.0
    left_stick: Vec2 = (0.0, 0.0)
    right_stick: Vec2 = (0.0, 0.0)
    left_hand: Pose = field(default_factory=lambda: Pose((-0.25, 1.0, 0.3)))
    right_hand: Pose = field(default_factory=lambda: Pose((0.25, 1.0, 0.3)))
    left_grab: bool = False
    right_grab: bool = False


def sample_to_dict(sample: InputSample) -> dict:
    return {
        "t": sample.t,
        "left_stick": list(sample.left_stick),
        "right_stick": list(sample.right_stick),
        "left_hand": pose_to_dict(sample.left_hand),
        "right_hand": pose_to_dict(sample.right_hand),
        "left_grab": sample.left_grab,
        "right_grab": sample.right_grab,
    }


def sample_from_dict(data: dict) -> InputSample:
    ls = data.get("left_stick", [0.0, 0.0])
    rs = data.get("right_stick", [0.0, 0.0])
    sample = InputSample(t=float(data.get("t", 0.0)))
    sample.left_stick = (float(ls[0]), float(ls[1]))
    sample.right_stick = (float(rs[0]), float(rs[1]))
    if "left_hand" in data:
        sample.left_hand = pose_from_dict(data["left_hand"])
    if "right_hand" in data:
        sample.right_hand = pose_from_dict(data["right_hand"])
    sample.left_grab = bool(data.get("left_grab", False))
    sample.right_grab = bool(data.get("right_grab", False))
    return sample


@dataclass
class LocomotionConfig:
    max_joystick_speed: float = 2.5
    step_length: float = 0.5
    turn_step: float = math.pi / 6
    countdown_multiplier: float = 1.0
    max_pushpull_multiplier: float = 4.0
    chest_height: float = 1.35
    hip_height: float = 0.95
    stick_deadzone: float = 0.1
    smooth_turn_speed: float = math.pi / 2

    def __post_init__(self) -> None:
        if self.hip_height >= self.chest_height:
            raise ValueError("hip_height must be below chest_height")
        if self.step_length <= 0.0:
            raise ValueError("step_length must be positive")
        if self.max_pushpull_multiplier < 1.0:
            raise ValueError("max_pushpull_multiplier must be >= 1")
        if self.countdown_multiplier < 1.0:
            raise ValueError("countdown_multiplier must be >= 1")


@dataclass
class MapperState:
    """Per-user mapper bookkeeping across ticks."""

    anchor_left: Vec3 | None = None
    anchor_right: float | None = None
    accumulated_drag: Vec3 = (0.0, 0.0, 0.0)
    countdown_remaining: float = 0.0
    yaw_accumulator: float = 0.0
    joystick_tilted: bool = False
    snap_engaged: int = 0
    grab_start_rig: Vec3 | None = None


def velocity_multiplier(hand_y: float, cfg: LocomotionConfig) -> float:
    """Dynamic PushPull multiplier: 1 at chest height and above,
    max at hip height and below, linear in between."""
    if hand_y >= cfg.chest_height:
        return 1.0
    if hand_y <= cfg.hip_height:
        return cfg.max_pushpull_multiplier
    span = cfg.chest_height - cfg.hip_height
    frac = (cfg.chest_height - hand_y) / span
    return 1.0 + (cfg.max_pushpull_multiplier - 1.0) * frac


def _tilt(stick: Vec2, deadzone: float) -> float:
    m = math.hypot(stick[0], stick[1])
    if m < deadzone:
        return 0.0
    return min(m, 1.0)


def _stick_world_dir(stick: Vec2, rig_yaw: float) -> Vec3:
    wx, wz = rotate_xz(stick, rig_yaw)
    return norm_xz((wx, 0.0, wz))


def map_smooth_joystick(
    sample: InputSample, cfg: LocomotionConfig, dt: float, rig_yaw: float
) -> list[MotionCommand]:
    """One continuous delta: speed linear in tilt, direction stick-relative
    to the rig heading; right stick X turns continuously."""
    tilt = _tilt(sample.left_stick, cfg.stick_deadzone)
    speed = cfg.max_joystick_speed * tilt
    direction = _stick_world_dir(sample.left_stick, rig_yaw)
    delta = (direction[0] * speed * dt, 0.0, direction[2] * speed * dt)
    turn_x = sample.right_stick[0]
    if abs(turn_x) < cfg.stick_deadzone:
        turn_x = 0.0
    delta_yaw = cfg.smooth_turn_speed * turn_x * dt
    return [MotionCommand.continuous(delta, delta_yaw)]


def map_stuttered_joystick(
    sample: InputSample,
    state: MapperState,
    cfg: LocomotionConfig,
    dt: float,
    rig_yaw: float,
) -> tuple[list[MotionCommand], MapperState]:
    """Teleport steps: one immediately on the first tilted frame, then one
    each time the countdown expires while the tilt is held.

    The countdown interval is step_length / (max speed * tilt), further
    divided by the configured countdown multiplier, which makes the average
    stuttered speed equal the smooth speed at the same tilt.
    """
    commands: list[MotionCommand] = []
    tilt = _tilt(sample.left_stick, cfg.stick_deadzone)
    if tilt == 0.0:
        state.joystick_tilted = False
        state.countdown_remaining = 0.0
        return commands, state

    direction = _stick_world_dir(sample.left_stick, rig_yaw)
    interval = cfg.step_length / (cfg.max_joystick_speed * tilt)
    interval /= cfg.countdown_multiplier

    if not state.joystick_tilted:
        state.joystick_tilted = True
        commands.append(MotionCommand.teleport(
            (direction[0] * cfg.step_length, 0.0, direction[2] * cfg.step_length)))
        state.countdown_remaining = interval
        return commands, state

    state.countdown_remaining -= dt
    while state.countdown_remaining <= _COUNTDOWN_EPS:
        commands.append(MotionCommand.teleport(
            (direction[0] * cfg.step_length, 0.0, direction[2] * cfg.step_length)))
        state.countdown_remaining += interval
    return commands, state


def snap_turn(
    right_stick_x: float, state: MapperState, cfg: LocomotionConfig
) -> tuple[list[MotionCommand], MapperState]:
    """Edge-triggered discrete turn: fires when X crosses +-0.5 from below,
    re-arms once X returns inside +-0.3."""
    commands: list[MotionCommand] = []
    if state.snap_engaged != 0 and abs(right_stick_x) < 0.3:
        state.snap_engaged = 0
    if state.snap_engaged == 0:
        if right_stick_x >= 0.5:
            commands.append(MotionCommand.snap(cfg.turn_step))
            state.snap_engaged = 1
        elif right_stick_x <= -0.5:
            commands.append(MotionCommand.snap(-cfg.turn_step))
            state.snap_engaged = -1
    return commands, state


def _projected_drag(anchor: Vec3, hand: Vec3) -> Vec3:
    return (anchor[0] - hand[0], 0.0, anchor[2] - hand[2])


def map_smooth_pushpull(
    sample: InputSample,
    state: MapperState,
    cfg: LocomotionConfig,
    rig: UserRig,
) -> tuple[list[MotionCommand], MapperState]:
    """World-drag locomotion: while the left grab is held the rig is placed
    at its grab-start position offset by the projected hand drag, scaled by
    the dynamic multiplier at the current hand height. Right grab yaws the
    rig so the dragging hand keeps its world bearing. Both compose in one
    continuous command.
    """
    delta: Vec3 = (0.0, 0.0, 0.0)
    delta_yaw = 0.0

    if sample.left_grab:
        hand = sample.left_hand.position
        if state.anchor_left is None:
            state.anchor_left = hand
            state.grab_start_rig = rig.position
        else:
            drag = _projected_drag(state.anchor_left, hand)
            hand_world_y = rig.position[1] + hand[1]
            mult = velocity_multiplier(hand_world_y, cfg)
            target = (
                state.grab_start_rig[0] + drag[0] * mult,
                rig.position[1],
                state.grab_start_rig[2] + drag[2] * mult,
            )
            delta = (target[0] - rig.position[0], 0.0, target[2] - rig.position[2])
    else:
        state.anchor_left = None
        state.grab_start_rig = None

    if sample.right_grab:
        local_bearing = bearing_xz(sample.right_hand.position)
        if state.anchor_right is None:
            state.anchor_right = wrap_angle(local_bearing + rig.yaw)
        else:
            target_yaw = wrap_angle(state.anchor_right - local_bearing)
            delta_yaw = wrap_angle(target_yaw - rig.yaw)
    else:
        state.anchor_right = None

    return [MotionCommand.continuous(delta, delta_yaw)], state


def map_stuttered_pushpull(
    sample: InputSample,
    state: MapperState,
    cfg: LocomotionConfig,
    rig: UserRig,
) -> tuple[list[MotionCommand], MapperState]:
    """Dead-zone quantized world-drag: accumulated projected drag past
    step_length / multiplier emits one teleport of exactly step_length each
    crossing, resetting the anchor to the corresponding hand position so
    the residual is retained. Anchor turning is likewise quantized into
    snap steps of the configured turn angle."""
    commands: list[MotionCommand] = []

    if sample.left_grab:
        hand = sample.left_hand.position
        if state.anchor_left is None:
            state.anchor_left = hand
            state.accumulated_drag = (0.0, 0.0, 0.0)
        else:
            drag = _projected_drag(state.anchor_left, hand)
            hand_world_y = rig.position[1] + hand[1]
            mult = velocity_multiplier(hand_world_y, cfg)
            threshold = cfg.step_length / mult
            magnitude = len_xz(drag)
            steps = int(magnitude / threshold + _COUNTDOWN_EPS)
            if steps > 0:
                direction = norm_xz(drag)
                for _ in range(steps):
                    commands.append(MotionCommand.teleport((
                        direction[0] * cfg.step_length,
                        0.0,
                        direction[2] * cfg.step_length,
                    )))
                residual = (
                    drag[0] - direction[0] * threshold * steps,
                    0.0,
                    drag[2] - direction[2] * threshold * steps,
                )
                state.anchor_left = (
                    hand[0] + residual[0], hand[1], hand[2] + residual[2])
                state.accumulated_drag = residual
            else:
                state.accumulated_drag = drag
    else:
        state.anchor_left = None
        state.accumulated_drag = (0.0, 0.0, 0.0)

    if sample.right_grab:
        local_bearing = bearing_xz(sample.right_hand.position)
        if state.anchor_right is None:
            state.anchor_right = wrap_angle(local_bearing + rig.yaw)
            state.yaw_accumulator = 0.0
        else:
            target_yaw = wrap_angle(state.anchor_right - local_bearing)
            pending = wrap_angle(target_yaw - rig.yaw)
            turns = int(abs(pending) / cfg.turn_step + _COUNTDOWN_EPS)
            step = math.copysign(cfg.turn_step, pending)
            for _ in range(turns):
                commands.append(MotionCommand.snap(step))
            state.yaw_accumulator = pending - step * turns
    else:
        state.anchor_right = None
        state.yaw_accumulator = 0.0

    return commands, state
