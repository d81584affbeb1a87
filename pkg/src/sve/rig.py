"""Tracked user state: poses and the camera rig.

The rig origin is the ground-truth world pose of the user; head and hand
poses are stored rig-local. Heights are meters, yaw is normalized to
(-pi, pi] on construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import Vec3, wrap_angle


@dataclass(frozen=True)
class Pose:
    position: Vec3 = (0.0, 0.0, 0.0)
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))

    def moved_to(self, position: Vec3) -> "Pose":
        return Pose(position, self.yaw, self.pitch, self.roll)

    def turned_to(self, yaw: float) -> "Pose":
        return Pose(self.position, yaw, self.pitch, self.roll)


def pose_to_dict(pose: Pose) -> dict:
    return {
        "position": list(pose.position),
        "yaw": pose.yaw,
        "pitch": pose.pitch,
        "roll": pose.roll,
    }


def pose_from_dict(data: dict) -> Pose:
    pos = data.get("position", [0.0, 0.0, 0.0])
    return Pose(
        (float(pos[0]), float(pos[1]), float(pos[2])),
        float(data.get("yaw", 0.0)),
        float(data.get("pitch", 0.0)),
        float(data.get("roll", 0.0)),
    )


def _default_head() -> Pose:
    return Pose((0.0, 1.65, 0.0))


def _default_left_hand() -> Pose:
    return Pose((-0.25, 1.0, 0.3))


def _default_right_hand() -> Pose:
    return Pose((0.25, 1.0, 0.3))


@dataclass
class UserRig:
    """Rig origin in world space plus rig-local head and hand poses."""

    rig_origin: Pose = field(default_factory=Pose)
    head: Pose = field(default_factory=_default_head)
    left_hand: Pose = field(default_factory=_default_left_hand)
    right_hand: Pose = field(default_factory=_default_right_hand)
    user_height: float = 1.75

    def validate(self) -> None:
        head_y = self.head.position[1]
        if not (0.0 < head_y <= self.user_height + 0.3):
            raise ValueError(
                f"head height {head_y} outside (0, {self.user_height + 0.3}]"
            )

    @classmethod
    def standing(cls, position: Vec3 = (0.0, 0.0, 0.0), yaw: float = 0.0) -> "UserRig":
        return cls(rig_origin=Pose(position, yaw))

    @property
    def position(self) -> Vec3:
        return self.rig_origin.position

    @property
    def yaw(self) -> float:
        return self.rig_origin.yaw


def rig_to_dict(rig: UserRig) -> dict:
    return {
        "origin": pose_to_dict(rig.rig_origin),
        "head": pose_to_dict(rig.head),
        "left_hand": pose_to_dict(rig.left_hand),
        "right_hand": pose_to_dict(rig.right_hand),
        "user_height": rig.user_height,
    }


def rig_from_dict(data: dict) -> UserRig:
    return UserRig(
        rig_origin=pose_from_dict(data.get("origin", {})),
        head=pose_from_dict(data.get("head", {"position": [0.0, 1.65, 0.0]})),
        left_hand=pose_from_dict(data.get("left_hand", {"position": [-0.25, 1.0, 0.3]})),
        right_hand=pose_from_dict(data.get("right_hand", {"position": [0.25, 1.0, 0.3]})),
        user_height=float(data.get("user_height", 1.75)),
    )
