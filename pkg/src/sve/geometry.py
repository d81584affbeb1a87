"""Small vector and angle helpers shared across the engine.

Coordinates are Y-up and left-handed; the ground plane is XZ. Yaw is the
rotation about Y, positive clockwise when viewed from above, with yaw 0
facing +Z. All functions are pure and operate on plain float tuples so
results are bit-reproducible.
"""

from __future__ import annotations

import math

Vec2 = tuple[float, float]
Vec3 = tuple[float, float, float]

TWO_PI = 2.0 * math.pi


def vadd(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vscale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vlen(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def dist3(a: Vec3, b: Vec3) -> float:
    return vlen(vsub(a, b))


def len_xz(a: Vec3 | Vec2) -> float:
    x, z = a[0], a[-1]
    return math.hypot(x, z)


def dist_xz(a: Vec3, b: Vec3) -> float:
    return math.hypot(a[0] - b[0], a[2] - b[2])


def project_xz(a: Vec3) -> Vec3:
    """Drop the Y component (constrain to the ground plane)."""
    return (a[0], 0.0, a[2])


def norm_xz(a: Vec3) -> Vec3:
    """Unit vector in the XZ plane; zero vector stays zero."""
    n = math.hypot(a[0], a[2])
    if n == 0.0:
        return (0.0, 0.0, 0.0)
    return (a[0] / n, 0.0, a[2] / n)


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    r = math.fmod(a + math.pi, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    return r - math.pi


def bearing_xz(v: Vec3 | Vec2) -> float:
    """Yaw of a direction vector: 0 along +Z, increasing toward +X."""
    return math.atan2(v[0], v[-1])


def yaw_direction(yaw: float) -> Vec3:
    """Unit XZ direction for a yaw angle."""
    return (math.sin(yaw), 0.0, math.cos(yaw))


def rotate_xz(v: Vec2, yaw: float) -> Vec2:
    """Rotate a 2D (x, forward) vector by yaw into world XZ."""
    s, c = math.sin(yaw), math.cos(yaw)
    x, z = v
    return (x * c + z * s, -x * s + z * c)


def turn_towards(yaw: float, target: float, max_step: float) -> float:
    """Advance yaw toward target by at most max_step radians, shortest way."""
    d = wrap_angle(target - yaw)
    if abs(d) <= max_step:
        return wrap_angle(target)
    return wrap_angle(yaw + math.copysign(max_step, d))


def slerp_yaw(a: float, b: float, t: float) -> float:
    """Interpolate between two yaws along the shortest arc."""
    return wrap_angle(a + wrap_angle(b - a) * t)


def cross2(u: Vec2, v: Vec2) -> float:
    """2D cross product on (x, z) pairs; positive when v is left of u."""
    return u[0] * v[1] - u[1] * v[0]
