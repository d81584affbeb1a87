"""Deterministic scenario generation and trace files.

Scenarios bundle a mesh with scripted motion for the observed user: either
a timed teleport schedule (the observation course) or a stream of input
samples (locomotion runs). Two JSON-lines file formats live here as well:
input traces (one InputSample per line, times strictly increasing) and
session traces (one applied frame per line with tick, user, seq, payload,
plus join lines), which the replay machinery feeds back into a session.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .geometry import Vec3
from .locomotion import InputSample, sample_from_dict, sample_to_dict
from .meshes import rect_mesh
from .navmesh import NavMesh


class CorruptTrace(Exception):
    """Raised with the offending line number on unreadable trace files."""


@dataclass
class Scenario:
    name: str
    mesh: NavMesh
    duration: float
    start_position: Vec3 = (0.0, 0.0, 0.0)
    start_yaw: float = 0.0
    teleport_schedule: list[tuple[float, Vec3]] = field(default_factory=list)
    input_trace: list[InputSample] = field(default_factory=list)
    observer_position: Vec3 | None = None
    targets: list[Vec3] = field(default_factory=list)


def _lemniscate_point(t: float) -> tuple[float, float]:
    s = math.sin(t)
    c = math.cos(t)
    denom = 1.0 + s * s
    return c / denom, s * c / denom


def generate_figure_eight() -> Scenario:
    """Observation course: 11 teleport targets along a figure eight whose
    bounding box is 50 x 10 m, visited every 4 seconds starting at t = 0,
    with the observer 10 m from the figure center facing it orthogonally.
    """
    # Sample the curve densely, then pick 11 points at equal arc length.
    dense = 20000
    pts = [_lemniscate_point(2.0 * math.pi * k / dense) for k in range(dense + 1)]
    arc = [0.0]
    for a, b in zip(pts, pts[1:]):
        arc.append(arc[-1] + math.hypot(b[0] - a[0], b[1] - a[1]))
    total = arc[-1]
    raw: list[tuple[float, float]] = []
    idx = 0
    for k in range(11):
        want = total * k / 11.0
        while arc[idx] < want:
            idx += 1
        raw.append(pts[idx])
    xs = [p[0] for p in raw]
    zs = [p[1] for p in raw]

    def scale(v, lo, hi, out_lo, out_hi):
        return out_lo + (v - lo) * (out_hi - out_lo) / (hi - lo)

    targets = [
        (scale(x, min(xs), max(xs), -25.0, 25.0), 0.0,
         scale(z, min(zs), max(zs), -5.0, 5.0))
        for x, z in raw
    ]
    schedule = [(4.0 * k, targets[k]) for k in range(11)]
    return Scenario(
        name="figure_eight",
        mesh=rect_mesh(-27.0, -12.0, 27.0, 12.0),
        duration=44.0,
        start_position=targets[-1],
        teleport_schedule=schedule,
        observer_position=(0.0, 0.0, -10.0),
        targets=targets,
    )


def generate_fruit_course() -> Scenario:
    """Locomotion course: three target areas 5 m from the start at bearings
    0, 90 left, and behind, followed by a return leg to the start."""
    start = (0.0, 0.0, 0.0)
    targets: list[Vec3] = [
        (0.0, 0.0, 5.0),   # straight ahead
        (-5.0, 0.0, 0.0),  # 90 degrees left
        (0.0, 0.0, -5.0),  # behind
    ]
    schedule = [(0.0, targets[0]), (4.0, targets[1]), (8.0, targets[2]),
                (12.0, start)]
    return Scenario(
        name="fruit_course",
        mesh=rect_mesh(-7.0, -7.0, 7.0, 7.0),
        duration=16.0,
        start_position=start,
        teleport_schedule=schedule,
        targets=targets,
    )


def constant_tilt_trace(
    duration: float, tilt: tuple[float, float] = (0.0, 1.0), dt: float = 1.0 / 60.0
) -> list[InputSample]:
    """Held-stick input trace, one sample per tick for duration seconds."""
    ticks = round(duration / dt)
    return [InputSample(t=k * dt, left_stick=tilt) for k in range(ticks)]


def custom_scenario(mesh: NavMesh, samples: list[InputSample],
                    duration: float | None = None,
                    start_position: Vec3 = (0.0, 0.0, 1.0)) -> Scenario:
    if duration is None:
        duration = samples[-1].t + 1.0 / 60.0 if samples else 0.0
    return Scenario(
        name="custom",
        mesh=mesh,
        duration=duration,
        start_position=start_position,
        input_trace=samples,
    )


def scenario_by_name(name: str) -> Scenario:
    if name == "figure_eight":
        return generate_figure_eight()
    if name == "fruit_course":
        return generate_fruit_course()
    raise ValueError(f"unknown scenario {name!r}; custom runs need --trace")


# Input trace files: JSON lines, one InputSample per line.

def save_input_trace(samples: list[InputSample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_dict(sample), sort_keys=True))
            fh.write("\n")


def load_input_trace(path: str) -> list[InputSample]:
    samples: list[InputSample] = []
    last_t = None
    with open(path, "r", encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                sample = sample_from_dict(data)
            except (ValueError, TypeError, KeyError, IndexError) as exc:
                raise CorruptTrace(f"line {n}: {exc}") from exc
            if last_t is not None and sample.t <= last_t:
                raise CorruptTrace(
                    f"line {n}: timestamp {sample.t} not increasing after {last_t}")
            last_t = sample.t
            samples.append(sample)
    return samples


# Session trace files: the applied frame schedule of a run.

@dataclass(frozen=True)
class TraceFrame:
    tick: int
    user_id: int
    seq: int = 0
    payload: dict = field(default_factory=dict)
    join: dict | None = None
    leave: bool = False


def trace_record(frame: TraceFrame) -> dict:
    record: dict = {"tick": frame.tick, "user_id": frame.user_id}
    if frame.join is not None:
        record["join"] = frame.join
    elif frame.leave:
        record["leave"] = True
    else:
        record["seq"] = frame.seq
        record["payload"] = frame.payload
    return record


def save_trace(frames: list[TraceFrame], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(trace_record(frame), sort_keys=True))
            fh.write("\n")


def load_trace(path: str) -> list[TraceFrame]:
    frames: list[TraceFrame] = []
    last_tick = 0
    last_seq: dict[int, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                tick = int(data["tick"])
                user_id = int(data["user_id"])
            except (ValueError, TypeError, KeyError) as exc:
                raise CorruptTrace(f"line {n}: {exc}") from exc
            if tick < last_tick:
                raise CorruptTrace(
                    f"line {n}: tick {tick} out of order after {last_tick}")
            last_tick = tick
            if "join" in data:
                join = data["join"]
                if not isinstance(join, dict):
                    raise CorruptTrace(f"line {n}: join must be an object")
                frames.append(TraceFrame(tick=tick, user_id=user_id, join=join))
                continue
            if data.get("leave"):
                frames.append(TraceFrame(tick=tick, user_id=user_id, leave=True))
                continue
            try:
                seq = int(data["seq"])
                payload = data["payload"]
            except (ValueError, TypeError, KeyError) as exc:
                raise CorruptTrace(f"line {n}: {exc}") from exc
            if not isinstance(payload, dict):
                raise CorruptTrace(f"line {n}: payload must be an object")
            if seq <= last_seq.get(user_id, 0):
                raise CorruptTrace(
                    f"line {n}: seq {seq} not increasing for user {user_id}")
            last_seq[user_id] = seq
            frames.append(TraceFrame(tick=tick, user_id=user_id, seq=seq,
                                     payload=payload))
    return frames
