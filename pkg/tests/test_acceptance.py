"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`.
"""

from __future__ import annotations

import functools
import math
import random
import time

from sve.agent import AgentConfig, Zone, zone_of
from sve.geometry import dist_xz, len_xz
from sve.locomotion import (
    InputSample,
    LocomotionConfig,
    MapperState,
    map_smooth_pushpull,
    snap_turn,
    velocity_multiplier,
)
from sve.meshes import corridor_mesh, handcrafted_test_set
from sve.metrics import TechniqueBundle, replay_snapshots, run_scenario, schedule_from_scenario
from sve.navmesh import find_path, project_to_mesh
from sve.protocol import decode_message, encode_message
from sve.rig import Pose, UserRig
from sve.scenarios import constant_tilt_trace, custom_scenario, generate_figure_eight
from sve.session import SessionConfig
from sve.transitions import (
    TransitionConfig,
    TransitionKind,
    start_transition,
    tick_transition,
)

from .oracles import grid_dijkstra_length
from .test_protocol import random_message

DT = 1.0 / 60.0
TICK = 2.5 * DT  # one tick of joystick travel at the speed cap


def criterion(name):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {name}")
                raise
            print(f"[PASS] {name}")
        return run
    return wrap


def _joystick_reports():
    scenario = custom_scenario(corridor_mesh(30.0), constant_tilt_trace(10.0))
    smooth = run_scenario(scenario, TechniqueBundle(locomotion_mode="smooth_joystick"))
    stuttered = run_scenario(
        scenario, TechniqueBundle(locomotion_mode="stuttered_joystick"))
    return smooth, stuttered


@criterion("distance equivalence: smooth 25.0 m, stuttered within 0.5 m, 50 steps, < 1 s")
def test_distance_equivalence():
    started = time.perf_counter()
    smooth, stuttered = _joystick_reports()
    elapsed = time.perf_counter() - started
    assert abs(smooth.net_displacement - 25.0) <= TICK + 1e-9
    assert abs(stuttered.net_displacement - smooth.net_displacement) <= 0.5
    assert stuttered.teleport_count == 50
    assert elapsed < 1.0, f"runtime {elapsed:.2f}s"


@criterion("optical-flow proxy: 25.0 m smooth vs 0.0 m stuttered")
def test_optical_flow_separation():
    smooth, stuttered = _joystick_reports()
    assert abs(smooth.optical_flow_translation - 25.0) <= TICK + 1e-9
    assert stuttered.optical_flow_translation == 0.0


@criterion("study parameters: 2.5 m/s, 0.5 m step, 30 deg snap, multiplier [1, 4]")
def test_study_parameter_fidelity():
    cfg = LocomotionConfig()
    assert cfg.max_joystick_speed == 2.5
    assert cfg.step_length == 0.5
    assert cfg.turn_step == math.pi / 6

    state = MapperState()
    total = 0.0
    for _ in range(6):
        cmds, state = snap_turn(1.0, state, cfg)
        total += sum(c.delta_yaw for c in cmds)
        cmds, state = snap_turn(0.0, state, cfg)
    assert abs(total - math.pi) < 1e-9  # 6 snaps = 180 degrees

    for i in range(11):
        h = cfg.hip_height + i * (cfg.chest_height - cfg.hip_height) / 10.0
        expected = 1.0 + (cfg.max_pushpull_multiplier - 1.0) * (
            cfg.chest_height - h) / (cfg.chest_height - cfg.hip_height)
        got = velocity_multiplier(h, cfg)
        assert abs(got - expected) < 1e-9
        assert 1.0 - 1e-9 <= got <= 4.0 + 1e-9
    assert velocity_multiplier(cfg.chest_height, cfg) == 1.0
    assert velocity_multiplier(cfg.hip_height, cfg) == 4.0


@criterion("zone thresholds: 2.0 m and 0.5 m boundaries")
def test_zone_thresholds():
    cfg = AgentConfig()
    assert zone_of(2.0, cfg) is Zone.STRAFE
    assert zone_of(2.0 + 1e-12, cfg) is Zone.FOLLOW
    assert zone_of(0.5, cfg) is Zone.IMITATE
    assert zone_of(0.5 + 1e-12, cfg) is Zone.STRAFE
    assert zone_of(1.99, cfg) is Zone.STRAFE
    assert zone_of(0.49, cfg) is Zone.IMITATE


def _drive_transition(kind, track_trail=False):
    mesh = corridor_mesh(24.0)
    avatar = Pose((0.0, 0.0, 1.0))
    rig = UserRig.standing((0.0, 0.0, 21.0))
    cfg = TransitionConfig(kind=kind)
    state = start_transition(cfg.kind, avatar, rig, mesh, cfg)
    ticks = 0
    trail_arrival = None
    while not state.complete and ticks < 5000:
        tick_transition(state, rig, mesh, cfg, 3.5, 0.05, DT)
        ticks += 1
        assert abs(state.dissolve_in_alpha + state.dissolve_out_alpha - 1.0) < 1e-9 \
            or kind is not TransitionKind.DISSOLVE
        if track_trail and trail_arrival is None and dist_xz(
                state.trail_pose.position, state.target) <= 0.05:
            trail_arrival = ticks
    assert state.complete
    return ticks, trail_arrival


@criterion("transition timing: walking, afterimage, foresight, dissolve")
def test_transition_timing():
    walk_ticks, _ = _drive_transition(TransitionKind.WALKING)
    assert abs(walk_ticks * DT - 20.0 / 3.5) <= 2 * DT + 1e-9

    after_ticks, _ = _drive_transition(TransitionKind.AFTERIMAGE)
    assert abs(after_ticks * DT - 20.0 / 35.0) <= 2 * DT + 1e-9

    fore_ticks, trail_arrival = _drive_transition(
        TransitionKind.FORESIGHT, track_trail=True)
    assert abs(fore_ticks - walk_ticks) <= 2
    assert trail_arrival is not None
    assert abs(trail_arrival - after_ticks) <= 2

    mesh = corridor_mesh(24.0)
    rig = UserRig.standing((0.0, 0.0, 21.0))
    cfg = TransitionConfig(kind=TransitionKind.DISSOLVE)
    state = start_transition(cfg.kind, Pose((0.0, 0.0, 1.0)), rig, mesh, cfg)
    ticks = 0
    while not state.complete:
        tick_transition(state, rig, mesh, cfg, 3.5, 0.05, DT)
        ticks += 1
        assert abs(state.dissolve_in_alpha + state.dissolve_out_alpha - 1.0) < 1e-9
    assert abs(ticks * DT - cfg.dissolve_duration) <= DT + 1e-9


@criterion("pathfinding: funnel within 2% of grid Dijkstra on 5 meshes, < 10 s")
def test_pathfinding_oracle():
    endpoints = {
        "convex": ((0.5, 0.0, 0.5), (9.5, 0.0, 5.5)),
        "l": ((0.5, 0.0, 1.0), (9.0, 0.0, 9.5)),
        "u": ((1.0, 0.0, 9.5), (9.0, 0.0, 9.5)),
        "h": ((1.0, 0.0, 0.5), (9.0, 0.0, 9.5)),
        "ring": ((1.0, 0.0, 1.0), (11.0, 0.0, 11.0)),
    }
    started = time.perf_counter()
    for name, mesh in handcrafted_test_set().items():
        start, goal = endpoints[name]
        path = find_path(mesh, start, goal)
        oracle = grid_dijkstra_length(mesh.vertices, mesh.triangles, start, goal)
        assert path.total_length <= 1.02 * oracle, name
        assert path.total_length >= math.dist(start, goal) - 1e-9, name
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"oracle runtime {elapsed:.2f}s"


@criterion("pushpull anchor invariance: < 1e-6 m drift per tick over 1000 ticks")
def test_pushpull_anchor_invariance():
    cfg = LocomotionConfig()
    rng = random.Random(42)
    rig = UserRig.standing((1.0, 0.0, -2.0))
    state = MapperState()
    hand = (-0.2, cfg.chest_height + 0.1, 0.3)  # multiplier 1 territory

    def tick(hand_pos):
        sample = InputSample(left_hand=Pose(hand_pos), left_grab=True)
        cmds, _ = map_smooth_pushpull(sample, state, cfg, rig)
        delta = cmds[0].delta_position
        rig.rig_origin = Pose((rig.position[0] + delta[0], 0.0,
                               rig.position[2] + delta[2]))

    tick(hand)
    world0 = (rig.position[0] + hand[0], rig.position[2] + hand[2])
    for _ in range(1000):
        hand = (hand[0] + rng.uniform(-0.02, 0.02),
                cfg.chest_height + rng.uniform(0.0, 0.4),
                hand[2] + rng.uniform(-0.02, 0.02))
        tick(hand)
        world = (rig.position[0] + hand[0], rig.position[2] + hand[2])
        drift = math.hypot(world[0] - world0[0], world[1] - world0[1])
        assert drift < 1e-6


@criterion("determinism and protocol: byte-identical replays, roundtrip corpus")
def test_determinism_and_protocol():
    scenario = generate_figure_eight()
    bundle = TechniqueBundle(transition_kind="foresight")
    frames, ticks = schedule_from_scenario(scenario, bundle, 60.0)
    config = SessionConfig(mesh=scenario.mesh, default_locomotion_mode="none",
                           transition=TransitionConfig(kind=TransitionKind.FORESIGHT))
    first = replay_snapshots(config, frames, ticks)
    second = replay_snapshots(config, frames, ticks)
    assert first == second
    assert len(first) == ticks

    rng = random.Random(1789)
    from sve.protocol import MESSAGE_TYPES

    for msg_type in MESSAGE_TYPES:
        for _ in range(1000):
            msg = random_message(rng, msg_type)
            assert decode_message(encode_message(msg)) == msg


@criterion("figure eight: 11 targets in 50 x 10 m, realignment and discrepancy")
def test_figure_eight_reproduction():
    scenario = generate_figure_eight()
    assert len(scenario.targets) == 11
    xs = [t[0] for t in scenario.targets]
    zs = [t[2] for t in scenario.targets]
    assert abs((max(xs) - min(xs)) - 50.0) <= 0.1
    assert abs((max(zs) - min(zs)) - 10.0) <= 0.1

    report = run_scenario(scenario, TechniqueBundle(transition_kind="walking"))
    agent = AgentConfig()
    chords = []
    prev = scenario.start_position
    for _, target in scenario.teleport_schedule:
        chords.append(dist_xz(prev, target))
        prev = target
    expected_complete = [c / agent.base_max_speed <= 4.0 for c in chords]
    assert all(expected_complete)  # all segments walkable inside the window
    assert report.incomplete_realignments == 0
    assert len(report.realignment_times) == 11
    for measured, chord in zip(report.realignment_times, chords):
        assert abs(measured - chord / agent.base_max_speed) <= 2 * DT + 1e-9
    # The largest separation an observer ever sees is the longest hop,
    # up to the arrival radius and two ticks of walking.
    slack = 2 * DT * agent.base_max_speed + agent.arrival_radius
    assert abs(report.discrepancy_max - max(chords)) <= slack
