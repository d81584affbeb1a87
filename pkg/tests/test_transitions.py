"""Transition timeline tests: timing, ghosts, alphas, and retargeting."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sve.geometry import dist_xz
from sve.meshes import corridor_mesh
from sve.rig import Pose, UserRig
from sve.transitions import (
    Ghost,
    TransitionConfig,
    TransitionKind,
    TransitionState,
    start_transition,
    tick_transition,
)

DT = 1.0 / 60.0
BASE_SPEED = 3.5
ARRIVAL = 0.05


def _setup(kind, gap=20.0, **cfg_kwargs):
    mesh = corridor_mesh(gap + 4.0)
    avatar = Pose((0.0, 0.0, 1.0))
    rig = UserRig.standing((0.0, 0.0, 1.0 + gap))
    cfg = TransitionConfig(kind=kind, **cfg_kwargs)
    state = start_transition(cfg.kind, avatar, rig, mesh, cfg)
    return mesh, rig, cfg, state


def _run(mesh, rig, cfg, state, max_ticks=5000, on_tick=None):
    ticks = 0
    while not state.complete and ticks < max_ticks:
        tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        ticks += 1
        if on_tick is not None:
            on_tick(state, ticks)
    assert state.complete, "transition never completed"
    return ticks


class TestWalking:
    def test_initial_state_has_full_path_and_no_ghosts(self):
        _, _, _, state = _setup(TransitionKind.WALKING)
        assert state.path.total_length == pytest.approx(20.0)
        assert state.ghosts == []

    def test_completes_at_base_speed(self):
        mesh, rig, cfg, state = _setup(TransitionKind.WALKING)
        ticks = _run(mesh, rig, cfg, state)
        assert abs(ticks * DT - 20.0 / BASE_SPEED) <= DT + 1e-9
        assert dist_xz(state.primary_pose.position, state.target) <= ARRIVAL

    def test_primary_faces_travel_direction(self):
        mesh, rig, cfg, state = _setup(TransitionKind.WALKING)
        tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        assert state.primary_pose.yaw == pytest.approx(0.0)  # walking +Z


class TestAfterimage:
    def test_completes_tenfold_faster(self):
        mesh, rig, cfg, state = _setup(TransitionKind.AFTERIMAGE)
        ticks = _run(mesh, rig, cfg, state)
        assert abs(ticks * DT - 20.0 / (BASE_SPEED * 10.0)) <= DT + 1e-9

    def test_walking_to_afterimage_timing_ratio(self):
        mesh, rig, cfg, state = _setup(TransitionKind.WALKING)
        walk_ticks = _run(mesh, rig, cfg, state)
        mesh, rig, cfg, state = _setup(TransitionKind.AFTERIMAGE)
        after_ticks = _run(mesh, rig, cfg, state)
        assert after_ticks <= walk_ticks / 10.0 + 2.0

    def test_ghost_count_matches_spacing(self):
        mesh, rig, cfg, state = _setup(TransitionKind.AFTERIMAGE)
        _run(mesh, rig, cfg, state)
        expected = math.floor(20.0 / cfg.ghost_spacing)
        assert abs(len(state.ghosts) - expected) <= 1

    def test_ghosts_fade_linearly_over_ghost_fade(self):
        mesh, rig, cfg, state = _setup(TransitionKind.AFTERIMAGE)
        # 0.583 m per tick: the first 0.75 m spacing mark falls in tick 2.
        tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        assert state.ghosts, "second tick should drop the first ghost"
        g = state.ghosts[0]
        spawn_alpha = g.alpha
        tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        assert g.alpha < spawn_alpha
        assert g.alpha == pytest.approx(
            1.0 - (state.elapsed - g.spawn_time) / cfg.ghost_fade)

    @settings(max_examples=20, deadline=None)
    @given(gap=st.floats(7.0, 40.0))
    def test_ghost_count_property(self, gap):
        mesh, rig, cfg, state = _setup(TransitionKind.AFTERIMAGE, gap=gap)
        _run(mesh, rig, cfg, state)
        assert abs(len(state.ghosts) - math.floor(gap / cfg.ghost_spacing)) <= 1


class TestDissolve:
    def test_initial_stream_and_alphas(self):
        _, _, _, state = _setup(TransitionKind.DISSOLVE)
        assert state.stream == ((0.0, 0.0, 1.0), (0.0, 0.0, 21.0))
        assert state.dissolve_out_alpha == 1.0
        assert state.dissolve_in_alpha == 0.0
        assert state.primary_pose.position == (0.0, 0.0, 21.0)
        assert len(state.ghosts) == 1  # the static copy left behind

    def test_alpha_conservation_every_tick(self):
        mesh, rig, cfg, state = _setup(TransitionKind.DISSOLVE)

        def check(s, _):
            assert abs(s.dissolve_in_alpha + s.dissolve_out_alpha - 1.0) < 1e-9

        _run(mesh, rig, cfg, state, on_tick=check)

    def test_completes_in_dissolve_duration(self):
        mesh, rig, cfg, state = _setup(TransitionKind.DISSOLVE)
        ticks = _run(mesh, rig, cfg, state)
        assert abs(ticks * DT - cfg.dissolve_duration) <= DT + 1e-9
        assert state.dissolve_in_alpha == 1.0
        assert state.dissolve_out_alpha == 0.0

    def test_alphas_are_monotone(self):
        mesh, rig, cfg, state = _setup(TransitionKind.DISSOLVE)
        last_in, last_out = state.dissolve_in_alpha, state.dissolve_out_alpha

        def check(s, _):
            nonlocal last_in, last_out
            assert s.dissolve_in_alpha >= last_in
            assert s.dissolve_out_alpha <= last_out
            last_in, last_out = s.dissolve_in_alpha, s.dissolve_out_alpha

        _run(mesh, rig, cfg, state, on_tick=check)


class TestForesight:
    def test_three_layers_present_at_start(self):
        _, _, _, state = _setup(TransitionKind.FORESIGHT)
        assert state.primary_pose is not None  # solid runner
        assert state.trail_pose is not None  # invisible trail layer
        assert state.user_ghost_pose is not None  # ghost at the user
        assert state.user_ghost_pose.position == (0.0, 0.0, 21.0)

    def test_runner_completion_matches_walking(self):
        mesh, rig, cfg, state = _setup(TransitionKind.WALKING)
        walk_ticks = _run(mesh, rig, cfg, state)
        mesh, rig, cfg, state = _setup(TransitionKind.FORESIGHT)
        fore_ticks = _run(mesh, rig, cfg, state)
        assert abs(fore_ticks - walk_ticks) <= 2

    def test_trail_completes_with_afterimage_timing(self):
        mesh, rig, cfg, state = _setup(TransitionKind.FORESIGHT)
        trail_arrival = None

        def check(s, n):
            nonlocal trail_arrival
            if trail_arrival is None and dist_xz(
                    s.trail_pose.position, s.target) <= ARRIVAL:
                trail_arrival = n

        _run(mesh, rig, cfg, state, on_tick=check)
        assert trail_arrival is not None
        assert abs(trail_arrival * DT - 20.0 / (BASE_SPEED * 10.0)) <= 2 * DT + 1e-9

    def test_trail_always_ahead_of_runner(self):
        mesh, rig, cfg, state = _setup(TransitionKind.FORESIGHT)

        def check(s, _):
            # On a straight corridor arc position is distance from the start.
            runner_arc = s.primary_pose.position[2] - 1.0
            trail_arc = s.trail_pose.position[2] - 1.0
            assert trail_arc >= runner_arc - 1e-9

        _run(mesh, rig, cfg, state, on_tick=check)

    def test_ghost_vanishes_when_runner_passes_through(self):
        mesh, rig, cfg, state = _setup(TransitionKind.FORESIGHT)
        # Run until the trail has dropped its ghosts along the corridor.
        for _ in range(40):
            tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        near_five = [g for g in state.ghosts
                     if abs(g.pose.position[2] - 1.0 - 5.25) < 1e-6]
        assert near_five, "expected a ghost near the 5 m mark"
        target_ghost = near_five[0]
        passed_tick = None
        ticks = 40
        while not state.complete:
            tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
            ticks += 1
            runner_z = state.primary_pose.position[2]
            if passed_tick is None and target_ghost.alpha == 0.0:
                passed_tick = ticks
                # The runner is just within half a spacing of the ghost.
                assert abs(runner_z - target_ghost.pose.position[2]) \
                    <= cfg.ghost_spacing / 2.0 + 1e-9
                later = [g for g in state.ghosts
                         if g.pose.position[2] > runner_z + cfg.ghost_spacing]
                assert later and all(g.alpha > 0.0 for g in later)
        assert passed_tick is not None


class TestRetarget:
    def test_second_teleport_retargets_walking(self):
        mesh, rig, cfg, state = _setup(TransitionKind.WALKING)
        for _ in range(60):
            tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        rig.rig_origin = Pose((0.0, 0.0, 10.0))  # user teleports again
        ticks = 60
        while not state.complete and ticks < 5000:
            tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
            ticks += 1
        assert state.complete
        assert dist_xz(state.primary_pose.position, (0.0, 0.0, 10.0)) <= ARRIVAL

    def test_dissolve_stream_restarts_from_copy(self):
        mesh, rig, cfg, state = _setup(TransitionKind.DISSOLVE)
        tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        rig.rig_origin = Pose((0.0, 0.0, 10.0))
        tick_transition(state, rig, mesh, cfg, BASE_SPEED, ARRIVAL, DT)
        assert state.stream[0] == (0.0, 0.0, 1.0)  # copy position
        assert state.stream[1] == (0.0, 0.0, 10.0)
        assert state.primary_pose.position == (0.0, 0.0, 10.0)


def test_all_layer_poses_stay_on_mesh():
    from sve.navmesh import locate

    mesh, rig, cfg, state = _setup(TransitionKind.FORESIGHT)

    def check(s, _):
        assert locate(mesh, s.primary_pose.position) is not None
        assert locate(mesh, s.trail_pose.position) is not None
        for g in s.ghosts:
            assert locate(mesh, g.pose.position) is not None

    _run(mesh, rig, cfg, state, on_tick=check)
