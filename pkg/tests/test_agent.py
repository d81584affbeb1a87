"""Agent state machine tests: zones, following, strafing, imitation."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sve.agent import (
    AgentConfig,
    AgentState,
    OffMeshTarget,
    Zone,
    imitation_weight,
    tick_agent,
    zone_of,
)
from sve.geometry import dist_xz, len_xz
from sve.meshes import corridor_mesh, rect_mesh
from sve.rig import Pose, UserRig
from sve.transitions import TransitionConfig, TransitionKind

DT = 1.0 / 60.0
CFG = AgentConfig()


class TestZoneOf:
    def test_outside_strafing_zone_is_follow(self):
        assert zone_of(3.0, CFG) is Zone.FOLLOW

    def test_paper_radii(self):
        assert zone_of(1.5, CFG) is Zone.STRAFE
        assert zone_of(0.3, CFG) is Zone.IMITATE

    def test_beyond_threshold_is_long_distance(self):
        assert zone_of(7.0, CFG) is Zone.LONG_DISTANCE

    def test_boundaries_belong_to_inner_zone(self):
        assert zone_of(2.0, CFG) is Zone.STRAFE
        assert zone_of(0.5, CFG) is Zone.IMITATE
        assert zone_of(6.0, CFG) is Zone.FOLLOW

    @given(d=st.floats(0.0, 20.0, allow_nan=False))
    def test_pure_step_function_of_distance(self, d):
        zone = zone_of(d, CFG)
        if d > 6.0:
            assert zone is Zone.LONG_DISTANCE
        elif d <= 0.5:
            assert zone is Zone.IMITATE
        elif d <= 2.0:
            assert zone is Zone.STRAFE
        else:
            assert zone is Zone.FOLLOW


class TestImitationWeight:
    def test_full_overlap(self):
        assert imitation_weight(0.0, CFG) == 1.0

    def test_zone_edge(self):
        assert imitation_weight(0.5, CFG) == 0.0

    def test_linear_midpoint(self):
        assert imitation_weight(0.25, CFG) == pytest.approx(0.5)

    @given(d=st.floats(0.0, 3.0, allow_nan=False))
    def test_monotone_non_increasing(self, d):
        assert imitation_weight(d + 0.01, CFG) <= imitation_weight(d, CFG)
        assert 0.0 <= imitation_weight(d, CFG) <= 1.0


def _tick_n(state, rig, mesh, n, tcfg=None):
    outputs = []
    for _ in range(n):
        state, out = tick_agent(state, rig, mesh, CFG, DT, tcfg)
        outputs.append(out)
    return state, outputs


class TestTickAgent:
    def test_stationary_rig_ten_meters_closes_seven_in_two_seconds(self):
        mesh = corridor_mesh(16.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.0, 0.0, 11.0))
        state, _ = _tick_n(state, rig, mesh, 120)
        advanced = state.avatar_pose.position[2] - 1.0
        assert abs(advanced - 7.0) <= CFG.base_max_speed * DT + 1e-9

    def test_fixed_point_when_rig_on_avatar(self):
        mesh = corridor_mesh(10.0)
        state = AgentState.at(Pose((0.0, 0.0, 2.0)))
        rig = UserRig.standing((0.0, 0.0, 2.0))
        state, outs = _tick_n(state, rig, mesh, 5)
        assert outs[-1].desired_lateral_velocity == (0.0, 0.0)
        assert outs[-1].desired_angular_velocity == 0.0
        assert outs[-1].imitation_weight == 1.0
        assert state.zone is Zone.IMITATE

    def test_teleport_enters_long_distance_with_transition(self):
        mesh = corridor_mesh(30.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.0, 0.0, 1.0))
        state, _ = _tick_n(state, rig, mesh, 3)
        rig.rig_origin = Pose((0.0, 0.0, 21.0))  # 20 m jump in one tick
        state, _ = _tick_n(state, rig, mesh, 1)
        assert state.zone is Zone.LONG_DISTANCE
        assert state.active_transition is not None

    def test_transition_handle_owns_pose_until_complete(self):
        mesh = corridor_mesh(30.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.0, 0.0, 21.0))
        tcfg = TransitionConfig(kind=TransitionKind.AFTERIMAGE)
        state, _ = _tick_n(state, rig, mesh, 1, tcfg)
        assert state.active_transition is not None
        ticks = 0
        while state.active_transition is not None and ticks < 500:
            state, _ = _tick_n(state, rig, mesh, 1, tcfg)
            ticks += 1
        assert state.active_transition is None
        assert dist_xz(state.avatar_pose.position, rig.position) <= CFG.arrival_radius
        assert state.zone is not Zone.LONG_DISTANCE

    def test_gimbal_lock_converges_to_rig_yaw(self):
        mesh = rect_mesh(-5.0, -5.0, 5.0, 5.0)
        state = AgentState.at(Pose((0.0, 0.0, 0.0), yaw=-2.0))
        rig = UserRig.standing((0.0, 0.0, 1.0), yaw=1.0)
        state, _ = _tick_n(state, rig, mesh, 60)  # 1 s >= yaw_blend_duration
        assert abs(state.avatar_pose.yaw - 1.0) < 1e-3

    def test_speed_cap_every_tick(self):
        mesh = corridor_mesh(30.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.0, 0.0, 1.0))
        prev = state.avatar_pose.position
        for step in range(600):
            if step == 60:
                rig.rig_origin = Pose((0.0, 0.0, 22.0))
            if step == 400:
                rig.rig_origin = Pose((0.3, 0.0, 22.2))
            state, _ = tick_agent(state, rig, mesh, CFG, DT)
            moved = dist_xz(state.avatar_pose.position, prev)
            assert moved / DT <= CFG.base_max_speed + 1e-9
            prev = state.avatar_pose.position

    def test_velocity_output_matches_actual_displacement(self):
        mesh = corridor_mesh(16.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.0, 0.0, 6.0))
        prev = state.avatar_pose.position
        for _ in range(120):
            state, out = tick_agent(state, rig, mesh, CFG, DT)
            actual = ((state.avatar_pose.position[0] - prev[0]) / DT,
                      (state.avatar_pose.position[2] - prev[2]) / DT)
            assert out.desired_lateral_velocity == pytest.approx(actual)
            assert len_xz((actual[0], 0.0, actual[1])) \
                <= CFG.base_max_speed + 1e-9
            prev = state.avatar_pose.position

    def test_strafe_weight_rises_inside_zone_and_decays_outside(self):
        mesh = corridor_mesh(16.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.0, 0.0, 2.0))  # 1 m away: strafe zone
        state, outs = _tick_n(state, rig, mesh, 30)
        assert outs[-1].strafe_weight == pytest.approx(1.0)
        assert state.zone in (Zone.STRAFE, Zone.IMITATE)
        rig.rig_origin = Pose((0.0, 0.0, 6.5))  # back to follow range
        state, outs = _tick_n(state, rig, mesh, 1)
        assert state.zone is Zone.FOLLOW
        first = outs[-1].strafe_weight
        assert 0.0 < first < 1.0
        state, outs = _tick_n(state, rig, mesh, 40)
        assert outs[-1].strafe_weight == 0.0

    def test_avatar_stays_on_mesh(self):
        from sve.navmesh import locate

        mesh = corridor_mesh(30.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.9, 0.0, 1.0))
        for step in range(400):
            if step % 90 == 0:
                z = 1.0 + (step // 90) * 7.0
                rig.rig_origin = Pose((0.4 if step % 180 else -0.4, 0.0, z))
            state, _ = tick_agent(state, rig, mesh, CFG, DT)
            assert locate(mesh, state.avatar_pose.position) is not None

    def test_rig_off_mesh_raises(self):
        mesh = corridor_mesh(10.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((50.0, 0.0, 50.0))
        with pytest.raises(OffMeshTarget):
            tick_agent(state, rig, mesh, CFG, DT)

    def test_deterministic_state_stream(self):
        def run():
            mesh = corridor_mesh(30.0)
            state = AgentState.at(Pose((0.0, 0.0, 1.0)))
            rig = UserRig.standing((0.0, 0.0, 1.0))
            poses = []
            for step in range(300):
                if step == 50:
                    rig.rig_origin = Pose((0.2, 0.0, 15.0), yaw=0.7)
                if step == 200:
                    rig.rig_origin = Pose((-0.2, 0.0, 3.0), yaw=-0.3)
                state, _ = tick_agent(state, rig, mesh, CFG, DT)
                poses.append(state.avatar_pose)
            return poses

        assert run() == run()

    def test_dissolve_entry_reports_zero_velocity(self):
        mesh = corridor_mesh(30.0)
        state = AgentState.at(Pose((0.0, 0.0, 1.0)))
        rig = UserRig.standing((0.0, 0.0, 21.0))
        tcfg = TransitionConfig(kind=TransitionKind.DISSOLVE)
        state, out = tick_agent(state, rig, mesh, CFG, DT, tcfg)
        # Primary jumped with the user: sanctioned discontinuity, zero output.
        assert state.avatar_pose.position == (0.0, 0.0, 21.0)
        assert out.desired_lateral_velocity == (0.0, 0.0)
