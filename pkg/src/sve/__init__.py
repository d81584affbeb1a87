"""Deterministic shared-virtual-environment locomotion engine.

Smart avatar agents render noncontinuous teleports as continuous
transitions for observers; stuttered locomotion converts continuous
controller input into discrete teleport steps for the moving user. The
package bundles the navmesh, agent, transition, and locomotion layers with
an authoritative session server, a wire protocol, and a scenario/metrics
replay harness.
"""

from .agent import AgentConfig, AgentOutput, AgentState, Zone, zone_of
from .locomotion import InputSample, LocomotionConfig, MapperState, MotionCommand
from .meshes import handcrafted_test_set
from .navmesh import NavMesh, Path, build_navmesh, find_path, load_mesh
from .rig import Pose, UserRig
from .session import Session, SessionConfig
from .transitions import TransitionConfig, TransitionKind, TransitionState

__version__ = "0.1.0"

__all__ = [
    "AgentConfig",
    "AgentOutput",
    "AgentState",
    "InputSample",
    "LocomotionConfig",
    "MapperState",
    "MotionCommand",
    "NavMesh",
    "Path",
    "Pose",
    "Session",
    "SessionConfig",
    "TransitionConfig",
    "TransitionKind",
    "TransitionState",
    "UserRig",
    "Zone",
    "build_navmesh",
    "find_path",
    "handcrafted_test_set",
    "load_mesh",
    "zone_of",
    "__version__",
]
