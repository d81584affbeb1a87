"""Engine configuration file: one JSON document with sections that mirror
the agent, locomotion, transition, and session config objects. Unknown keys
are rejected so typos fail loudly; command line flags override file values.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .agent import AgentConfig
from .locomotion import LocomotionConfig
from .transitions import TransitionConfig


@dataclass
class SessionSettings:
    tick_rate: float = 60.0
    max_users: int = 16
    default_locomotion_mode: str = "smooth_joystick"
    avatar_mode: str = "smart"
    mesh: str | None = None  # mesh file path


@dataclass
class EngineConfig:
    agent: AgentConfig
    locomotion: LocomotionConfig
    transition: TransitionConfig
    session: SessionSettings


def _build(cls, data: dict, section: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown keys in config section {section!r}: "
                         f"{sorted(unknown)}")
    return cls(**data)


def engine_config_from_dict(data: dict) -> EngineConfig:
    if not isinstance(data, dict):
        raise ValueError("config file must contain a JSON object")
    known = {"agent", "locomotion", "transition", "session"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    return EngineConfig(
        agent=_build(AgentConfig, data.get("agent", {}), "agent"),
        locomotion=_build(LocomotionConfig, data.get("locomotion", {}), "locomotion"),
        transition=_build(TransitionConfig, data.get("transition", {}), "transition"),
        session=_build(SessionSettings, data.get("session", {}), "session"),
    )


def load_engine_config(path: str) -> EngineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return engine_config_from_dict(data)


def default_engine_config() -> EngineConfig:
    return EngineConfig(
        agent=AgentConfig(),
        locomotion=LocomotionConfig(),
        transition=TransitionConfig(),
        session=SessionSettings(),
    )
