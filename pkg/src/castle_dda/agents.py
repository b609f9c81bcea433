"""Scalar-skill player agents standing in for human participants."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class SkillProfile:
    label: str
    low: float
    high: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.low <= self.high <= 1.0:
            raise ValueError(
                f"profile {self.label!r}: need 0 <= low <= high <= 1, got [{self.low}, {self.high}]"
            )


WEAK = SkillProfile("Weak", 0.15, 0.35)
AVERAGE = SkillProfile("Average", 0.40, 0.60)
STRONG = SkillProfile("Strong", 0.65, 0.85)

PROFILES = {p.label: p for p in (WEAK, AVERAGE, STRONG)}


def get_profile(name: str, custom: dict[str, SkillProfile] | None = None) -> SkillProfile:
    if custom and name in custom:
        return custom[name]
    for label, profile in PROFILES.items():
        if label.lower() == name.lower():
            return profile
    known = sorted(PROFILES) + sorted(custom or {})
    raise ValueError(f"unknown profile {name!r}; expected one of {', '.join(known)}")


@dataclass(frozen=True)
class PlayerAgent:
    agent_id: str
    skill: float
    profile: str
    learning_rate: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.skill <= 1.0:
            raise ValueError(f"skill must lie in [0, 1], got {self.skill}")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")


def sample_agent(
    profile: SkillProfile,
    rng: np.random.Generator,
    agent_id: str = "agent",
    learning_rate: float = 0.0,
) -> PlayerAgent:
    """Draw an agent whose skill is uniform over the profile's range."""
    if profile.low == profile.high:
        skill = profile.low
    else:
        skill = float(rng.uniform(profile.low, profile.high))
    return PlayerAgent(agent_id, skill, profile.label, learning_rate)


def apply_learning(agent: PlayerAgent, games_played: int) -> PlayerAgent:
    """Skill after ``games_played`` earlier games, capped at 1."""
    if games_played < 0:
        raise ValueError("games_played must be >= 0")
    if agent.learning_rate == 0:
        return agent
    skill = min(1.0, agent.skill + agent.learning_rate * games_played)
    return replace(agent, skill=skill)
