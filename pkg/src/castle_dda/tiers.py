"""Tier scoring, tier range tables and the spawn-increment controller.

Healths are integer hit points in steps of 10 (0..100).  Scores are kept
as :class:`fractions.Fraction` so interval membership at printed bounds
such as 21 / 21.5 is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Union

HEALTH_STEP = 10
MAX_HEALTH = 100
VALID_HEALTHS = tuple(range(HEALTH_STEP, MAX_HEALTH + 1, HEALTH_STEP))

BASE_WAVE_SIZE = 10
FIXED_INCREMENT = 3


class Tier(IntEnum):
    T1 = 1  # Poor
    T2 = 2  # Below Average
    T3 = 3  # Average
    T4 = 4  # Above Average
    T5 = 5  # Very Good

    @property
    def label(self) -> str:
        return _TIER_LABELS[self]


_TIER_LABELS = {
    Tier.T1: "Poor",
    Tier.T2: "Below Average",
    Tier.T3: "Average",
    Tier.T4: "Above Average",
    Tier.T5: "Very Good",
}


def check_health(value: int, name: str = "health") -> int:
    """Validate a hit-point value and return it unchanged."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an int, got {type(value).__name__}")
    if value % HEALTH_STEP or not 0 <= value <= MAX_HEALTH:
        raise ValueError(f"{name} must be a multiple of 10 in 0..100, got {value}")
    return value


def _survivor(value: int, name: str) -> int:
    check_health(value, name)
    if value == 0:
        raise ValueError(f"{name} is 0: entity destroyed, no tier is allocated")
    return value


@dataclass(frozen=True)
class TierScheme:
    """Score formula plus the five inclusive score intervals, one per tier."""

    name: str
    gate_weight: Fraction
    ranges: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        if len(self.ranges) != len(Tier):
            raise ValueError("a scheme needs exactly five ranges")
        prev_high = None
        for low, high in self.ranges:
            if low > high or (prev_high is not None and low <= prev_high):
                raise ValueError(f"ranges must be disjoint and ascending: {self.ranges}")
            prev_high = high

    @property
    def min_score(self) -> Fraction:
        return self.ranges[0][0]

    @property
    def max_score(self) -> Fraction:
        return self.ranges[-1][1]

    def __str__(self) -> str:
        return self.name


def _ranges(*pairs: tuple[str, str]) -> tuple[tuple[Fraction, Fraction], ...]:
    return tuple((Fraction(lo), Fraction(hi)) for lo, hi in pairs)


# Original allocation: plain average of gate and player health.
V1 = TierScheme(
    name="v1",
    gate_weight=Fraction(1),
    ranges=_ranges(("10", "27"), ("28", "45"), ("46", "63"), ("64", "81"), ("82", "100")),
)

# Revised allocation: gate health counts half.
V2 = TierScheme(
    name="v2",
    gate_weight=Fraction(1, 2),
    ranges=_ranges(("7.5", "21"), ("21.5", "35"), ("35.5", "49"), ("49.5", "62"), ("62.5", "75")),
)

SCHEMES = {"v1": V1, "v2": V2}


def get_scheme(name: str) -> TierScheme:
    try:
        return SCHEMES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown tier scheme {name!r}; expected one of {sorted(SCHEMES)}") from None


def combined_score(scheme: TierScheme, gate: int, player: int) -> Fraction:
    """Return the end-of-level performance score for surviving healths."""
    gate = _survivor(gate, "gate health")
    player = _survivor(player, "player health")
    return (scheme.gate_weight * gate + player) / 2


def tier_for_score(scheme: TierScheme, score: Fraction | int | float | str) -> Tier:
    """Map a score onto its tier.

    A score that falls between two printed intervals (never produced by
    valid healths) goes to the first interval whose upper bound covers it,
    which keeps the mapping total and monotone.
    """
    score = Fraction(score)
    if not scheme.min_score <= score <= scheme.max_score:
        raise ValueError(
            f"score {score} outside {scheme.name} range "
            f"[{scheme.min_score}, {scheme.max_score}]"
        )
    for tier, (_, high) in zip(Tier, scheme.ranges):
        if score <= high:
            return tier
    raise AssertionError("unreachable: score bounded by max_score")


def allocate_tier(scheme: TierScheme, gate: int, player: int) -> Tier:
    return tier_for_score(scheme, combined_score(scheme, gate, player))


def spawn_increment(tier: Tier | int) -> int:
    """Additional enemies for the next wave: T1 -> +1 ... T5 -> +5."""
    return int(Tier(tier))


@dataclass(frozen=True)
class FixedIncrement:
    """Baseline game: every wave grows by three enemies."""

    increment: int = FIXED_INCREMENT

    def __post_init__(self) -> None:
        if self.increment != FIXED_INCREMENT:
            raise ValueError(f"fixed increment is {FIXED_INCREMENT}, got {self.increment}")

    @property
    def name(self) -> str:
        return "fixed"


@dataclass(frozen=True)
class Dynamic:
    """DDA game: wave growth equals the tier allocated at the end of the level."""

    scheme: TierScheme = V2

    @property
    def name(self) -> str:
        return f"dda-{self.scheme.name}"


SpawnPolicy = Union[FixedIncrement, Dynamic]

POLICY_NAMES = ("fixed", "dda-v1", "dda-v2")


def get_policy(name: str) -> SpawnPolicy:
    key = name.lower()
    if key == "fixed":
        return FixedIncrement()
    if key.startswith("dda-") and key[4:] in SCHEMES:
        return Dynamic(SCHEMES[key[4:]])
    raise ValueError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")


@dataclass(frozen=True)
class ControllerState:
    current_wave_size: int = BASE_WAVE_SIZE
    last_tier: Tier | None = field(default=None)

    def __post_init__(self) -> None:
        if self.current_wave_size < 1:
            raise ValueError("wave size must be positive")


def next_wave_size(
    state: ControllerState, policy: SpawnPolicy, gate: int, player: int
) -> tuple[ControllerState, int]:
    """Advance the controller after a survived level.

    ``gate`` and ``player`` are the healths read when the last enemy dies,
    before the player regenerates.
    """
    _survivor(gate, "gate health")
    _survivor(player, "player health")
    if isinstance(policy, FixedIncrement):
        size = state.current_wave_size + policy.increment
        return ControllerState(size, None), size
    if isinstance(policy, Dynamic):
        tier = allocate_tier(policy.scheme, gate, player)
        size = state.current_wave_size + spawn_increment(tier)
        return ControllerState(size, tier), size
    raise TypeError(f"not a spawn policy: {policy!r}")


def tier_table(scheme: TierScheme) -> dict[tuple[int, int], tuple[Fraction, Tier]]:
    """Score and tier for every surviving (gate, player) pair."""
    return {
        (gate, player): (combined_score(scheme, gate, player), allocate_tier(scheme, gate, player))
        for gate in VALID_HEALTHS
        for player in VALID_HEALTHS
    }
