"""Tier-based dynamic difficulty adjustment for a wave-survival castle defence game."""

from castle_dda.tiers import (
    V1,
    V2,
    FixedIncrement,
    Dynamic,
    ControllerState,
    Tier,
    TierScheme,
    allocate_tier,
    combined_score,
    next_wave_size,
    spawn_increment,
    tier_for_score,
    tier_table,
)

__all__ = [
    "V1",
    "V2",
    "FixedIncrement",
    "Dynamic",
    "ControllerState",
    "Tier",
    "TierScheme",
    "allocate_tier",
    "combined_score",
    "next_wave_size",
    "spawn_increment",
    "tier_for_score",
    "tier_table",
]

__version__ = "0.1.0"
