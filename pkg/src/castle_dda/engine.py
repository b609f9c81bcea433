"""Seedable abstract model of the castle defence game loop.

Combat inside a level is resolved in aggregate rather than spatially:

* each Tanker makes ``attempts_per_enemy`` attacks on the player and each
  Zombie the same number on the gate, with per-attempt hit probabilities
  that grow with wave size (pressure) and shrink with player skill;
* all hits plus one kill marker per enemy are shuffled into a single
  event order and played back until the player or gate runs out of
  health or every enemy is dead.

Every function takes an explicit :class:`numpy.random.Generator`; nothing
here touches global random state.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np

from castle_dda.tiers import (
    BASE_WAVE_SIZE,
    HEALTH_STEP,
    MAX_HEALTH,
    V1,
    ControllerState,
    Dynamic,
    SpawnPolicy,
    Tier,
    check_health,
    combined_score,
    next_wave_size,
)

ZOMBIE_FRACTION_RANGE = (0.3, 0.7)

_PLAYER_HIT, _GATE_HIT, _KILL = 0, 1, 2


@dataclass(frozen=True)
class CombatParams:
    """Free constants of the combat model.

    Per-attempt hit probabilities for a wave of ``n`` enemies and skill ``s``::

        p_tanker = clamp(tanker_hit_coeff * (n / n_ref) ** pressure_exponent * (1 - s))
        p_zombie = clamp(zombie_hit_coeff * (n / n_ref) ** pressure_exponent * (1 - zombie_skill_discount * s))

    The player kills ``kill_rate_base + kill_rate_slope * s`` enemies per second.
    Defaults come from ``scripts/calibrate.py``.
    """

    n_ref: float = 10.0
    attempts_per_enemy: int = 3
    tanker_hit_coeff: float = 0.14
    zombie_hit_coeff: float = 0.18
    pressure_exponent: float = 1.0
    zombie_skill_discount: float = 1.2
    kill_rate_base: float = 0.128
    kill_rate_slope: float = 0.269
    inter_level_pause: float = 5.0
    max_levels: int = 50

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{f.name} must be finite and >= 0, got {value}")
        if self.n_ref <= 0:
            raise ValueError("n_ref must be positive")
        if self.max_levels < 1:
            raise ValueError("max_levels must be >= 1")
        if int(self.attempts_per_enemy) != self.attempts_per_enemy:
            raise ValueError("attempts_per_enemy must be an integer")

    def hit_probabilities(self, size: int, skill: float) -> tuple[float, float]:
        pressure = (size / self.n_ref) ** self.pressure_exponent
        p_t = self.tanker_hit_coeff * pressure * (1.0 - skill)
        p_z = self.zombie_hit_coeff * pressure * (1.0 - self.zombie_skill_discount * skill)
        return min(max(p_t, 0.0), 1.0), min(max(p_z, 0.0), 1.0)

    def kill_rate(self, skill: float) -> float:
        return self.kill_rate_base + self.kill_rate_slope * skill

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CombatParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown combat parameter(s): {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass(frozen=True)
class Wave:
    tankers: int
    zombies: int

    def __post_init__(self) -> None:
        if self.tankers < 0 or self.zombies < 0:
            raise ValueError("enemy counts must be non-negative")

    @property
    def size(self) -> int:
        return self.tankers + self.zombies


def compose_wave(size: int, rng: np.random.Generator) -> Wave:
    """Split ``size`` enemies with a zombie share drawn uniformly from [0.3, 0.7]."""
    if size < 1:
        raise ValueError(f"wave size must be >= 1, got {size}")
    ratio = rng.uniform(*ZOMBIE_FRACTION_RANGE)
    zombies = int(round(ratio * size))
    return Wave(tankers=size - zombies, zombies=zombies)


@dataclass(frozen=True)
class LevelOutcome:
    survived: bool
    start_gate: int
    end_gate: int
    end_player: int  # before regeneration
    player_hits_taken: int
    gate_hits_taken: int
    enemies_remaining: int
    duration_s: float


def resolve_level(
    skill: float,
    wave: Wave,
    gate: int,
    params: CombatParams,
    rng: np.random.Generator,
) -> LevelOutcome:
    """Play one level against ``wave`` with the player starting at full health."""
    check_health(gate, "gate health")
    if gate < HEALTH_STEP:
        raise ValueError("gate already destroyed; the game is over")
    if not 0.0 <= skill <= 1.0:
        raise ValueError(f"skill must lie in [0, 1], got {skill}")

    p_t, p_z = params.hit_probabilities(wave.size, skill)
    attempts = int(params.attempts_per_enemy)
    # A sum of Binomial(H, p) over enemies is Binomial(H * enemies, p).
    player_hits = int(rng.binomial(attempts * wave.tankers, p_t))
    gate_hits = int(rng.binomial(attempts * wave.zombies, p_z))

    events = np.empty(player_hits + gate_hits + wave.size, dtype=np.int8)
    events[:player_hits] = _PLAYER_HIT
    events[player_hits : player_hits + gate_hits] = _GATE_HIT
    events[player_hits + gate_hits :] = _KILL
    rng.shuffle(events)

    player_capacity = MAX_HEALTH // HEALTH_STEP
    gate_capacity = gate // HEALTH_STEP
    stop = len(events)
    if player_hits >= player_capacity or gate_hits >= gate_capacity:
        p_cum = np.cumsum(events == _PLAYER_HIT)
        g_cum = np.cumsum(events == _GATE_HIT)
        lethal = np.flatnonzero((p_cum >= player_capacity) | (g_cum >= gate_capacity))
        stop = int(lethal[0]) + 1
    played = events[:stop]
    taken_p = int(np.count_nonzero(played == _PLAYER_HIT))
    taken_g = int(np.count_nonzero(played == _GATE_HIT))
    killed = int(np.count_nonzero(played == _KILL))
    end_player = MAX_HEALTH - HEALTH_STEP * taken_p
    end_gate = gate - HEALTH_STEP * taken_g
    survived = end_player > 0 and end_gate > 0
    return LevelOutcome(
        survived=survived,
        start_gate=gate,
        end_gate=end_gate,
        end_player=end_player,
        player_hits_taken=taken_p,
        gate_hits_taken=taken_g,
        enemies_remaining=wave.size - killed,
        duration_s=killed / params.kill_rate(skill),
    )


class GameOutcome(str, enum.Enum):
    PLAYER_DEATH = "PlayerDeath"
    GATE_DESTROYED = "GateDestroyed"
    LEVEL_CAP_REACHED = "LevelCapReached"


@dataclass(frozen=True)
class LevelRecord:
    level: int
    wave: Wave
    outcome: LevelOutcome
    score: Fraction | None  # under the active scheme; None for the fixed policy or a lost level
    tier: Tier | None
    next_size: int | None

    @property
    def v1_score(self) -> Fraction | None:
        if not self.outcome.survived:
            return None
        return combined_score(V1, self.outcome.end_gate, self.outcome.end_player)


@dataclass(frozen=True)
class GameTrace:
    skill: float
    policy: SpawnPolicy
    levels: tuple[LevelRecord, ...]
    outcome: GameOutcome
    total_duration_s: float
    levels_reached: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels_reached", len(self.levels))

    @property
    def levels_completed(self) -> int:
        return sum(1 for rec in self.levels if rec.outcome.survived)

    @property
    def wave_sizes(self) -> list[int]:
        return [rec.wave.size for rec in self.levels]


def play_game(
    skill: float,
    policy: SpawnPolicy,
    params: CombatParams,
    rng: np.random.Generator,
) -> GameTrace:
    """Play levels until the player or gate falls, or ``max_levels`` are cleared."""
    state = ControllerState(BASE_WAVE_SIZE)
    gate = MAX_HEALTH
    records: list[LevelRecord] = []
    duration = 0.0
    outcome = GameOutcome.LEVEL_CAP_REACHED
    for level in range(1, params.max_levels + 1):
        wave = compose_wave(state.current_wave_size, rng)
        result = resolve_level(skill, wave, gate, params, rng)
        duration += result.duration_s
        if not result.survived:
            records.append(LevelRecord(level, wave, result, None, None, None))
            outcome = (
                GameOutcome.PLAYER_DEATH if result.end_player == 0 else GameOutcome.GATE_DESTROYED
            )
            break
        # Tier is read before the player regenerates; the gate never does.
        state, size = next_wave_size(state, policy, result.end_gate, result.end_player)
        score = None
        if isinstance(policy, Dynamic):
            score = combined_score(policy.scheme, result.end_gate, result.end_player)
        records.append(LevelRecord(level, wave, result, score, state.last_tier, size))
        duration += params.inter_level_pause
        gate = result.end_gate
    return GameTrace(
        skill=skill,
        policy=policy,
        levels=tuple(records),
        outcome=outcome,
        total_duration_s=duration,
    )
