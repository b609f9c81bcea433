"""Cohort experiments: agents play every condition, results are averaged per group.

The study shape is 8 Weak, 14 Average and 8 Strong agents, each playing
three games without DDA and then three with it.  Only the Weak and Strong
groups are sign-checked against the expected directions; Average rows are
still reported.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from castle_dda.agents import (
    PROFILES,
    PlayerAgent,
    SkillProfile,
    apply_learning,
    get_profile,
    sample_agent,
)
from castle_dda.engine import CombatParams, GameTrace, play_game
from castle_dda.seeding import agent_rng, check_seed, game_rng
from castle_dda.tiers import Dynamic, FixedIncrement, get_policy

DEFAULT_COUNTS = {"Weak": 8, "Average": 14, "Strong": 8}
DEFAULT_CONDITIONS = ("fixed", "dda-v2")
DEFAULT_SEED = 2019

METRICS = ("Level Reached", "Time Taken", "Difficulty")
GROUPS = ("Weak", "Strong", "Average")
CHECKED_GROUPS = ("Weak", "Strong")

# Direction of (with DDA - without DDA) reported for the human study.
EXPECTED_SIGNS = {
    ("Weak", "Level Reached"): 1,
    ("Weak", "Time Taken"): 1,
    ("Weak", "Difficulty"): -1,
    ("Strong", "Level Reached"): -1,
    ("Strong", "Time Taken"): -1,
    ("Strong", "Difficulty"): 1,
}


@dataclass(frozen=True)
class CohortConfig:
    counts: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_COUNTS))
    games_per_condition: int = 3
    conditions: tuple[str, ...] = DEFAULT_CONDITIONS
    params: CombatParams = field(default_factory=CombatParams)
    master_seed: int = DEFAULT_SEED
    learning_rate: float = 0.0
    custom_profiles: dict[str, SkillProfile] = field(default_factory=dict)

    def __post_init__(self) -> None:
        check_seed(self.master_seed)
        if not self.counts:
            raise ValueError("counts: at least one profile is required")
        for name, count in self.counts.items():
            get_profile(name, self.custom_profiles)
            if isinstance(count, bool) or not isinstance(count, int) or count < 0:
                raise ValueError(f"counts: {name!r} must be a non-negative integer, got {count!r}")
        if sum(self.counts.values()) == 0:
            raise ValueError("counts: cohort has no agents")
        if not self.conditions:
            raise ValueError("conditions: at least one condition is required")
        if len(set(self.conditions)) != len(self.conditions):
            raise ValueError("conditions: duplicate entries")
        for name in self.conditions:
            get_policy(name)
        if self.games_per_condition < 1:
            raise ValueError("games_per_condition must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")

    @property
    def n_agents(self) -> int:
        return sum(self.counts.values())

    def profile(self, name: str) -> SkillProfile:
        return get_profile(name, self.custom_profiles)


@dataclass(frozen=True)
class GameRecord:
    """Per-game scalars, plus the full trace when the game was run in-process."""

    game_id: str
    agent_id: str
    agent_index: int
    profile: str
    skill: float
    condition: str
    condition_index: int
    game_index: int
    levels_reached: int
    duration_min: float
    difficulty_proxy: float
    trace: GameTrace | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CohortResults:
    config: CohortConfig
    agents: tuple[PlayerAgent, ...]
    records: tuple[GameRecord, ...]

    @property
    def conditions(self) -> tuple[str, ...]:
        seen = dict.fromkeys(rec.condition for rec in self.records)
        return tuple(seen)


def difficulty_proxy(trace: GameTrace) -> float:
    """1..5 difficulty stand-in from the mean V1 score of completed levels.

    The V1 score is used whatever policy was played so the yardstick does
    not move with the treatment.  A game lost in level 1 rates 5.
    """
    scores = [rec.v1_score for rec in trace.levels if rec.outcome.survived]
    if not scores:
        return 5.0
    return proxy_from_scores(scores)


def proxy_from_scores(scores: Sequence[Fraction | float | int]) -> float:
    mean = sum(Fraction(s) for s in scores) / len(scores)
    value = 1 + 4 * (1 - mean / 100)
    return float(min(max(value, Fraction(1)), Fraction(5)))


def build_agents(config: CohortConfig) -> tuple[PlayerAgent, ...]:
    agents = []
    index = 0
    for name, count in config.counts.items():
        profile = config.profile(name)
        for _ in range(count):
            rng = agent_rng(config.master_seed, index)
            agents.append(
                sample_agent(profile, rng, agent_id=f"A{index:02d}", learning_rate=config.learning_rate)
            )
            index += 1
    return tuple(agents)


def _play_one(task: tuple) -> GameRecord:
    agent_index, agent, cond_index, condition, game_index, games_per_condition, params, seed = task
    # Conditions are played in config order, so earlier conditions count as practice.
    played_before = cond_index * games_per_condition + game_index
    skilled = apply_learning(agent, played_before)
    rng = game_rng(seed, agent_index, cond_index, game_index)
    trace = play_game(skilled.skill, get_policy(condition), params, rng)
    return GameRecord(
        game_id=f"{agent.agent_id}-c{cond_index}-g{game_index}",
        agent_id=agent.agent_id,
        agent_index=agent_index,
        profile=agent.profile,
        skill=skilled.skill,
        condition=condition,
        condition_index=cond_index,
        game_index=game_index,
        levels_reached=trace.levels_reached,
        duration_min=trace.total_duration_s / 60.0,
        difficulty_proxy=difficulty_proxy(trace),
        trace=trace,
    )


def run_cohort(config: CohortConfig, workers: int = 1) -> CohortResults:
    """Play every (agent, condition, game) triple.

    Each game owns a random stream derived from the master seed and its
    labels, so ``workers > 1`` returns exactly the sequential result.
    """
    agents = build_agents(config)
    tasks = [
        (i, agent, c, condition, g, config.games_per_condition, config.params, config.master_seed)
        for i, agent in enumerate(agents)
        for c, condition in enumerate(config.conditions)
        for g in range(config.games_per_condition)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_play_one, tasks, chunksize=16))
    else:
        records = [_play_one(task) for task in tasks]
    return CohortResults(config, agents, tuple(records))


@dataclass(frozen=True)
class SummaryRow:
    group: str
    metric: str
    without: float
    with_: float
    difference: float


@dataclass(frozen=True)
class SummaryTable:
    baseline: str
    treatment: str
    rows: tuple[SummaryRow, ...]

    def get(self, group: str, metric: str) -> SummaryRow | None:
        for row in self.rows:
            if row.group == group and row.metric == metric:
                return row
        return None

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(row.group for row in self.rows))


def _metric_value(rec: GameRecord, metric: str) -> float:
    if metric == "Level Reached":
        return float(rec.levels_reached)
    if metric == "Time Taken":
        return rec.duration_min
    return rec.difficulty_proxy


def _exact_mean(values: Iterable[float]) -> Fraction:
    values = [Fraction(v) for v in values]
    return sum(values) / len(values)


def pick_conditions(
    conditions: Sequence[str], baseline: str | None = None, treatment: str | None = None
) -> tuple[str, str]:
    """Default pairing: first fixed-policy condition against first DDA condition."""
    if baseline is None:
        baseline = next((c for c in conditions if isinstance(get_policy(c), FixedIncrement)), None)
    if treatment is None:
        treatment = next((c for c in conditions if isinstance(get_policy(c), Dynamic)), None)
    if baseline is None or treatment is None or baseline == treatment:
        raise ValueError("both conditions required: a fixed baseline and a DDA treatment")
    for name in (baseline, treatment):
        if name not in conditions:
            raise ValueError(f"both conditions required: {name!r} not present in results")
    return baseline, treatment


def summarize(
    records: CohortResults | Iterable[GameRecord],
    baseline: str | None = None,
    treatment: str | None = None,
) -> SummaryTable:
    """Group means per condition: each agent's games are averaged first.

    Means are accumulated as exact fractions, so the table does not depend
    on record order.
    """
    if isinstance(records, CohortResults):
        records = records.records
    records = list(records)
    conditions = tuple(dict.fromkeys(rec.condition for rec in records))
    baseline, treatment = pick_conditions(conditions, baseline, treatment)

    per_agent: dict[tuple[str, str, str], list[GameRecord]] = defaultdict(list)
    for rec in records:
        per_agent[rec.profile, rec.agent_id, rec.condition].append(rec)

    rows = []
    present = {rec.profile for rec in records}
    for metric in METRICS:
        for group in GROUPS:
            if group not in present:
                continue
            means = {}
            for condition in (baseline, treatment):
                agent_means = [
                    _exact_mean(_metric_value(r, metric) for r in games)
                    for (profile, _, cond), games in per_agent.items()
                    if profile == group and cond == condition
                ]
                if not agent_means:
                    raise ValueError(f"group {group} has no games under {condition!r}")
                means[condition] = float(sum(agent_means) / len(agent_means))
            without, with_ = means[baseline], means[treatment]
            rows.append(SummaryRow(group, metric, without, with_, with_ - without))
    return SummaryTable(baseline, treatment, tuple(rows))


@dataclass(frozen=True)
class SignCheck:
    group: str
    metric: str
    expected: int
    difference: float | None  # None when the group is absent

    @property
    def available(self) -> bool:
        return self.difference is not None

    @property
    def observed(self) -> int | None:
        if self.difference is None:
            return None
        return int(math.copysign(1, self.difference)) if self.difference else 0

    @property
    def matches(self) -> bool:
        return self.available and self.observed == self.expected


@dataclass(frozen=True)
class SignReport:
    checks: tuple[SignCheck, ...]

    @property
    def flagged(self) -> tuple[SignCheck, ...]:
        return tuple(c for c in self.checks if c.available and not c.matches)

    @property
    def unavailable(self) -> tuple[SignCheck, ...]:
        return tuple(c for c in self.checks if not c.available)

    @property
    def all_match(self) -> bool:
        return not self.flagged and not self.unavailable


def compare_conditions(
    results: CohortResults | SummaryTable | Iterable[GameRecord],
) -> SignReport:
    table = results if isinstance(results, SummaryTable) else summarize(results)
    checks = []
    for (group, metric), expected in EXPECTED_SIGNS.items():
        row = table.get(group, metric)
        checks.append(SignCheck(group, metric, expected, None if row is None else row.difference))
    return SignReport(tuple(checks))


__all__ = [
    "CohortConfig",
    "CohortResults",
    "GameRecord",
    "SummaryRow",
    "SummaryTable",
    "SignCheck",
    "SignReport",
    "PROFILES",
    "run_cohort",
    "difficulty_proxy",
    "summarize",
    "compare_conditions",
]
