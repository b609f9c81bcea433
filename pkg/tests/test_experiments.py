from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from castle_dda.engine import CombatParams, play_game
from castle_dda.experiments import (
    CohortConfig,
    GameRecord,
    compare_conditions,
    difficulty_proxy,
    proxy_from_scores,
    run_cohort,
    summarize,
)
from castle_dda.tiers import FixedIncrement


def _rec(agent, profile, condition, game, level, minutes=1.0, proxy=3.0):
    return GameRecord(
        game_id=f"{agent}-{condition}-{game}", agent_id=agent, agent_index=0, profile=profile,
        skill=0.5, condition=condition, condition_index=0, game_index=game,
        levels_reached=level, duration_min=minutes, difficulty_proxy=proxy,
    )


def test_proxy_full_health_is_one():
    params = replace(CombatParams(), tanker_hit_coeff=0, zombie_hit_coeff=0, max_levels=4)
    trace = play_game(0.5, FixedIncrement(), params, np.random.default_rng(0))
    assert difficulty_proxy(trace) == 1.0


def test_proxy_level_one_death_is_five():
    params = replace(CombatParams(), tanker_hit_coeff=100.0)
    trace = play_game(0.5, FixedIncrement(), params, np.random.default_rng(0))
    assert trace.levels_completed == 0
    assert difficulty_proxy(trace) == 5.0


def test_proxy_arithmetic():
    assert proxy_from_scores([70, 40]) == pytest.approx(2.8)
    assert proxy_from_scores([10]) == 4.6


@given(st.lists(st.sampled_from([5 * k for k in range(2, 21)]), min_size=1, max_size=12))
def test_proxy_bounds(scores):
    assert 1.0 <= proxy_from_scores(scores) <= 5.0


@given(st.integers(10, 100), st.integers(10, 100))
def test_proxy_non_increasing_in_mean_score(a, b):
    lo, hi = sorted((a, b))
    assert proxy_from_scores([hi]) <= proxy_from_scores([lo])


def test_summarize_synthetic_levels():
    records = [_rec(f"W{i}", "Weak", "fixed", g, 3) for i in range(2) for g in range(3)]
    records += [_rec(f"W{i}", "Weak", "dda-v2", g, 5) for i in range(2) for g in range(3)]
    row = summarize(records).get("Weak", "Level Reached")
    assert (row.without, row.with_, row.difference) == (3.0, 5.0, 2.0)


def test_summarize_averages_agents_first():
    # Agent W0 has one game at level 2, W1 has three at level 6: mean of means is 4.
    records = [_rec("W0", "Weak", "fixed", 0, 2)]
    records += [_rec("W1", "Weak", "fixed", g, 6) for g in range(3)]
    records += [_rec(a, "Weak", "dda-v2", 0, 1) for a in ("W0", "W1")]
    assert summarize(records).get("Weak", "Level Reached").without == 4.0


def test_summarize_requires_both_conditions():
    records = [_rec("W0", "Weak", "fixed", 0, 2)]
    with pytest.raises(ValueError, match="both conditions required"):
        summarize(records)


def test_identical_conditions_flag_everything():
    base = [_rec(f"{p[0]}{i}", p, "fixed", g, 4, 2.0, 3.0)
            for p in ("Weak", "Strong") for i in range(2) for g in range(2)]
    dda = [replace(r, condition="dda-v2") for r in base]
    report = compare_conditions(base + dda)
    assert all(c.difference == 0 for c in report.checks)
    assert len(report.flagged) == 6


def test_weak_only_marks_strong_unavailable():
    records = [_rec("W0", "Weak", "fixed", 0, 2), _rec("W0", "Weak", "dda-v2", 0, 4)]
    report = compare_conditions(records)
    assert {c.group for c in report.unavailable} == {"Strong"}
    assert len(report.unavailable) == 3
    level = next(c for c in report.checks if c.group == "Weak" and c.metric == "Level Reached")
    assert level.matches


@pytest.fixture(scope="module")
def default_results():
    return run_cohort(CohortConfig())


def test_default_cohort_shape(default_results):
    cfg = default_results.config
    assert cfg.n_agents == 30 and cfg.games_per_condition == 3
    assert cfg.conditions == ("fixed", "dda-v2")
    assert len(default_results.records) == 180
    profiles = [a.profile for a in default_results.agents]
    assert profiles.count("Weak") == 8 and profiles.count("Strong") == 8


def test_cohort_deterministic(default_results):
    again = run_cohort(CohortConfig())
    assert again.records == default_results.records
    assert [r.trace for r in again.records] == [r.trace for r in default_results.records]


def test_single_game_cohort():
    cfg = CohortConfig(counts={"Average": 1}, games_per_condition=1, conditions=("fixed",))
    assert len(run_cohort(cfg).records) == 1


@settings(max_examples=25, deadline=None)
@given(st.randoms(use_true_random=False))
def test_summarize_order_invariant(default_results, rnd):
    records = list(default_results.records)
    rnd.shuffle(records)
    assert summarize(records) == summarize(default_results)


def test_summary_difference_is_with_minus_without(default_results):
    for row in summarize(default_results).rows:
        assert row.difference == row.with_ - row.without


@pytest.mark.parametrize("kwargs,match", [
    ({"counts": {}}, "counts"),
    ({"counts": {"Weak": -1}}, "counts"),
    ({"counts": {"Legend": 2}}, "unknown profile"),
    ({"conditions": ()}, "conditions"),
    ({"conditions": ("fixed", "sometimes")}, "unknown policy"),
    ({"games_per_condition": 0}, "games_per_condition"),
])
def test_config_validation(kwargs, match):
    with pytest.raises(ValueError, match=match):
        CohortConfig(**kwargs)


def test_learning_only_helps_later_games():
    cfg = CohortConfig(counts={"Weak": 2}, learning_rate=0.05)
    res = run_cohort(cfg)
    first = [r for r in res.records if r.condition_index == 0 and r.game_index == 0]
    later = [r for r in res.records if r.condition_index == 1 and r.game_index == 2]
    base = {a.agent_id: a.skill for a in res.agents}
    assert all(r.skill == base[r.agent_id] for r in first)
    assert all(r.skill == pytest.approx(min(1.0, base[r.agent_id] + 0.25)) for r in later)
