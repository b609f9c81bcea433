import random
from dataclasses import replace
from math import comb

import numpy as np
import pytest

from castle_dda.engine import (
    CombatParams,
    GameOutcome,
    Wave,
    compose_wave,
    play_game,
    resolve_level,
)
from castle_dda.seeding import derive_rng
from castle_dda.tiers import V1, V2, ControllerState, Dynamic, FixedIncrement, next_wave_size

DEFAULTS = CombatParams()
HARMLESS = replace(DEFAULTS, tanker_hit_coeff=0.0, zombie_hit_coeff=0.0)
DEADLY_TANKERS = replace(DEFAULTS, tanker_hit_coeff=100.0, zombie_hit_coeff=0.0)


def _binom_cdf(k, n, p):
    return sum(comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(k + 1))


def _sequential_oracle(skill, tankers, zombies, gate, params, rnd):
    """Event-by-event reference: per-enemy attempts, list shuffle, step through."""
    p_t, p_z = params.hit_probabilities(tankers + zombies, skill)
    h = params.attempts_per_enemy
    events = ["kill"] * (tankers + zombies)
    events += ["p"] * sum(rnd.random() < p_t for _ in range(h * tankers))
    events += ["g"] * sum(rnd.random() < p_z for _ in range(h * zombies))
    rnd.shuffle(events)
    player, remaining = 100, tankers + zombies
    for ev in events:
        if ev == "p":
            player -= 10
        elif ev == "g":
            gate -= 10
        else:
            remaining -= 1
        if player == 0 or gate == 0:
            return False, remaining
    return True, 0


def test_compose_wave_half_ratio():
    class Half:
        def uniform(self, a, b):
            return 0.5

    assert compose_wave(10, Half()) == Wave(tankers=5, zombies=5)


def test_compose_wave_single_enemy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        wave = compose_wave(1, rng)
        assert wave.size == 1


def test_compose_wave_mean_zombies():
    rng = np.random.default_rng(11)
    zombies = [compose_wave(10, rng).zombies for _ in range(100_000)]
    # round(10 * U[0.3, 0.7]) is symmetric about 5.
    assert 4.9 <= np.mean(zombies) <= 5.1
    assert min(zombies) >= 3 and max(zombies) <= 7


def test_compose_wave_rejects_empty():
    with pytest.raises(ValueError):
        compose_wave(0, np.random.default_rng(0))


def test_harmless_level():
    out = resolve_level(0.3, Wave(6, 4), 70, HARMLESS, np.random.default_rng(1))
    assert out.survived
    assert out.player_hits_taken == out.gate_hits_taken == 0
    assert out.end_player == 100 and out.end_gate == 70
    assert out.enemies_remaining == 0


def test_certain_tanker_hits_kill_player():
    params = replace(DEADLY_TANKERS, attempts_per_enemy=1)
    out = resolve_level(0.5, Wave(12, 0), 100, params, np.random.default_rng(2))
    assert not out.survived
    assert out.player_hits_taken == 10 and out.end_player == 0
    assert out.end_gate == 100


def test_resolve_level_rejects_destroyed_gate():
    with pytest.raises(ValueError):
        resolve_level(0.5, Wave(5, 5), 0, DEFAULTS, np.random.default_rng(0))


def test_survival_probability_matches_exact_binomial():
    # Survival only depends on totals: both hit counts must stay below 10.
    p_t, p_z = DEFAULTS.hit_probabilities(10, 0.5)
    exact = _binom_cdf(9, 15, p_t) * _binom_cdf(9, 15, p_z)
    rng = np.random.default_rng(3)
    n = 100_000
    hits = sum(resolve_level(0.5, Wave(5, 5), 100, DEFAULTS, rng).survived for _ in range(n))
    assert abs(hits / n - exact) <= 0.01


def test_resolve_level_matches_sequential_oracle_under_pressure():
    skill, tankers, zombies, gate = 0.2, 9, 9, 60
    n = 20_000
    rng = np.random.default_rng(4)
    rnd = random.Random(4)
    ours = [resolve_level(skill, Wave(tankers, zombies), gate, DEFAULTS, rng) for _ in range(n)]
    ref = [_sequential_oracle(skill, tankers, zombies, gate, DEFAULTS, rnd) for _ in range(n)]
    surv_ours = np.mean([o.survived for o in ours])
    surv_ref = np.mean([r[0] for r in ref])
    assert 0.2 < surv_ref < 0.8  # the check is only informative away from 0 and 1
    assert abs(surv_ours - surv_ref) < 0.02
    rem_ours = np.mean([o.enemies_remaining for o in ours])
    rem_ref = np.mean([r[1] for r in ref])
    assert abs(rem_ours - rem_ref) < 0.15


def test_duration_counts_only_killed_enemies():
    rng = np.random.default_rng(5)
    for _ in range(200):
        out = resolve_level(0.1, Wave(10, 8), 40, DEFAULTS, rng)
        killed = 18 - out.enemies_remaining
        assert out.duration_s == pytest.approx(killed / DEFAULTS.kill_rate(0.1))


def test_conservation_and_outcome_invariants():
    rng = np.random.default_rng(6)
    for _ in range(500):
        gate = int(rng.integers(1, 11)) * 10
        wave = compose_wave(int(rng.integers(1, 40)), rng)
        out = resolve_level(float(rng.uniform()), wave, gate, DEFAULTS, rng)
        assert out.player_hits_taken * 10 == 100 - out.end_player
        assert out.gate_hits_taken * 10 == gate - out.end_gate
        if out.survived:
            assert out.end_player >= 10 and out.end_gate >= 10 and out.enemies_remaining == 0
        else:
            assert out.end_player == 0 or out.end_gate == 0


def test_harmless_game_hits_level_cap():
    params = replace(HARMLESS, max_levels=12)
    trace = play_game(0.5, FixedIncrement(), params, np.random.default_rng(7))
    assert trace.outcome is GameOutcome.LEVEL_CAP_REACHED
    assert trace.levels_reached == 12
    assert trace.wave_sizes == [10 + 3 * i for i in range(12)]
    total = sum(r.outcome.duration_s for r in trace.levels) + 12 * params.inter_level_pause
    assert trace.total_duration_s == pytest.approx(total)


@pytest.mark.parametrize("policy", [FixedIncrement(), Dynamic(V1), Dynamic(V2)])
def test_deadly_game_ends_in_level_one(policy):
    trace = play_game(0.9, policy, DEADLY_TANKERS, np.random.default_rng(8))
    assert trace.outcome is GameOutcome.PLAYER_DEATH
    assert trace.levels_reached == 1


def test_weak_skill_baseline_level_band():
    levels = [
        play_game(0.2, FixedIncrement(), DEFAULTS, derive_rng(123, i)).levels_reached
        for i in range(500)
    ]
    assert 2.5 <= np.mean(levels) <= 4.5


def test_determinism():
    a = play_game(0.4, Dynamic(V2), DEFAULTS, derive_rng(9, 1))
    b = play_game(0.4, Dynamic(V2), DEFAULTS, derive_rng(9, 1))
    assert a == b


@pytest.mark.parametrize("policy", [FixedIncrement(), Dynamic(V1), Dynamic(V2)])
def test_trace_invariants_and_policy_replay(policy):
    for i in range(200):
        trace = play_game(float(i % 10) / 10, policy, DEFAULTS, derive_rng(10, i))
        gates = [r.outcome.end_gate for r in trace.levels]
        assert gates == sorted(gates, reverse=True)
        starts = [r.outcome.start_gate for r in trace.levels]
        assert starts[0] == 100 and starts[1:] == gates[:-1]

        # Replay the controller from recorded healths alone.
        state = ControllerState()
        for rec in trace.levels:
            assert rec.wave.size == state.current_wave_size
            if rec.outcome.survived:
                state, size = next_wave_size(state, policy, rec.outcome.end_gate, rec.outcome.end_player)
                assert size == rec.next_size
                assert rec.tier == state.last_tier
        if trace.outcome is not GameOutcome.LEVEL_CAP_REACHED:
            assert not trace.levels[-1].outcome.survived
            assert all(r.outcome.survived for r in trace.levels[:-1])


def test_skill_monotonicity_small():
    means = [
        np.mean([play_game(s, FixedIncrement(), DEFAULTS, derive_rng(11, i)).levels_reached
                 for i in range(300)])
        for s in (0.2, 0.5, 0.8)
    ]
    assert means[0] < means[1] < means[2]


def test_params_validation():
    with pytest.raises(ValueError):
        CombatParams(tanker_hit_coeff=-1)
    with pytest.raises(ValueError):
        CombatParams(max_levels=0)
    with pytest.raises(ValueError):
        CombatParams.from_dict({"speed": 2})
    assert CombatParams.from_dict(DEFAULTS.to_dict()) == DEFAULTS


def test_hit_probabilities_clamped():
    p_t, p_z = replace(DEFAULTS, zombie_skill_discount=5.0, tanker_hit_coeff=50).hit_probabilities(30, 0.5)
    assert p_t == 1.0 and p_z == 0.0
