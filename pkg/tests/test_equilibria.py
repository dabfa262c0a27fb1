from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from boundedmem.generators import (
    constant_game,
    matching_pennies,
    perturb_profile,
    random_game,
    two_action_game,
)
from boundedmem.chain import n_bound
from boundedmem.equilibria import (
    BudgetExceeded,
    GridSpec,
    best_response_grid,
    check_eps_achieve,
    check_eps_ne,
    grid_size,
    grid_strategies,
    min_prob_threshold,
    perturbation_bound,
    profile_rel_dist,
    respects_floor,
    round_strategy,
    value_of_profile,
)
from boundedmem.model import StrategyAutomaton, StrategyProfile, validate_profile
from boundedmem.sat import CnfFormula, build_game, interpretation_to_strategy
from strategies import games_with_profiles

F = Fraction
MP = matching_pennies()
UNIFORM = StrategyProfile(tuple(StrategyAutomaton.uniform(MP, i) for i in range(2)))
HEADS = StrategyProfile(tuple(StrategyAutomaton.constant(MP, i, 0) for i in range(2)))


def test_values_of_simple_profiles():
    assert value_of_profile(MP, UNIFORM, 0) == 0
    game = constant_game()
    assert value_of_profile(game, StrategyProfile((StrategyAutomaton.uniform(game, 0),)), 0) == 2
    phi = CnfFormula(3, ((1, 2, 3),))
    assert value_of_profile(build_game(phi), StrategyProfile((interpretation_to_strategy(phi, [True] * 3),)), 0) == 1


def test_best_response_picks_rewarding_action():
    game = two_action_game()
    profile = StrategyProfile((StrategyAutomaton.uniform(game, 0),))
    strategy, value = best_response_grid(game, profile, 0, 1, GridSpec(1, True))
    assert value == 1
    assert strategy.action_dist[(0, 0)] == {0: 1}


@pytest.mark.parametrize("g", [1, 2, 3, 4])
def test_every_response_to_uniform_is_indifferent(g):
    for player in range(2):
        for s in grid_strategies(MP, player, 1, GridSpec(g)):
            assert value_of_profile(MP, UNIFORM.replace(player, s), player) == 0


def test_response_to_heads():
    best0, v0 = best_response_grid(MP, HEADS, 0, 1, GridSpec(3))
    best1, v1 = best_response_grid(MP, HEADS, 1, 1, GridSpec(3))
    assert (v0, best0.action_dist[(0, 0)]) == (1, {0: 1})
    assert (v1, best1.action_dist[(0, 0)]) == (1, {1: 1})


def test_uniform_matching_pennies_is_an_exact_equilibrium():
    report = check_eps_ne(MP, UNIFORM, 0, GridSpec(4))
    assert report.accepted
    assert all(e.gain == 0 for e in report.entries)


def test_deterministic_matching_pennies_is_rejected():
    report = check_eps_ne(MP, HEADS, F(1, 2), GridSpec(1, True))
    assert not report.accepted
    second = report.entries[1]
    assert (second.baseline, second.best, second.gain) == (-1, 1, 2)


def test_single_action_game_is_accepted():
    game = constant_game()
    profile = StrategyProfile((StrategyAutomaton.uniform(game, 0),))
    assert check_eps_ne(game, profile, 0).accepted


def test_float_mode():
    report = check_eps_ne(MP, UNIFORM, F(1, 10), GridSpec(2), mode="float")
    assert report.accepted and report.threshold == F(7, 30)
    assert all(e.precision >= 1000 for e in report.entries)
    with pytest.raises(ValueError):
        check_eps_ne(MP, UNIFORM, F(1, 2), mode="float")
    with pytest.raises(ValueError):
        check_eps_ne(MP, UNIFORM, F(-1))


def test_achieve_examples():
    uniform, heads = UNIFORM.strategies[0], HEADS.strategies[0]
    assert check_eps_achieve(MP, uniform, 0, F(1, 10), GridSpec(3)).accepted
    report = check_eps_achieve(MP, heads, 0, F(1, 10), GridSpec(3))
    assert not report.accepted and report.entries[0].best == -1
    assert check_eps_achieve(MP, heads, -MP.reward_bound, 0).accepted
    with pytest.raises(ValueError, match="zero-sum"):
        check_eps_achieve(constant_game(), StrategyAutomaton.uniform(constant_game(), 0), 0, 0)


def test_achieve_float_mode():
    assert check_eps_achieve(MP, UNIFORM.strategies[0], 0, F(1, 10), GridSpec(2), mode="float").accepted


def test_budget():
    assert grid_size(MP, 0, 1, GridSpec(50)) == 51
    with pytest.raises(BudgetExceeded):
        list(grid_strategies(MP, 0, 1, GridSpec(50), budget=10))
    with pytest.raises(BudgetExceeded):
        check_eps_ne(MP, UNIFORM, 0, GridSpec(50), budget=10)


def test_grid_enumeration_matches_size():
    rng = random.Random(4)
    for _ in range(10):
        game = random_game(rng, players=1, states=1, actions=rng.randint(1, 3), signals=rng.randint(1, 2))
        for bound in (1, 2):
            for grid in (GridSpec(1), GridSpec(2), GridSpec(2, True)):
                found = list(grid_strategies(game, 0, bound, grid))
                assert len(found) == grid_size(game, 0, bound, grid)
                assert all(validate_profile(game, StrategyProfile((s,))) == [] for s in found)


def test_jobs_do_not_change_the_report():
    one = check_eps_ne(MP, HEADS, F(1, 10), GridSpec(3))
    two = check_eps_ne(MP, HEADS, F(1, 10), GridSpec(3), jobs=2)
    assert one.to_json(MP) == two.to_json(MP)


def test_report_json_shape():
    data = check_eps_ne(MP, UNIFORM, 0, GridSpec(2)).to_json(MP)
    assert data["verdict"] == "accepted"
    assert data["entries"][0]["gain"] == {"exact": "0/1", "decimal": "0"}
    assert "grid" in data["note"]


def test_perturbation_bound_examples():
    assert perturbation_bound(2, F(1, 10), 1) == F(9, 5)
    assert perturbation_bound(3, 0, 5) == 0
    with pytest.raises(ValueError):
        perturbation_bound(2, F(1, 8), 1)


def test_min_prob_threshold_examples():
    assert min_prob_threshold(3) == F(1, 256)
    assert min_prob_threshold(1) == F(1, 4)
    with pytest.raises(ValueError):
        min_prob_threshold(0)


@settings(max_examples=60)
@given(games_with_profiles())
def test_rounded_strategies_respect_the_floor(pair):
    game, profile = pair
    for u in (2, 3, 8):
        for s in profile.strategies:
            rounded = round_strategy(s, u)
            assert respects_floor(rounded, u)
            assert validate_profile(game, profile.replace(s.player, rounded)) == []


@settings(max_examples=60)
@given(games_with_profiles())
def test_perturbation_soundness(pair):
    game, profile = pair
    n = n_bound(game, profile.bounds)
    rng = random.Random(len(game.states) * 7 + n)
    perturbed = perturb_profile(rng, profile, F(1, 16 * n))
    delta = profile_rel_dist(profile, perturbed)
    assert delta < F(1, 4 * n)
    for i in range(game.player_count):
        diff = abs(value_of_profile(game, profile, i) - value_of_profile(game, perturbed, i))
        assert diff <= perturbation_bound(n, delta, game.reward_bound)


@settings(max_examples=40)
@given(games_with_profiles())
def test_exact_zero_epsilon_matches_best_responses(pair):
    game, profile = pair
    grid = GridSpec(1, deterministic_only=True)
    report = check_eps_ne(game, profile, 0, grid)
    brs = [best_response_grid(game, profile, i, None, grid)[1] for i in range(game.player_count)]
    baselines = [value_of_profile(game, profile, i) for i in range(game.player_count)]
    assert report.accepted == all(b <= v for b, v in zip(brs, baselines))
