from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings

from boundedmem.chain import (
    ChainError,
    EdgeData,
    MarkovChain,
    chain_from_rows,
    chain_state_space,
    induce,
    n_bound,
    parse_chain,
    serialize_chain,
)
from boundedmem.generators import constant_game, matching_pennies
from boundedmem.model import Game, GameFormatError, Outcome, StrategyAutomaton, StrategyProfile
from boundedmem.sat import CnfFormula, build_game, interpretation_to_strategy
from strategies import chains, games_with_profiles

F = Fraction


def test_constant_game_induces_one_loop():
    game = constant_game()
    chain = induce(game, StrategyProfile((StrategyAutomaton.uniform(game, 0),)), 0)
    assert chain.n == 1
    assert chain.edge(1, 1) == EdgeData(F(1), F(2), F(1))


def test_satisfying_strategy_reaches_target_row():
    phi = CnfFormula(3, ((1, 2, 3),))
    game = build_game(phi)
    profile = StrategyProfile((interpretation_to_strategy(phi, [True] * 3),))
    chain = induce(game, profile, 0, prune=True)
    target = [i for i, (v, _, _) in enumerate(chain.labels, start=1) if game.states[v] == "w_4"]
    assert len(target) == 1
    assert chain.edge(target[0], target[0]).reward == 1
    from boundedmem.oracle import absorption_probabilities, find_bsccs

    comps = find_bsccs(chain)
    probs = absorption_probabilities(chain, comps)
    assert probs[comps.index(frozenset(target))] == 1


def test_matching_pennies_uniform_rewards_average_out():
    game = matching_pennies()
    profile = StrategyProfile(tuple(StrategyAutomaton.uniform(game, i) for i in range(2)))
    chain = induce(game, profile, 0)
    assert chain.n == 1
    assert chain.edge(1, 1) == EdgeData(F(1), F(0), F(1))


def _signal_game(states: int, signals: tuple[int, ...]) -> Game:
    k = len(signals)
    transitions = {}
    from itertools import product

    for v in range(states):
        for a in product(range(1), repeat=k):
            transitions[(v, a)] = (Outcome(F(1), (F(0),) * k, (0,) * k, v),)
    return Game(
        tuple(f"s{v}" for v in range(states)),
        tuple(("a",) for _ in range(k)),
        tuple(tuple(f"o{j}" for j in range(n)) for n in signals),
        0,
        (0,) * k,
        transitions,
    )


def test_n_bound_examples():
    assert n_bound(_signal_game(4, (2, 2)), (2, 3)) == 96
    assert n_bound(constant_game(), (1,)) == 1
    phi = CnfFormula(3, ((1, 2, 3), (-1, 2, 3)))
    game = build_game(phi)
    assert n_bound(game, (1,)) == len(game.states) * (phi.variable_count + 2)


def test_n_bound_with_unequal_alphabets_uses_product():
    assert n_bound(_signal_game(1, (2, 3)), (1, 1)) == 6


def test_induce_rejects_invalid_profile():
    game = matching_pennies()
    with pytest.raises(GameFormatError):
        induce(game, StrategyProfile((StrategyAutomaton.uniform(game, 0),)), 0)


def test_state_space_starts_with_initial_label():
    game = _signal_game(2, (2,))
    space = chain_state_space(game, (2,), (1,))
    assert space[0] == (0, (1,), (0,))
    assert len(space) == len(set(space)) == 8


def test_chain_validation():
    with pytest.raises(ChainError, match="sums to"):
        chain_from_rows({1: {1: (F(1, 2), 0, 1)}})
    with pytest.raises(ChainError, match="duration"):
        chain_from_rows({1: {1: (1, 0, 0)}})
    with pytest.raises(ChainError, match="no outgoing"):
        MarkovChain(2, {(1, 1): EdgeData(F(1), F(0), F(1))})


def test_chain_json_rejects_duplicates():
    text = '{"n": 1, "mode": "exact", "edges": [' + ",".join(
        ['{"from": 1, "to": 1, "p": "1/1", "r": "0/1", "d": "1/1"}'] * 2
    ) + "]}"
    with pytest.raises(GameFormatError, match="duplicate"):
        parse_chain(text)


@settings(max_examples=80)
@given(games_with_profiles())
def test_induced_rows_are_stochastic_and_small(pair):
    game, profile = pair
    for player in range(game.player_count):
        chain = induce(game, profile, player)
        assert chain.n == n_bound(game, profile.bounds)
        for row in chain.rows().values():
            assert sum(e.probability for e in row.values()) == 1
            assert all(e.duration == 1 for e in row.values())
        assert induce(game, profile, player, prune=True).n <= chain.n


@settings(max_examples=30)
@given(games_with_profiles())
def test_induced_chain_roundtrip_feeds_solver(pair):
    from boundedmem.elimination import mp_value

    game, profile = pair
    chain = induce(game, profile, 0)
    text = serialize_chain(chain)
    again = parse_chain(text)
    assert serialize_chain(again) == text
    assert mp_value(again) == mp_value(chain)


def test_sat_game_rows_are_dirac_after_first_move():
    phi = CnfFormula(3, ((1, 2, 3), (-1, -2, 3), (1, -2, -3)))
    game = build_game(phi)
    chain = induce(game, StrategyProfile((interpretation_to_strategy(phi, [True, False, True]),)), 0)
    for i, row in chain.rows().items():
        if chain.labels[i - 1][0] == game.initial_state:
            assert sorted(e.probability for e in row.values()) == [F(1, 3)] * 3
        else:
            assert [e.probability for e in row.values()] == [1]


@settings(max_examples=40)
@given(chains())
def test_chain_json_roundtrip(chain):
    text = serialize_chain(chain)
    assert serialize_chain(parse_chain(text)) == text
