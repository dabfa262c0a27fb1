from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from boundedmem.chain import induce, n_bound
from boundedmem.elimination import mp_value
from boundedmem.encoding import (
    EncodingError,
    decode_strategy,
    emit_achieve_sentence,
    emit_ne_sentence,
    emit_pow2,
    emit_strat,
    emit_val,
    encode_constant,
    evaluate_val,
    sentence_variable_bound,
    solve_definitions,
    strategy_assignment,
    val_polynomial_bound,
    val_variable_bound,
)
from boundedmem.equilibria import GridSpec, grid_strategies
from boundedmem.formula import (
    Quant,
    Var,
    alternation_depth,
    atoms,
    degree,
    eval_term,
    evaluate,
    parse_smt2,
    serialize_smt2,
    stats,
)
from boundedmem.generators import constant_game, matching_pennies, random_game, two_action_game
from boundedmem.model import Game, Outcome, StrategyProfile
from strategies import games_with_profiles

F = Fraction
MP = matching_pennies()


def game_with(signals: int, actions: int) -> Game:
    transitions = {
        (0, (a,)): tuple(Outcome(F(1, signals), (F(a),), (s,), 0) for s in range(signals))
        for a in range(actions)
    }
    return Game(
        ("s",),
        (tuple(f"a{a}" for a in range(actions)),),
        (tuple(f"o{s}" for s in range(signals)),),
        0,
        (0,),
        transitions,
    )


@pytest.mark.parametrize("signals,actions,bound,count", [(1, 1, 1, 2), (2, 2, 2, 16), (1, 3, 2, 10)])
def test_strategy_variable_counts(signals, actions, bound, count):
    frag = emit_strat(game_with(signals, actions), 0, bound)
    assert len(frag.variables) == count == len(set(frag.variables))


def test_strategy_names():
    frag = emit_strat(MP, 1, 1)
    assert frag.variables == ["x1_a_m0_s0_0", "x1_a_m0_s0_1", "x1_u_m0_s0_0"]
    shared = emit_strat(MP, 1, 1, "d", tag_player=False)
    assert shared.variables[0] == "d_a_m0_s0_0"
    with pytest.raises(EncodingError):
        emit_strat(MP, 0, 0)


@pytest.mark.parametrize("signals,actions,bound", [(1, 2, 1), (2, 2, 1), (1, 2, 2)])
def test_assignments_decode_back(signals, actions, bound):
    game = game_with(signals, actions)
    frag = emit_strat(game, 0, bound)
    for s in grid_strategies(game, 0, bound, GridSpec(2)):
        env = strategy_assignment(frag, s)
        assert evaluate(frag.formula, env)
        assert decode_strategy(frag, env) == s


def test_out_of_range_assignment_fails_constraints():
    frag = emit_strat(MP, 0, 1)
    env = {name: F(1, 2) for name in frag.variables}
    env["x0_a_m0_s0_0"] = F(3, 2)
    assert not evaluate(frag.formula, env)


def test_single_state_value_is_the_reward():
    for r in (F(2), F(-1, 3)):
        game = constant_game(r)
        strats = [emit_strat(game, 0, 1)]
        frag = emit_val(game, [1], 0, strats)
        env = {name: F(1) for name in strats[0].variables}
        assert solve_definitions(frag, env)["y"] == r


def test_two_action_value_follows_the_mixture():
    game = two_action_game()
    for s in grid_strategies(game, 0, 1, GridSpec(4)):
        assert evaluate_val(game, [1], 0, StrategyProfile((s,))) == s.action_prob(0, 0, 0)


@settings(max_examples=80)
@given(games_with_profiles())
def test_value_fragment_matches_the_exact_solver(pair):
    game, profile = pair
    for i in range(game.player_count):
        expected = mp_value(induce(game, profile, i, prune=True))
        assert evaluate_val(game, profile.bounds, i, profile) == expected


@settings(max_examples=40)
@given(games_with_profiles())
def test_value_fragment_size(pair):
    game, profile = pair
    frag = emit_val(game, profile.bounds, 0)
    n = frag.n_states
    assert n == n_bound(game, profile.bounds)
    names = set(frag.aux) | {frag.output}
    assert len(names) <= val_variable_bound(n)
    s = stats(frag.formula)
    assert s.polynomial_count <= val_polynomial_bound(n)
    # Initial edge polynomials multiply one action and one update factor per player.
    initial = [d for d in frag.definitions if d.target.endswith("_0")]
    k = game.player_count
    assert all(degree(a.rhs) <= 2 * k for d in initial for a in atoms(d.formula))


def test_definitions_need_every_input():
    game = constant_game()
    frag = emit_val(game, [1], 0)
    with pytest.raises(KeyError):
        solve_definitions(frag, {})


def test_pow2_examples():
    one = emit_pow2(-1)
    assert one.variables == ("p_v1", "p_r") and len(one.clauses) == 2
    five = emit_pow2(-5)
    assert five.clauses[-1].rhs.args == (Var("p_v1"), Var("p_v3"))
    big = emit_pow2(-1024)
    assert len(big.variables) == 12 and len(big.clauses) == 12
    for e in (-1, -5, -12, -1024):
        enc = emit_pow2(e)
        env: dict[str, Fraction] = {}
        for c in enc.clauses:
            env[c.lhs.name] = eval_term(c.rhs, env)
        assert env[enc.result] == F(1, 2 ** -e)
        assert all(evaluate(c, env) for c in enc.clauses)
    for e in (0, 3):
        with pytest.raises(EncodingError):
            emit_pow2(e)


def test_constants():
    term, names, clauses = encode_constant(F(3), "k")
    assert names == () and clauses == ()
    term, names, clauses = encode_constant(F(3, 8), "k")
    assert names[-1] == "k_r" and len(clauses) == 3
    term, names, _ = encode_constant(F(1, 3), "k")
    assert names == ()


def test_ne_sentence_shape():
    f = emit_ne_sentence(MP, [1, 1], F(1, 4))
    assert alternation_depth(f) == 2
    assert isinstance(f, Quant) and f.kind == "exists" and isinstance(f.body, Quant)
    outer, inner = set(f.names), set(f.body.names)
    assert {"y0", "y1", "x0_a_m0_s0_0", "eps_v1", "eps_v2", "eps_r"} <= outer
    assert {"yp", "d_a_m0_s0_0"} <= inner and not outer & inner
    s = stats(f)
    assert s.variable_count <= sentence_variable_bound(MP, [1, 1], n_bound(MP, [1, 1]))
    assert s.max_degree == 4
    assert parse_smt2(serialize_smt2(f)) == f


def test_achieve_sentence_requires_zero_sum():
    with pytest.raises(EncodingError):
        emit_achieve_sentence(constant_game(), [1], 0, 0)
    with pytest.raises(EncodingError):
        emit_achieve_sentence(MP, [1, 1], 0, -1)
    with pytest.raises(EncodingError):
        emit_ne_sentence(MP, [1, 1], -1)


def test_sentence_bounds_on_small_games():
    rng = random.Random(11)
    for _ in range(20):
        k = rng.randint(1, 2)
        game = random_game(rng, players=k, states=rng.randint(1, 2), actions=2, signals=rng.randint(1, 2), zero_sum=k == 2)
        bounds = [1] * k
        f = emit_ne_sentence(game, bounds, F(1, 8))
        s = stats(f)
        assert s.alternation_depth == 2
        assert s.variable_count <= sentence_variable_bound(game, bounds, n_bound(game, bounds))


def _check(f) -> str:
    z3 = pytest.importorskip("z3")
    solver = z3.Solver()
    solver.set("timeout", 60000)
    solver.from_string(serialize_smt2(f))
    return str(solver.check())


def test_z3_constant_game_has_an_equilibrium():
    assert _check(emit_ne_sentence(constant_game(), [1], F(0))) == "sat"


def test_z3_matching_pennies_guarantees():
    assert _check(emit_achieve_sentence(MP, [1, 1], F(0), F(0))) == "sat"
    assert _check(emit_achieve_sentence(MP, [1, 1], F(1, 2), F(0))) == "unsat"
    assert _check(emit_achieve_sentence(MP, [1, 1], -MP.reward_bound, F(0))) == "sat"


def test_z3_matching_pennies_equilibrium():
    assert _check(emit_ne_sentence(MP, [1, 1], F(0))) == "sat"
    assert _check(emit_ne_sentence(MP, [1, 1], F(1, 4))) == "sat"
