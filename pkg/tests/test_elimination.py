from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundedmem.chain import ChainError, EdgeData, MarkovChain, chain_from_rows
from boundedmem.elimination import (
    collapse_edges,
    eliminate_loop,
    eliminate_state,
    mp_value,
    mp_value_with_trace,
    run_schedule,
)
from boundedmem.oracle import find_bsccs, oracle_value, solve_linear
from strategies import chains

F = Fraction
half = F(1, 2)


def test_collapse_single_edge_is_identity():
    e = EdgeData(F(1, 3), F(2), F(5, 2))
    assert collapse_edges([e]) == e


def test_collapse_symmetric_average():
    out = collapse_edges([EdgeData(half, F(0), F(1)), EdgeData(half, F(2), F(3))])
    assert out == EdgeData(F(1), F(1), F(2))


def test_collapse_conditional_expectation():
    q = F(1, 4)
    out = collapse_edges([EdgeData(q, F(4), F(1)), EdgeData(q, F(0), F(1))])
    assert out == EdgeData(half, F(2), F(1))


def test_collapse_needs_edges():
    with pytest.raises((ValueError, IndexError)):
        collapse_edges([])


def test_loop_without_self_loop_is_unchanged():
    chain = chain_from_rows({1: {2: (1, 1, 1)}, 2: {2: (1, 0, 1)}})
    assert eliminate_loop(chain, 1).edges == chain.edges


def test_loop_one_expected_iteration():
    chain = chain_from_rows({1: {1: (half, 1, 1), 2: (half, 0, 1)}, 2: {2: (1, 0, 1)}})
    out = eliminate_loop(chain, 1)
    assert out.edge(1, 1) is None
    assert out.edge(1, 2) == EdgeData(F(1), F(1), F(2))


def test_loop_three_expected_iterations():
    chain = chain_from_rows({1: {1: (F(3, 4), 0, 1), 2: (F(1, 4), 0, 1)}, 2: {2: (1, 0, 1)}})
    out = eliminate_loop(chain, 1)
    assert out.edge(1, 2) == EdgeData(F(1), F(0), F(4))
    assert mp_value(chain) == 0


def test_loop_on_absorbing_state_is_a_skip():
    chain = chain_from_rows({1: {2: (1, 0, 1)}, 2: {2: (1, 5, 1)}})
    final, trace = run_schedule(chain)
    assert trace.steps[0].kind == "skip" and trace.steps[0].reason == "absorbing"
    assert trace.steps[1].kind == "skip" and "incoming" in trace.steps[1].reason
    assert final.edge(2, 2).reward == 5


def test_loop_invalid_state():
    chain = chain_from_rows({1: {1: (1, 0, 1)}})
    with pytest.raises(ChainError):
        eliminate_loop(chain, 4)


def test_state_path_composition():
    chain = chain_from_rows({1: {2: (1, 1, 1)}, 2: {3: (1, 2, 1)}, 3: {3: (1, 0, 1)}})
    out = eliminate_state(chain, 2)
    assert out.edge(1, 3) == EdgeData(F(1), F(3), F(2))
    assert 2 in out.removed


def test_unreachable_state_is_removed_alone():
    chain = chain_from_rows({1: {1: (1, 1, 1)}, 2: {1: (1, 7, 1)}})
    out = eliminate_state(chain, 2)
    assert out.edges == {(1, 1): chain.edge(1, 1)}


def test_diamond_keeps_parallel_branch():
    chain = chain_from_rows(
        {1: {2: (half, 0, 1), 3: (half, 0, 1)}, 2: {4: (1, 0, 1)}, 3: {4: (1, 0, 1)}, 4: {4: (1, 0, 1)}}
    )
    out = eliminate_state(chain, 3)
    assert out.edge(1, 4).probability == half
    assert out.edge(1, 2).probability == half


def test_state_elimination_errors():
    chain = chain_from_rows({1: {1: (half, 0, 1), 2: (half, 0, 1)}, 2: {1: (half, 0, 1), 2: (half, 0, 1)}})
    with pytest.raises(ChainError):
        eliminate_state(chain, 1)
    with pytest.raises(ChainError, match="self-loop"):
        eliminate_state(chain, 2)


EXAMPLES = [
    ({1: {1: (1, 3, 2)}}, F(3, 2)),
    ({1: {2: (half, 0, 1), 3: (half, 0, 1)}, 2: {2: (1, 4, 2)}, 3: {3: (1, 0, 1)}}, F(1)),
    ({1: {1: (F(3, 4), 0, 1), 2: (F(1, 4), 0, 1)}, 2: {2: (1, 0, 1)}}, F(0)),
]


@pytest.mark.parametrize("rows, value", EXAMPLES)
def test_value_examples(rows, value):
    chain = chain_from_rows(rows)
    assert mp_value(chain) == value
    assert oracle_value(chain) == value


def test_bscc_examples():
    assert find_bsccs(chain_from_rows({1: {1: (1, 0, 1)}})) == [frozenset({1})]
    assert find_bsccs(chain_from_rows({1: {2: (1, 0, 1)}, 2: {1: (1, 0, 1)}})) == [frozenset({1, 2})]
    three = chain_from_rows({1: {2: (half, 0, 1), 3: (half, 0, 1)}, 2: {2: (1, 0, 1)}, 3: {3: (1, 0, 1)}})
    assert find_bsccs(three) == [frozenset({2}), frozenset({3})]


def test_cycle_value_uses_durations():
    chain = chain_from_rows({1: {2: (1, 3, 1)}, 2: {1: (1, 1, 3)}})
    assert mp_value(chain) == oracle_value(chain) == 1


def test_solve_linear_singular():
    with pytest.raises(ArithmeticError, match="singular"):
        solve_linear([[F(1), F(1)], [F(2), F(2)]], [[F(1)], [F(2)]])


def test_trace_shape():
    chain = chain_from_rows({1: {2: (1, 0, 1)}, 2: {3: (1, 0, 1)}, 3: {1: (1, 1, 1)}})
    value, trace = mp_value_with_trace(chain)
    assert value == F(1, 3)
    loops = [s.state for s in trace.steps if s.op == "loop"]
    states = [s.state for s in trace.steps if s.op == "state"]
    assert sorted(loops) == [1, 2, 3]
    assert sorted(states) == [2, 3]
    assert trace.to_json()[0] == {"kind": "skip", "state": 3, "op": "loop", "reason": "no self-loop"}


def _each_step(chain):
    """Oracle value and chain before and after every applied step."""
    pairs = []

    def observe(step, work):
        pairs.append((step, work.freeze()))

    run_schedule(chain, observer=observe)
    return pairs


@settings(max_examples=150)
@given(chains(max_n=7))
def test_every_step_preserves_value_and_stochasticity(chain):
    start = oracle_value(chain)
    for step, after in _each_step(chain):
        assert oracle_value(after) == start
        for i, row in after.rows().items():
            assert sum(e.probability for e in row.values()) == 1
        if step.kind == "loop":
            loop = after.edge(step.state, step.state)
            assert loop is None or loop.probability == 1


@settings(max_examples=150)
@given(chains(max_n=8))
def test_engine_matches_oracle(chain):
    assert mp_value(chain) == oracle_value(chain)


@settings(max_examples=60)
@given(chains(max_n=6), st.fractions(min_value=F(1, 8), max_value=8, max_denominator=8))
def test_ratio_invariance_under_scaling(chain, c):
    scaled = MarkovChain(
        chain.n,
        {k: EdgeData(e.probability, e.reward * c, e.duration * c) for k, e in chain.edges.items()},
    )
    assert mp_value(scaled) == mp_value(chain)
