"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from boundedmem.generators import random_chain, random_cnf, random_game, random_profile

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def chains(draw, max_n: int = 6):
    return random_chain(random.Random(draw(seeds)), max_n=max_n)


@st.composite
def games_with_profiles(draw, max_players: int = 2):
    rng = random.Random(draw(seeds))
    k = rng.randint(1, max_players)
    game = random_game(
        rng,
        players=k,
        states=rng.randint(1, 3),
        actions=rng.randint(1, 2),
        signals=rng.randint(1, 2),
    )
    bounds = [rng.randint(1, 2) if k == 1 else 1 for _ in range(k)]
    return game, random_profile(rng, game, bounds)


@st.composite
def cnfs(draw, max_clauses: int = 5, max_vars: int = 4):
    return random_cnf(random.Random(draw(seeds)), max_clauses, max_vars)
