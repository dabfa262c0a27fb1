"""Seeded random instances for tests and demos."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product
from typing import Sequence

from .chain import EdgeData, MarkovChain
from .model import Game, Outcome, StrategyAutomaton, StrategyProfile


def random_composition(rng: random.Random, total: int, parts: int) -> list[int]:
    """A uniformly chosen way of writing ``total`` as ``parts`` nonnegative integers."""
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    bounds = [0] + cuts + [total]
    return [bounds[k + 1] - bounds[k] for k in range(parts)]


def random_distribution(rng: random.Random, size: int, max_den: int = 16, positive: bool = True) -> list[Fraction]:
    """Probabilities with a common denominator of at most ``max_den``."""
    den = rng.randint(max(size, 1), max(max_den, size))
    if positive:
        parts = [c + 1 for c in random_composition(rng, den - size, size)]
    else:
        parts = random_composition(rng, den, size)
    return [Fraction(p, den) for p in parts]


def random_rational(rng: random.Random, lo: int, hi: int, max_den: int = 16) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_chain(
    rng: random.Random,
    n: int | None = None,
    max_n: int = 8,
    max_den: int = 16,
    reward_range: tuple[int, int] = (-4, 4),
    duration_range: tuple[int, int] = (1, 4),
    max_out: int = 3,
) -> MarkovChain:
    """A chain mixing transient states, cycles and absorbing states."""
    if n is None:
        n = rng.randint(1, max_n)
    edges = {}
    for i in range(1, n + 1):
        k = rng.randint(1, min(max_out, n))
        targets = sorted(rng.sample(range(1, n + 1), k))
        probs = random_distribution(rng, k, max_den)
        for j, p in zip(targets, probs):
            r = random_rational(rng, *reward_range, max_den)
            lo, hi = duration_range
            d = random_rational(rng, lo, hi, max_den)
            d = min(max(d, Fraction(lo)), Fraction(hi))
            edges[(i, j)] = EdgeData(p, r, d)
    return MarkovChain(n, edges)


def random_game(
    rng: random.Random,
    players: int = 1,
    states: int = 2,
    actions: int | Sequence[int] = 2,
    signals: int | Sequence[int] = 1,
    max_outcomes: int = 2,
    max_den: int = 6,
    reward_range: tuple[int, int] = (-2, 2),
    zero_sum: bool = False,
) -> Game:
    acts = [actions] * players if isinstance(actions, int) else list(actions)
    sigs = [signals] * players if isinstance(signals, int) else list(signals)
    names = tuple(f"s{v}" for v in range(states))
    action_names = tuple(tuple(f"a{j}" for j in range(acts[i])) for i in range(players))
    signal_names = tuple(tuple(f"o{j}" for j in range(sigs[i])) for i in range(players))
    transitions = {}
    for v in range(states):
        for a in product(*(range(x) for x in acts)):
            k = rng.randint(1, max_outcomes)
            probs = random_distribution(rng, k, max_den)
            row = []
            for p in probs:
                r0 = random_rational(rng, *reward_range, 4)
                if zero_sum:
                    rewards = (r0, -r0)
                else:
                    rewards = (r0,) + tuple(
                        random_rational(rng, *reward_range, 4) for _ in range(players - 1)
                    )
                row.append(
                    Outcome(
                        p,
                        rewards,
                        tuple(rng.randrange(sigs[i]) for i in range(players)),
                        rng.randrange(states),
                    )
                )
            transitions[(v, a)] = tuple(row)
    return Game(
        names,
        action_names,
        signal_names,
        0,
        tuple(0 for _ in range(players)),
        transitions,
    )


def random_strategy(
    rng: random.Random,
    game: Game,
    player: int,
    bound: int = 1,
    max_den: int = 6,
    positive: bool = False,
    deterministic: bool = False,
) -> StrategyAutomaton:
    """A random strategy with exactly ``bound`` memory modes."""
    n_act = len(game.actions[player])
    acts, upd = {}, {}
    for m in range(bound):
        for s in range(len(game.signals[player])):
            if deterministic:
                pa = [Fraction(0)] * n_act
                pa[rng.randrange(n_act)] = Fraction(1)
                pu = [Fraction(0)] * bound
                pu[rng.randrange(bound)] = Fraction(1)
            else:
                pa = random_distribution(rng, n_act, max_den, positive)
                pu = random_distribution(rng, bound, max_den, positive)
            acts[(m, s)] = {a: p for a, p in enumerate(pa) if p}
            upd[(m, s)] = {x: p for x, p in enumerate(pu) if p}
    return StrategyAutomaton(player, bound, acts, upd)


def random_profile(
    rng: random.Random, game: Game, bounds: Sequence[int], **kwargs
) -> StrategyProfile:
    return StrategyProfile(
        tuple(random_strategy(rng, game, i, bounds[i], **kwargs) for i in range(game.player_count)),
        tuple(bounds),
    )


def perturb_strategy(rng: random.Random, strategy: StrategyAutomaton, scale: Fraction) -> StrategyAutomaton:
    """Scale each positive probability by a factor in [1 - scale, 1 + scale] and renormalize.

    Supports are preserved, so the relative distance to the original stays finite.
    """
    steps = 64

    def jiggle(table):
        out = {}
        for cell, dist in table.items():
            raw = {k: p * (1 + scale * Fraction(rng.randint(-steps, steps), steps)) for k, p in dist.items()}
            total = sum(raw.values())
            out[cell] = {k: q / total for k, q in raw.items()}
        return out

    return StrategyAutomaton(
        strategy.player,
        strategy.memory_bound,
        jiggle(strategy.action_dist),
        jiggle(strategy.update_dist),
        strategy.initial_memory,
    )


def perturb_profile(rng: random.Random, profile: StrategyProfile, scale: Fraction) -> StrategyProfile:
    return StrategyProfile(
        tuple(perturb_strategy(rng, s, scale) for s in profile.strategies), profile.bounds
    )


def random_cnf(rng: random.Random, max_clauses: int = 5, max_vars: int = 4):
    """A 3-CNF with distinct variables in each clause (needs at least 3 variables)."""
    from .sat import CnfFormula

    m = rng.randint(3, max(3, max_vars))
    n = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(n):
        chosen = rng.sample(range(1, m + 1), 3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in chosen))
    return CnfFormula(m, tuple(clauses))


def matching_pennies() -> Game:
    """One state; player 0 wins 1 on matching faces and loses 1 otherwise."""
    transitions = {}
    for a in range(2):
        for b in range(2):
            r = Fraction(1) if a == b else Fraction(-1)
            transitions[(0, (a, b))] = (Outcome(Fraction(1), (r, -r), (0, 0), 0),)
    return Game(("s",), (("H", "T"), ("H", "T")), (("o",), ("o",)), 0, (0, 0), transitions)


def constant_game(reward: Fraction = Fraction(2), actions: int = 1) -> Game:
    """One player, one state; every action loops with the same reward."""
    transitions = {
        (0, (a,)): (Outcome(Fraction(1), (Fraction(reward),), (0,), 0),) for a in range(actions)
    }
    return Game(("s",), (tuple(f"a{a}" for a in range(actions)),), (("o",),), 0, (0,), transitions)


def two_action_game(rewards: Sequence[Fraction] = (Fraction(1), Fraction(0))) -> Game:
    """One player, one state; action a loops with reward ``rewards[a]``."""
    transitions = {
        (0, (a,)): (Outcome(Fraction(1), (Fraction(r),), (0,), 0),) for a, r in enumerate(rewards)
    }
    return Game(
        ("s",), (tuple(f"a{a}" for a in range(len(rewards))),), (("o",),), 0, (0,), transitions
    )
