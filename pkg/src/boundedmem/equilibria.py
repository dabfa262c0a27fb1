"""Profile values, grid best responses, and epsilon-equilibrium checks.

Deviations are searched over a finite grid of strategies whose probabilities
are multiples of ``1/g``.  Every verdict is therefore relative to that grid:
an accepted profile is an equilibrium against grid deviations only.

In float mode each value is computed with rounded arithmetic at a precision
whose certified error is below a third of epsilon, and the rejection
threshold is widened to ``7/3 * epsilon``.  An accepted profile is then a
``3 * epsilon`` equilibrium over the grid.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from itertools import product
from math import comb
from typing import Iterator, Sequence

from .approx import mp_value_float, precision_for, reward_shift
from .chain import MarkovChain, induce
from .elimination import mp_value
from .model import (
    Game,
    StrategyAutomaton,
    StrategyProfile,
    format_rational,
    strategy_to_json,
)
from .ufloat import rel_dist, round_dist

DEFAULT_BUDGET = int(os.environ.get("BOUNDEDMEM_BUDGET", "100000"))

GRID_NOTE = (
    "deviations range over grid strategies only; acceptance is relative to the grid"
)


class BudgetExceeded(RuntimeError):
    """A grid enumeration would exceed the configured number of candidates."""


@dataclass(frozen=True)
class GridSpec:
    """Probabilities are multiples of 1/g; optionally only 0/1 entries."""

    g: int = 1
    deterministic_only: bool = False

    def __post_init__(self) -> None:
        if self.g < 1:
            raise ValueError("grid granularity must be at least 1")


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative ints summing to ``total``, lexicographically."""
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def _cell_options(n: int, grid: GridSpec) -> list[dict[int, Fraction]]:
    if grid.deterministic_only:
        return [{k: Fraction(1)} for k in range(n)]
    return [
        {k: Fraction(c, grid.g) for k, c in enumerate(comp) if c}
        for comp in _compositions(grid.g, n)
    ]


def grid_size(game: Game, player: int, bound: int, grid: GridSpec) -> int:
    n_act = len(game.actions[player])
    if grid.deterministic_only:
        per_cell = n_act * bound
    else:
        per_cell = comb(grid.g + n_act - 1, n_act - 1) * comb(grid.g + bound - 1, bound - 1)
    return per_cell ** (bound * len(game.signals[player]))


def grid_strategies(
    game: Game, player: int, bound: int, grid: GridSpec, budget: int | None = None
) -> Iterator[StrategyAutomaton]:
    """Every grid strategy with ``bound`` memory modes, in a fixed order."""
    budget = DEFAULT_BUDGET if budget is None else budget
    size = grid_size(game, player, bound, grid)
    if size > budget:
        raise BudgetExceeded(f"{size} grid strategies for player {player} exceed the budget of {budget}")
    cells = [(m, s) for m in range(bound) for s in range(len(game.signals[player]))]
    acts = _cell_options(len(game.actions[player]), grid)
    upds = _cell_options(bound, grid)
    cell_choices = [(a, u) for a in acts for u in upds]
    for pick in product(cell_choices, repeat=len(cells)):
        yield StrategyAutomaton(
            player,
            bound,
            {c: a for c, (a, _) in zip(cells, pick)},
            {c: u for c, (_, u) in zip(cells, pick)},
        )


def _induced(game: Game, profile: StrategyProfile, player: int) -> MarkovChain:
    # Unreachable chain states do not affect the value, so they are pruned.
    return induce(game, profile, player, prune=True)


def value_of_profile(game: Game, profile: StrategyProfile, player: int) -> Fraction:
    """Expected mean payoff of ``player`` (0-based) under ``profile``."""
    return mp_value(_induced(game, profile, player))


def float_value_of_profile(
    game: Game, profile: StrategyProfile, player: int, target_error: Fraction, u: int | None = None
) -> tuple[Fraction, int]:
    """Float approximation with certified error below ``target_error``."""
    chain = _induced(game, profile, player)
    if u is None:
        shift = reward_shift(chain)
        c = max(e.reward + shift * e.duration for e in chain.edges.values())
        u = precision_for(chain.n, c, target_error)
    return mp_value_float(chain, u).value, u


def _evaluate(
    game: Game,
    profile: StrategyProfile,
    player: int,
    rewards_of: int,
    mode: str,
    target_error: Fraction | None,
    u: int | None,
    strategy: StrategyAutomaton,
) -> Fraction:
    trial = profile.replace(player, strategy)
    if mode == "exact":
        return value_of_profile(game, trial, rewards_of)
    return float_value_of_profile(game, trial, rewards_of, target_error, u)[0]


def _evaluate_all(fn, candidates: list[StrategyAutomaton], jobs: int) -> list[Fraction]:
    if jobs <= 1 or len(candidates) < 2:
        return [fn(c) for c in candidates]
    chunk = max(1, len(candidates) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, candidates, chunksize=chunk))


def best_response_grid(
    game: Game,
    profile: StrategyProfile,
    player: int,
    bound: int | None = None,
    grid: GridSpec = GridSpec(),
    budget: int | None = None,
    jobs: int = 1,
) -> tuple[StrategyAutomaton, Fraction]:
    """The first grid strategy of maximal value for ``player``."""
    bound = profile.bounds[player] if bound is None else bound
    candidates = list(grid_strategies(game, player, bound, grid, budget))
    fn = partial(_evaluate, game, profile, player, player, "exact", None, None)
    values = _evaluate_all(fn, candidates, jobs)
    k = max(range(len(values)), key=lambda n: (values[n], -n))
    return candidates[k], values[k]


@dataclass(frozen=True)
class DeviationEntry:
    player: int
    baseline: Fraction
    best: Fraction
    strategy: StrategyAutomaton | None
    precision: int | None = None

    @property
    def gain(self) -> Fraction:
        return self.best - self.baseline


@dataclass(frozen=True)
class DeviationReport:
    """Outcome of an equilibrium or guarantee check.

    For equilibrium checks ``baseline`` is the player's value under the
    profile and ``best`` the best deviation found.  For guarantee checks the
    single entry describes the opponent: ``baseline`` is the target value and
    ``best`` the lowest value the opponent can force.
    """

    kind: str
    verdict: str
    mode: str
    epsilon: Fraction
    threshold: Fraction
    grid: GridSpec
    entries: tuple[DeviationEntry, ...]
    note: str = GRID_NOTE

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    def to_json(self, game: Game) -> dict:
        def num(x: Fraction) -> dict:
            return {"exact": format_rational(x), "decimal": decimal_string(x)}

        entries = []
        for e in self.entries:
            item = {
                "player": e.player,
                "baseline": num(e.baseline),
                "best": num(e.best),
                "gain": num(e.gain),
            }
            if e.precision is not None:
                item["precision"] = e.precision
            item["strategy"] = None if e.strategy is None else strategy_to_json(game, e.strategy)
            entries.append(item)
        return {
            "kind": self.kind,
            "note": self.note,
            "verdict": self.verdict,
            "mode": self.mode,
            "epsilon": num(self.epsilon),
            "threshold": num(self.threshold),
            "grid": {"g": self.grid.g, "deterministic_only": self.grid.deterministic_only},
            "entries": entries,
        }


def decimal_string(x: Fraction, digits: int = 12) -> str:
    """A short decimal rendering for human readers."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    text = f"{float(x):.{digits}g}"
    return text


def _check_epsilon(eps: Fraction, mode: str) -> Fraction:
    eps = Fraction(eps)
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    if mode == "float" and not 0 < eps < Fraction(1, 2):
        raise ValueError("float mode needs 0 < epsilon < 1/2")
    return eps


def check_eps_ne(
    game: Game,
    profile: StrategyProfile,
    eps: Fraction,
    grid: GridSpec = GridSpec(),
    mode: str = "exact",
    u: int | None = None,
    budget: int | None = None,
    jobs: int = 1,
) -> DeviationReport:
    """Check that no player gains more than the threshold by a grid deviation."""
    eps = _check_epsilon(eps, mode)
    threshold = eps if mode == "exact" else Fraction(7, 3) * eps
    target = None if mode == "exact" else eps / 3
    entries = []
    for i in range(game.player_count):
        bound = profile.bounds[i]
        candidates = list(grid_strategies(game, i, bound, grid, budget))
        if mode == "exact":
            baseline, used = value_of_profile(game, profile, i), None
        else:
            baseline, used = float_value_of_profile(game, profile, i, target, u)
        fn = partial(_evaluate, game, profile, i, i, mode, target, u)
        values = _evaluate_all(fn, candidates, jobs)
        k = max(range(len(values)), key=lambda n: (values[n], -n))
        entries.append(DeviationEntry(i, baseline, values[k], candidates[k], used))
    rejected = any(e.gain > threshold for e in entries)
    return DeviationReport(
        "ne", "rejected" if rejected else "accepted", mode, eps, threshold, grid, tuple(entries)
    )


def check_eps_achieve(
    game: Game,
    strategy: StrategyAutomaton,
    v: Fraction,
    eps: Fraction,
    grid: GridSpec = GridSpec(),
    mode: str = "exact",
    bounds: Sequence[int] | None = None,
    u: int | None = None,
    budget: int | None = None,
    jobs: int = 1,
) -> DeviationReport:
    """Check that ``strategy`` secures at least ``v - eps`` against grid opponents."""
    if not game.is_zero_sum():
        raise ValueError("guarantee checks need a two-player zero-sum game")
    eps = _check_epsilon(eps, mode)
    v = Fraction(v)
    threshold = eps if mode == "exact" else Fraction(7, 3) * eps
    target = None if mode == "exact" else eps / 3
    opp_bound = 1 if bounds is None else bounds[1]
    own_bound = strategy.memory_bound if bounds is None else bounds[0]
    candidates = list(grid_strategies(game, 1, opp_bound, grid, budget))
    base = StrategyProfile((strategy, candidates[0]), (own_bound, opp_bound))
    fn = partial(_evaluate, game, base, 1, 0, mode, target, u)
    values = _evaluate_all(fn, candidates, jobs)
    k = min(range(len(values)), key=lambda n: (values[n], n))
    used = None
    if mode == "float":
        used = u if u is not None else float_value_of_profile(
            game, base.replace(1, candidates[k]), 0, target
        )[1]
    entry = DeviationEntry(1, v, values[k], candidates[k], used)
    rejected = v - values[k] > threshold
    return DeviationReport(
        "achieve", "rejected" if rejected else "accepted", mode, eps, threshold, grid, (entry,)
    )


def perturbation_bound(n: int, delta: Fraction, c: Fraction) -> Fraction:
    """9 N delta C, the value change allowed for a relative perturbation delta."""
    delta = Fraction(delta)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta >= Fraction(1, 4 * n):
        raise ValueError("delta must be below 1/(4N)")
    return 9 * n * delta * Fraction(c)


def min_prob_threshold(u: int) -> Fraction:
    """1 / 2^(2^u): the smallest positive probability a u-bit represented strategy can use."""
    if u < 1:
        raise ValueError("precision must be at least 1")
    return Fraction(1, 1 << (1 << u))


def _dist_keys(a: dict, b: dict) -> set:
    return set(a) | set(b)


def strategy_rel_dist(s1: StrategyAutomaton, s2: StrategyAutomaton) -> Fraction | float:
    """Largest relative distance between matching probabilities of two strategies."""
    worst: Fraction | float = Fraction(0)
    for table1, table2 in ((s1.action_dist, s2.action_dist), (s1.update_dist, s2.update_dist)):
        for cell in set(table1) | set(table2):
            d1, d2 = table1.get(cell, {}), table2.get(cell, {})
            for key in _dist_keys(d1, d2):
                worst = max(worst, rel_dist(d1.get(key, 0), d2.get(key, 0)))
    return worst


def profile_rel_dist(p1: StrategyProfile, p2: StrategyProfile) -> Fraction | float:
    return max(strategy_rel_dist(a, b) for a, b in zip(p1.strategies, p2.strategies))


def round_strategy(strategy: StrategyAutomaton, u: int) -> StrategyAutomaton:
    """Round every distribution to precision u and keep its exact normalization."""

    def rounded(table):
        out = {}
        for cell, dist in table.items():
            keys = sorted(dist)
            probs = round_dist([dist[k] for k in keys], u).normalized()
            out[cell] = {k: p for k, p in zip(keys, probs) if p}
        return out

    return StrategyAutomaton(
        strategy.player,
        strategy.memory_bound,
        rounded(strategy.action_dist),
        rounded(strategy.update_dist),
        strategy.initial_memory,
    )


def respects_floor(strategy: StrategyAutomaton, u: int) -> bool:
    """Whether every positive probability is at least :func:`min_prob_threshold`."""
    floor = min_prob_threshold(u)
    return all(
        p >= floor
        for table in (strategy.action_dist, strategy.update_dist)
        for dist in table.values()
        for p in dist.values()
        if p > 0
    )
