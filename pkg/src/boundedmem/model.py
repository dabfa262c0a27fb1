"""Games with private signals, finite-memory strategies, and their JSON files.

Everything in this module is indexed from 0: states, actions, signals,
players and memory modes.  Names only appear in the JSON representation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Iterator, Mapping


class GameFormatError(ValueError):
    """A game, strategy or profile file is malformed or inconsistent."""


def parse_rational(value: Any) -> Fraction:
    """Read a rational from an int or a "num/den" string."""
    if isinstance(value, bool):
        raise GameFormatError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GameFormatError(f"not a rational: {value!r}") from exc
    raise GameFormatError(f"not a rational: {value!r}")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def dump_json(data: Any) -> str:
    """Deterministic JSON text used by every writer in the package."""
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def _load_json(data: bytes | str | Mapping) -> Any:
    if isinstance(data, Mapping):
        return data
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"malformed JSON: {exc}") from exc


@dataclass(frozen=True)
class Outcome:
    """One entry of a transition distribution."""

    probability: Fraction
    rewards: tuple[Fraction, ...]
    signals: tuple[int, ...]
    next_state: int


@dataclass(frozen=True)
class Game:
    """A finite k-player game in which players only see their own signals."""

    states: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    signals: tuple[tuple[str, ...], ...]
    initial_state: int
    initial_signals: tuple[int, ...]
    transitions: Mapping[tuple[int, tuple[int, ...]], tuple[Outcome, ...]]
    reward_bound: Fraction = field(init=False)

    def __post_init__(self) -> None:
        k = len(self.actions)
        if k < 1:
            raise GameFormatError("a game needs at least one player")
        if len(self.signals) != k:
            raise GameFormatError("signal alphabets do not match the player count")
        if not self.states:
            raise GameFormatError("a game needs at least one state")
        for i in range(k):
            if not self.actions[i]:
                raise GameFormatError(f"player {i} has no actions")
            if not self.signals[i]:
                raise GameFormatError(f"player {i} has no signals")
        if not 0 <= self.initial_state < len(self.states):
            raise GameFormatError("initial state out of range")
        if len(self.initial_signals) != k:
            raise GameFormatError("initial signals do not match the player count")
        for i, s in enumerate(self.initial_signals):
            if not 0 <= s < len(self.signals[i]):
                raise GameFormatError(f"initial signal of player {i} out of range")
        bound = Fraction(0)
        for v in range(len(self.states)):
            for a in self.action_profiles():
                row = self.transitions.get((v, a))
                if not row:
                    raise GameFormatError(
                        f"no transition for state {self.states[v]!r} and profile {a}"
                    )
                total = Fraction(0)
                for o in row:
                    if not 0 < o.probability <= 1:
                        raise GameFormatError("outcome probability outside (0, 1]")
                    if len(o.rewards) != k or len(o.signals) != k:
                        raise GameFormatError("reward or signal vector has the wrong length")
                    for i, s in enumerate(o.signals):
                        if not 0 <= s < len(self.signals[i]):
                            raise GameFormatError("signal index out of range")
                    if not 0 <= o.next_state < len(self.states):
                        raise GameFormatError("next state out of range")
                    total += o.probability
                    bound = max(bound, *(abs(r) for r in o.rewards))
                if total != 1:
                    raise GameFormatError(
                        f"row not stochastic: state {self.states[v]!r}, profile {a} sums to {total}"
                    )
        if len(self.transitions) != len(self.states) * self.profile_count():
            raise GameFormatError("transition keys outside the state and action space")
        object.__setattr__(self, "reward_bound", bound)

    @property
    def player_count(self) -> int:
        return len(self.actions)

    def profile_count(self) -> int:
        n = 1
        for acts in self.actions:
            n *= len(acts)
        return n

    def action_profiles(self) -> Iterator[tuple[int, ...]]:
        return product(*(range(len(a)) for a in self.actions))

    def is_zero_sum(self) -> bool:
        if self.player_count != 2:
            return False
        return all(
            o.rewards[0] == -o.rewards[1] for row in self.transitions.values() for o in row
        )


def parse_game(data: bytes | str | Mapping) -> Game:
    """Build a validated :class:`Game` from its JSON form."""
    raw = _load_json(data)
    try:
        k = int(raw["players"])
        states = tuple(str(s) for s in raw["states"])
        actions = tuple(tuple(str(a) for a in acts) for acts in raw["actions"])
        signals = tuple(tuple(str(s) for s in sigs) for sigs in raw["signals"])
        initial_name = str(raw["initial"])
        initial_signal_names = [str(s) for s in raw["initial_signals"]]
        rows = raw["transitions"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GameFormatError(f"missing or malformed field: {exc}") from exc
    if len(actions) != k or len(signals) != k:
        raise GameFormatError("player count does not match action or signal lists")
    for names, what in [(states, "state")] + [(a, "action") for a in actions] + [
        (s, "signal") for s in signals
    ]:
        if len(set(names)) != len(names):
            raise GameFormatError(f"duplicate {what} name")
    state_ix = {s: i for i, s in enumerate(states)}
    action_ix = [{a: j for j, a in enumerate(acts)} for acts in actions]
    signal_ix = [{s: j for j, s in enumerate(sigs)} for sigs in signals]

    def lookup(table: Mapping[str, int], name: Any, what: str) -> int:
        try:
            return table[str(name)]
        except KeyError:
            raise GameFormatError(f"unknown {what} {name!r}") from None

    if len(initial_signal_names) != k:
        raise GameFormatError("initial signals do not match the player count")
    initial = lookup(state_ix, initial_name, "state")
    initial_signals = tuple(
        lookup(signal_ix[i], s, "signal") for i, s in enumerate(initial_signal_names)
    )
    transitions: dict[tuple[int, tuple[int, ...]], tuple[Outcome, ...]] = {}
    for row in rows:
        try:
            v = lookup(state_ix, row["state"], "state")
            prof = row["profile"]
            outs = row["outcomes"]
        except (KeyError, TypeError) as exc:
            raise GameFormatError(f"malformed transition: {exc}") from exc
        if len(prof) != k:
            raise GameFormatError("action profile has the wrong length")
        a = tuple(lookup(action_ix[i], x, "action") for i, x in enumerate(prof))
        if (v, a) in transitions:
            raise GameFormatError(f"duplicate transition for {row['state']!r}, {prof}")
        outcomes = []
        for o in outs:
            try:
                rewards = tuple(parse_rational(r) for r in o["rewards"])
                sigs = o["signals"]
                nxt = lookup(state_ix, o["next"], "state")
                p = parse_rational(o["p"])
            except (KeyError, TypeError) as exc:
                raise GameFormatError(f"malformed outcome: {exc}") from exc
            if len(rewards) != k or len(sigs) != k:
                raise GameFormatError("reward or signal vector has the wrong length")
            sig = tuple(lookup(signal_ix[i], s, "signal") for i, s in enumerate(sigs))
            outcomes.append(Outcome(p, rewards, sig, nxt))
        transitions[(v, a)] = tuple(outcomes)
    return Game(states, actions, signals, initial, initial_signals, transitions)


def game_to_json(game: Game) -> dict:
    rows = []
    for v in range(len(game.states)):
        for a in game.action_profiles():
            rows.append(
                {
                    "state": game.states[v],
                    "profile": [game.actions[i][x] for i, x in enumerate(a)],
                    "outcomes": [
                        {
                            "p": format_rational(o.probability),
                            "rewards": [format_rational(r) for r in o.rewards],
                            "signals": [game.signals[i][s] for i, s in enumerate(o.signals)],
                            "next": game.states[o.next_state],
                        }
                        for o in game.transitions[(v, a)]
                    ],
                }
            )
    return {
        "players": game.player_count,
        "states": list(game.states),
        "initial": game.states[game.initial_state],
        "actions": [list(a) for a in game.actions],
        "signals": [list(s) for s in game.signals],
        "initial_signals": [game.signals[i][s] for i, s in enumerate(game.initial_signals)],
        "transitions": rows,
    }


def serialize_game(game: Game) -> str:
    return dump_json(game_to_json(game))


Dist = Mapping[int, Fraction]


@dataclass(frozen=True)
class StrategyAutomaton:
    """A randomized strategy with finitely many memory modes.

    ``action_dist[(m, s)]`` maps action indices to probabilities and
    ``update_dist[(m, s)]`` maps next memory modes to probabilities, where
    ``s`` is the signal just received.  Missing entries mean probability 0.
    Well-formedness is checked by :func:`validate_profile`, not here, so that
    broken inputs can be reported in full.
    """

    player: int
    memory_bound: int
    action_dist: Mapping[tuple[int, int], Dist]
    update_dist: Mapping[tuple[int, int], Dist]
    initial_memory: int = 0

    def action_prob(self, m: int, s: int, a: int) -> Fraction:
        return self.action_dist.get((m, s), {}).get(a, Fraction(0))

    def update_prob(self, m: int, s: int, m2: int) -> Fraction:
        return self.update_dist.get((m, s), {}).get(m2, Fraction(0))

    def action_support(self, m: int, s: int) -> list[tuple[int, Fraction]]:
        return sorted((a, p) for a, p in self.action_dist.get((m, s), {}).items() if p)

    def update_support(self, m: int, s: int) -> list[tuple[int, Fraction]]:
        return sorted((n, p) for n, p in self.update_dist.get((m, s), {}).items() if p)

    @classmethod
    def memoryless(
        cls, player: int, choice: Mapping[int, Dist]
    ) -> "StrategyAutomaton":
        """One memory mode; ``choice[s]`` is the action distribution on signal s."""
        acts = {(0, s): dict(d) for s, d in choice.items()}
        upd = {(0, s): {0: Fraction(1)} for s in choice}
        return cls(player, 1, acts, upd)

    @classmethod
    def uniform(cls, game: Game, player: int) -> "StrategyAutomaton":
        n = len(game.actions[player])
        return cls.memoryless(
            player,
            {s: {a: Fraction(1, n) for a in range(n)} for s in range(len(game.signals[player]))},
        )

    @classmethod
    def constant(cls, game: Game, player: int, action: int) -> "StrategyAutomaton":
        """Always play ``action``."""
        return cls.memoryless(
            player, {s: {action: Fraction(1)} for s in range(len(game.signals[player]))}
        )


@dataclass(frozen=True)
class StrategyProfile:
    strategies: tuple[StrategyAutomaton, ...]
    bounds: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.bounds is None:
            object.__setattr__(
                self, "bounds", tuple(s.memory_bound for s in self.strategies)
            )
        else:
            object.__setattr__(self, "bounds", tuple(self.bounds))

    def __len__(self) -> int:
        return len(self.strategies)

    def __getitem__(self, i: int) -> StrategyAutomaton:
        return self.strategies[i]

    def replace(self, i: int, strategy: StrategyAutomaton) -> "StrategyProfile":
        strategies = list(self.strategies)
        strategies[i] = strategy
        return StrategyProfile(tuple(strategies), self.bounds)


def _check_dist(dist: Dist, size: int, what: str, where: str, report: list[str]) -> None:
    total = Fraction(0)
    for key, p in dist.items():
        if not isinstance(key, int) or not 0 <= key < size:
            report.append(f"{where}: {what} out of range ({key!r})")
        if p < 0:
            report.append(f"{where}: negative probability {p}")
        total += p
    if total != 1:
        report.append(f"{where}: distribution sums to {total}")


def validate_profile(game: Game, profile: StrategyProfile) -> list[str]:
    """List every problem with ``profile`` as a profile for ``game``.

    An empty list means the profile is well formed.
    """
    report: list[str] = []
    k = game.player_count
    if len(profile.strategies) != k:
        report.append(f"profile has {len(profile.strategies)} strategies for {k} players")
    if len(profile.bounds) != len(profile.strategies):
        report.append("bounds do not match the number of strategies")
    for i, strat in enumerate(profile.strategies):
        tag = f"player {i}"
        if strat.player != i:
            report.append(f"{tag}: strategy is tagged for player {strat.player}")
        if i >= k:
            continue
        b = strat.memory_bound
        if b < 1:
            report.append(f"{tag}: memory bound must be positive")
            continue
        if i < len(profile.bounds) and b > profile.bounds[i]:
            report.append(f"{tag}: memory {b} exceeds bound {profile.bounds[i]}")
        if not 0 <= strat.initial_memory < b:
            report.append(f"{tag}: initial memory out of range")
        n_sig = len(game.signals[i])
        n_act = len(game.actions[i])
        for table, what in ((strat.action_dist, "action"), (strat.update_dist, "update")):
            for (m, s) in table:
                if not 0 <= m < b:
                    report.append(f"{tag}: {what} entry memory out of range ({m})")
                if not 0 <= s < n_sig:
                    report.append(f"{tag}: {what} entry signal out of range ({s})")
        for m in range(b):
            for s in range(n_sig):
                where = f"{tag}, memory {m}, signal {game.signals[i][s]!r}"
                acts = strat.action_dist.get((m, s))
                if acts is None:
                    report.append(f"{where}: missing action distribution")
                else:
                    _check_dist(acts, n_act, "action", where, report)
                upd = strat.update_dist.get((m, s))
                if upd is None:
                    report.append(f"{where}: missing memory update")
                else:
                    _check_dist(upd, b, "memory", where + " update", report)
    return report


def strategy_to_json(game: Game, strat: StrategyAutomaton) -> dict:
    i = strat.player
    sig = game.signals[i]
    act = game.actions[i]

    def block(table: Mapping[tuple[int, int], Dist], names) -> dict:
        out: dict[str, dict] = {}
        for (m, s) in sorted(table):
            dist = table[(m, s)]
            out.setdefault(str(m), {})[sig[s]] = {
                names(x): format_rational(p) for x, p in sorted(dist.items())
            }
        return out

    return {
        "player": i,
        "memory": strat.memory_bound,
        "initial_memory": strat.initial_memory,
        "action_dist": block(strat.action_dist, lambda a: act[a]),
        "update_dist": block(strat.update_dist, str),
    }


def strategy_from_json(game: Game, raw: Mapping) -> StrategyAutomaton:
    try:
        i = int(raw["player"])
        b = int(raw["memory"])
        m0 = int(raw.get("initial_memory", 0))
        acts_raw = raw["action_dist"]
        upd_raw = raw["update_dist"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GameFormatError(f"malformed strategy: {exc}") from exc
    if not 0 <= i < game.player_count:
        raise GameFormatError(f"strategy for unknown player {i}")
    sig_ix = {s: j for j, s in enumerate(game.signals[i])}
    act_ix = {a: j for j, a in enumerate(game.actions[i])}

    def block(table: Mapping, keyof) -> dict:
        out: dict[tuple[int, int], dict[int, Fraction]] = {}
        for m, per_signal in table.items():
            for s, dist in per_signal.items():
                if s not in sig_ix:
                    raise GameFormatError(f"unknown signal {s!r}")
                out[(int(m), sig_ix[s])] = {
                    keyof(x): parse_rational(p) for x, p in dist.items()
                }
        return out

    def action_key(name: str) -> int:
        if name not in act_ix:
            raise GameFormatError(f"unknown action {name!r}")
        return act_ix[name]

    try:
        acts = block(acts_raw, action_key)
        upd = block(upd_raw, int)
    except (AttributeError, ValueError) as exc:
        if isinstance(exc, GameFormatError):
            raise
        raise GameFormatError(f"malformed strategy table: {exc}") from exc
    return StrategyAutomaton(i, b, acts, upd, m0)


def profile_to_json(game: Game, profile: StrategyProfile) -> dict:
    return {
        "bounds": list(profile.bounds),
        "strategies": [strategy_to_json(game, s) for s in profile.strategies],
    }


def parse_profile(game: Game, data: bytes | str | Mapping) -> StrategyProfile:
    """Read a profile file, or a single strategy file for a one-player game."""
    raw = _load_json(data)
    if "strategies" not in raw:
        return StrategyProfile((strategy_from_json(game, raw),))
    strategies = tuple(strategy_from_json(game, s) for s in raw["strategies"])
    bounds = raw.get("bounds")
    return StrategyProfile(strategies, tuple(int(b) for b in bounds) if bounds else None)


def parse_strategy(game: Game, data: bytes | str | Mapping) -> StrategyAutomaton:
    return strategy_from_json(game, _load_json(data))


def serialize_profile(game: Game, profile: StrategyProfile) -> str:
    return dump_json(profile_to_json(game, profile))


def serialize_strategy(game: Game, strat: StrategyAutomaton) -> str:
    return dump_json(strategy_to_json(game, strat))


def is_simple(game: Game) -> bool:
    """Whether the game has the shape produced by the satisfiability reduction.

    One player; a uniform random first move onto the same successor set under
    every action; Dirac moves everywhere else; a graph that is acyclic apart
    from self-loops on absorbing states; and rewards that are 0 except for a
    constant 1 on the self-loops of target states.
    """
    if game.player_count != 1:
        return False
    n_states = len(game.states)
    init = game.initial_state
    successors: list[set[int]] = [set() for _ in range(n_states)]
    for (v, _a), row in game.transitions.items():
        for o in row:
            successors[v].add(o.next_state)
    absorbing = [successors[v] == {v} for v in range(n_states)]
    first_set = None
    for (v, _a), row in game.transitions.items():
        if v == init and not absorbing[v]:
            targets = [o.next_state for o in row]
            if len(set(targets)) != len(targets):
                return False
            if len({o.probability for o in row}) != 1:
                return False
            if first_set is None:
                first_set = set(targets)
            elif first_set != set(targets):
                return False
            if any(o.rewards[0] != 0 for o in row):
                return False
        elif len(row) != 1:
            return False
    for v in range(n_states):
        if v in successors[v] and not absorbing[v]:
            return False
    # Rewards: 0 off the target loops, and a constant 0 or 1 on each loop.
    for v in range(n_states):
        rewards = {o.rewards[0] for (w, _a), row in game.transitions.items() if w == v for o in row}
        if absorbing[v]:
            if len(rewards) != 1 or not rewards <= {Fraction(0), Fraction(1)}:
                return False
        elif rewards != {Fraction(0)}:
            return False
    # Acyclic once self-loops are ignored (iterative three-colour search).
    colour = [0] * n_states
    for root in range(n_states):
        if colour[root]:
            continue
        stack = [(root, iter(sorted(successors[root] - {root})))]
        colour[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[v] = 2
                stack.pop()
            elif colour[nxt] == 1:
                return False
            elif colour[nxt] == 0:
                colour[nxt] = 1
                stack.append((nxt, iter(sorted(successors[nxt] - {nxt}))))
    return True
