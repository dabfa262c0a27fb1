"""Markov chains with edge rewards and durations, and the chain induced by a profile.

Chain states are numbered from 1, and state 1 is the initial state.  Each edge
carries a probability together with the expected reward and expected duration
conditional on that edge being taken.

Numbers are either :class:`fractions.Fraction` (exact mode) or
:class:`~boundedmem.ufloat.UFloat` of one common precision (float mode).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Mapping, Sequence, Union

from .model import (
    Game,
    GameFormatError,
    StrategyProfile,
    _load_json,
    dump_json,
    format_rational,
    parse_rational,
    validate_profile,
)
from .ufloat import UFloat

Num = Union[Fraction, UFloat]
Label = tuple[int, tuple[int, ...], tuple[int, ...]]


class ChainError(ValueError):
    """A Markov chain violates its invariants."""


@dataclass(frozen=True)
class EdgeData:
    probability: Num
    reward: Num
    duration: Num


def _as_fraction(x: Num) -> Fraction:
    return x.to_fraction() if isinstance(x, UFloat) else x


@dataclass(frozen=True)
class MarkovChain:
    """A finite chain over states ``1..n``.

    ``removed`` lists states that an elimination step has taken out; they keep
    their number but have no edges.  ``reward_shift`` records a constant that
    was added to the per-step reward when the chain was converted to floats,
    and is subtracted again from the final value.
    """

    n: int
    edges: Mapping[tuple[int, int], EdgeData]
    labels: tuple[Label, ...] | None = None
    mode: str = "exact"
    removed: frozenset[int] = frozenset()
    reward_shift: Fraction = Fraction(0)
    _rows: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "removed", frozenset(self.removed))
        if self.n < 1:
            raise ChainError("a chain needs at least one state")
        if 1 in self.removed:
            raise ChainError("the initial state cannot be removed")
        if self.labels is not None and len(self.labels) != self.n:
            raise ChainError("label count does not match the chain size")
        u = self.precision
        rows: dict[int, dict[int, EdgeData]] = {i: {} for i in self.alive_states()}
        for (i, j), e in self.edges.items():
            if i not in rows or j not in rows:
                raise ChainError(f"edge ({i}, {j}) touches a missing state")
            for x in (e.probability, e.reward, e.duration):
                if u is None:
                    if not isinstance(x, Fraction):
                        raise ChainError("exact chains hold rationals only")
                elif not isinstance(x, UFloat) or x.u != u:
                    raise ChainError(f"float chains hold u={u} floats only")
            p = _as_fraction(e.probability)
            if not 0 < p <= 1:
                raise ChainError(f"edge ({i}, {j}) probability {p} outside (0, 1]")
            if not _as_fraction(e.duration) > 0:
                raise ChainError(f"edge ({i}, {j}) has a nonpositive duration")
            rows[i][j] = e
        for i, row in rows.items():
            if not row:
                raise ChainError(f"state {i} has no outgoing edge")
            total = sum((_as_fraction(e.probability) for e in row.values()), Fraction(0))
            if u is None:
                if total != 1:
                    raise ChainError(f"row {i} sums to {total}")
            else:
                slack = Fraction(len(row) * 4, 1 << u)
                if abs(total - 1) > slack:
                    raise ChainError(f"row {i} is not approximately normalized")
        object.__setattr__(self, "_rows", rows)

    @property
    def precision(self) -> int | None:
        """None for exact chains, otherwise the float precision."""
        if self.mode == "exact":
            return None
        if self.mode.startswith("float:"):
            return int(self.mode.split(":", 1)[1])
        raise ChainError(f"unknown chain mode {self.mode!r}")

    def alive_states(self) -> list[int]:
        return [i for i in range(1, self.n + 1) if i not in self.removed]

    def successors(self, i: int) -> dict[int, EdgeData]:
        return dict(self._rows[i])

    def rows(self) -> dict[int, dict[int, EdgeData]]:
        return {i: dict(r) for i, r in self._rows.items()}

    def is_absorbing(self, i: int) -> bool:
        return set(self._rows[i]) == {i}

    def edge(self, i: int, j: int) -> EdgeData | None:
        return self._rows.get(i, {}).get(j)

    def exactified(self) -> "MarkovChain":
        """The exact chain with every float replaced by its value and rows renormalized."""
        if self.mode == "exact":
            return self
        edges = {}
        for i, row in self._rows.items():
            total = sum((e.probability.to_fraction() for e in row.values()), Fraction(0))
            for j, e in row.items():
                edges[(i, j)] = EdgeData(
                    e.probability.to_fraction() / total,
                    e.reward.to_fraction() - self.reward_shift * e.duration.to_fraction(),
                    e.duration.to_fraction(),
                )
        return MarkovChain(self.n, edges, self.labels, "exact", self.removed)


def chain_from_rows(
    rows: Mapping[int, Mapping[int, tuple]], n: int | None = None
) -> MarkovChain:
    """Convenience builder: ``rows[i][j] = (p, r, d)`` with rational entries."""
    edges = {}
    for i, row in rows.items():
        for j, (p, r, d) in row.items():
            edges[(i, j)] = EdgeData(Fraction(p), Fraction(r), Fraction(d))
    if n is None:
        n = max([i for i in rows] + [j for row in rows.values() for j in row])
    return MarkovChain(n, edges)


def _num_to_json(x: Num) -> Any:
    return x.to_json() if isinstance(x, UFloat) else format_rational(x)


def _num_from_json(x: Any, u: int | None) -> Num:
    if u is None:
        return parse_rational(x)
    if not isinstance(x, Mapping):
        raise GameFormatError("float chains store numbers as mantissa/exponent objects")
    try:
        return UFloat.from_json(x)
    except ValueError as exc:
        raise GameFormatError(str(exc)) from exc


def chain_to_json(chain: MarkovChain) -> dict:
    out: dict[str, Any] = {"n": chain.n, "mode": chain.mode}
    if chain.removed:
        out["removed"] = sorted(chain.removed)
    if chain.reward_shift:
        out["shift"] = format_rational(chain.reward_shift)
    out["edges"] = [
        {
            "from": i,
            "to": j,
            "p": _num_to_json(e.probability),
            "r": _num_to_json(e.reward),
            "d": _num_to_json(e.duration),
        }
        for (i, j), e in sorted(chain.edges.items())
    ]
    if chain.labels is not None:
        out["labels"] = [[v, list(m), list(s)] for v, m, s in chain.labels]
    return out


def serialize_chain(chain: MarkovChain) -> str:
    return dump_json(chain_to_json(chain))


def parse_chain(data: bytes | str | Mapping) -> MarkovChain:
    raw = _load_json(data)
    try:
        n = int(raw["n"])
        mode = str(raw.get("mode", "exact"))
        edge_list = raw["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GameFormatError(f"malformed chain: {exc}") from exc
    if mode != "exact" and not (mode.startswith("float:") and mode[6:].isdigit()):
        raise GameFormatError(f"unknown chain mode {mode!r}")
    u = None if mode == "exact" else int(mode[6:])
    edges: dict[tuple[int, int], EdgeData] = {}
    for e in edge_list:
        try:
            key = (int(e["from"]), int(e["to"]))
            data = EdgeData(
                _num_from_json(e["p"], u), _num_from_json(e["r"], u), _num_from_json(e["d"], u)
            )
        except (KeyError, TypeError) as exc:
            raise GameFormatError(f"malformed edge: {exc}") from exc
        if key in edges:
            raise GameFormatError(f"duplicate edge {key}")
        edges[key] = data
    labels = None
    if "labels" in raw:
        labels = tuple((int(v), tuple(m), tuple(s)) for v, m, s in raw["labels"])
    try:
        return MarkovChain(
            n,
            edges,
            labels,
            mode,
            frozenset(int(x) for x in raw.get("removed", [])),
            parse_rational(raw.get("shift", 0)),
        )
    except ChainError as exc:
        raise GameFormatError(str(exc)) from exc


def n_bound(game: Game, bounds: Sequence[int]) -> int:
    """|S| times the product of signal-alphabet sizes times the product of bounds."""
    if len(bounds) != game.player_count:
        raise ValueError("one memory bound per player is needed")
    if any(b < 1 for b in bounds):
        raise ValueError("memory bounds must be positive")
    n = len(game.states)
    for sigs in game.signals:
        n *= len(sigs)
    for b in bounds:
        n *= b
    return n


def chain_state_space(game: Game, bounds: Sequence[int], initial_memory: Sequence[int]) -> list[Label]:
    """All (state, memories, signals) triples, with the initial triple first.

    The remaining triples follow in lexicographic order.  The chain built by
    :func:`induce` and the value formula both number states this way.
    """
    k = game.player_count
    start: Label = (game.initial_state, tuple(initial_memory), tuple(game.initial_signals))
    space: list[Label] = [start]
    for v in range(len(game.states)):
        for mems in product(*(range(bounds[i]) for i in range(k))):
            for sigs in product(*(range(len(game.signals[i])) for i in range(k))):
                label = (v, mems, sigs)
                if label != start:
                    space.append(label)
    return space


def induce(
    game: Game, profile: StrategyProfile, player: int, prune: bool = False
) -> MarkovChain:
    """The chain obtained by fixing every player's strategy.

    Edge rewards are those of ``player`` (0-based), conditioned on the edge.
    With ``prune`` only states reachable from the initial one are kept and
    renumbered in breadth-first order.
    """
    problems = validate_profile(game, profile)
    if problems:
        raise GameFormatError("invalid profile: " + "; ".join(problems))
    if not 0 <= player < game.player_count:
        raise GameFormatError(f"no player {player}")
    k = game.player_count
    strategies = profile.strategies
    bounds = [s.memory_bound for s in strategies]
    space = chain_state_space(game, bounds, [s.initial_memory for s in strategies])
    index = {label: n + 1 for n, label in enumerate(space)}

    # Per-player memory update tables cached as support lists.
    updates = [
        {(m, s): strategies[i].update_support(m, s) for m in range(bounds[i]) for s in range(len(game.signals[i]))}
        for i in range(k)
    ]

    one, zero = Fraction(1), Fraction(0)

    def out_edges(label: Label) -> dict[Label, list[Fraction]]:
        v, mems, sigs = label
        acc: dict[Label, list[Fraction]] = {}
        supports = [strategies[i].action_support(mems[i], sigs[i]) for i in range(k)]
        for choice in product(*supports):
            a = tuple(x for x, _ in choice)
            pa = one
            for _, p in choice:
                if p != one:
                    pa *= p
            for o in game.transitions[(v, a)]:
                base = pa * o.probability if o.probability != one else pa
                mem_options = [updates[i][(mems[i], o.signals[i])] for i in range(k)]
                reward = o.rewards[player]
                for mchoice in product(*mem_options):
                    p = base
                    for _, q in mchoice:
                        if q != one:
                            p *= q
                    target = (o.next_state, tuple(x for x, _ in mchoice), o.signals)
                    slot = acc.get(target)
                    if slot is None:
                        slot = acc[target] = [zero, zero]
                    slot[0] += p
                    if reward:
                        slot[1] += p * reward
        return acc

    if prune:
        order = [space[0]]
        seen = {space[0]}
        queue = deque(order)
        table: dict[Label, dict[Label, list[Fraction]]] = {}
        while queue:
            label = queue.popleft()
            table[label] = out_edges(label)
            for t in table[label]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
                    queue.append(t)
        space = order
        index = {label: n + 1 for n, label in enumerate(space)}
    else:
        table = {label: out_edges(label) for label in space}
    edges: dict[tuple[int, int], EdgeData] = {}
    for label in space:
        i = index[label]
        for t, (p, rsum) in table[label].items():
            edges[(i, index[t])] = EdgeData(p, rsum / p if rsum else zero, one)
    return MarkovChain(len(space), edges, tuple(space))
