"""Mean-payoff value of a chain by loop and state elimination.

The schedule visits states N, N-1, ..., 2.  Each visit first removes the
state's self-loop (folding the expected number of loop iterations into its
other edges) and then bypasses the state by composing its incoming and
outgoing edges.  A last loop elimination on state 1 leaves either a single
self-loop there or a one-step distribution over absorbing states.

The engine is written against a small arithmetic interface so the same code
runs on exact rationals and on rounded floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .chain import ChainError, EdgeData, MarkovChain


class ExactArith:
    """Rational arithmetic; rounding hooks are identities."""

    name = "exact"

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def div(self, x, y):
        return x / y

    def total(self, xs):
        return sum(xs, Fraction(0))

    def normalize(self, xs):
        s = sum(xs, Fraction(0))
        return [x / s for x in xs]

    def renormalize(self, xs):
        # Exact rows already sum to 1 after a state step.
        return list(xs)

    def ratio(self, x):
        return x


EXACT = ExactArith()


def collapse_edges(edges: Sequence[EdgeData], arith=EXACT) -> EdgeData:
    """Merge parallel edges into one, averaging reward and duration by probability."""
    if not edges:
        raise ValueError("no edges to collapse")
    if len(edges) == 1:
        return edges[0]
    p = arith.total([e.probability for e in edges])
    r = arith.total([arith.mul(e.probability, e.reward) for e in edges])
    d = arith.total([arith.mul(e.probability, e.duration) for e in edges])
    return EdgeData(p, arith.div(r, p), arith.div(d, p))


@dataclass(frozen=True)
class TraceStep:
    """One event of the schedule.

    ``kind`` is "loop", "state" or "skip"; for skips ``op`` names the step
    that was not applied and ``reason`` says why.
    """

    kind: str
    state: int
    op: str
    reason: str = ""
    before: MarkovChain | None = None
    after: MarkovChain | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "state": self.state, "op": self.op}
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass
class EliminationTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


class _Work:
    """Mutable successor and predecessor maps for one run."""

    def __init__(self, chain: MarkovChain):
        self.n = chain.n
        self.mode = chain.mode
        self.labels = chain.labels
        self.shift = chain.reward_shift
        self.removed = set(chain.removed)
        self.succ = chain.rows()
        self.pred: dict[int, set[int]] = {i: set() for i in self.succ}
        for i, row in self.succ.items():
            for j in row:
                self.pred[j].add(i)

    def freeze(self) -> MarkovChain:
        edges = {(i, j): e for i, row in self.succ.items() for j, e in row.items()}
        return MarkovChain(
            self.n, edges, self.labels, self.mode, frozenset(self.removed), self.shift
        )

    def check_state(self, n: int) -> None:
        if not 1 <= n <= self.n:
            raise ChainError(f"state {n} out of range 1..{self.n}")
        if n in self.removed:
            raise ChainError(f"state {n} was already eliminated")


def _loop_step(work: _Work, n: int, arith) -> TraceStep:
    work.check_state(n)
    row = work.succ[n]
    if n not in row:
        return TraceStep("skip", n, "loop", "no self-loop")
    if len(row) == 1:
        return TraceStep("skip", n, "loop", "absorbing")
    loop = row.pop(n)
    work.pred[n].discard(n)
    targets = list(row)
    probs = [row[j].probability for j in targets]
    stay = arith.div(loop.probability, arith.total(probs))
    extra_r = arith.mul(stay, loop.reward)
    extra_d = arith.mul(stay, loop.duration)
    for j, p in zip(targets, arith.normalize(probs)):
        e = row[j]
        row[j] = EdgeData(p, arith.add(e.reward, extra_r), arith.add(e.duration, extra_d))
    return TraceStep("loop", n, "loop")


def _state_step(work: _Work, n: int, arith) -> TraceStep:
    work.check_state(n)
    if n == 1:
        raise ChainError("the initial state cannot be eliminated")
    row = work.succ[n]
    incoming = work.pred[n] - {n}
    if n in row:
        if len(row) > 1:
            raise ChainError(f"state {n} has a self-loop; eliminate it first")
        if incoming:
            return TraceStep("skip", n, "state", "absorbing with incoming edges")
    for i in sorted(incoming):
        e_in = work.succ[i].pop(n)
        target_row = work.succ[i]
        for j, e_out in row.items():
            via = EdgeData(
                arith.mul(e_in.probability, e_out.probability),
                arith.add(e_in.reward, e_out.reward),
                arith.add(e_in.duration, e_out.duration),
            )
            old = target_row.get(j)
            target_row[j] = via if old is None else collapse_edges([old, via], arith)
            work.pred[j].add(i)
        keys = list(target_row)
        fresh = arith.renormalize([target_row[j].probability for j in keys])
        for j, p in zip(keys, fresh):
            e = target_row[j]
            target_row[j] = EdgeData(p, e.reward, e.duration)
    for j in row:
        work.pred[j].discard(n)
    del work.succ[n]
    del work.pred[n]
    work.removed.add(n)
    return TraceStep("state", n, "state")


def eliminate_loop(chain: MarkovChain, n: int, arith=EXACT) -> MarkovChain:
    """Remove the self-loop of ``n`` if it has one and another successor."""
    work = _Work(chain)
    _loop_step(work, n, arith)
    return work.freeze()


def eliminate_state(chain: MarkovChain, n: int, arith=EXACT) -> MarkovChain:
    """Bypass the loop-free state ``n``; absorbing states with incoming edges stay."""
    work = _Work(chain)
    _state_step(work, n, arith)
    return work.freeze()


def run_schedule(
    chain: MarkovChain,
    arith=EXACT,
    snapshots: bool = False,
    observer: Callable[[TraceStep, _Work], None] | None = None,
) -> tuple[MarkovChain, EliminationTrace]:
    """Apply the full elimination schedule and return the final chain."""
    work = _Work(chain)
    trace = EliminationTrace()

    def record(step_fn, x):
        before = work.freeze() if snapshots else None
        step = step_fn(work, x, arith)
        if snapshots:
            step = TraceStep(step.kind, step.state, step.op, step.reason, before, work.freeze())
        trace.steps.append(step)
        if observer is not None:
            observer(step, work)

    for x in range(work.n, 1, -1):
        if x in work.removed:
            trace.steps.append(TraceStep("skip", x, "loop", "not present"))
            continue
        record(_loop_step, x)
        record(_state_step, x)
    record(_loop_step, 1)
    return work.freeze(), trace


def final_value(chain: MarkovChain, arith=EXACT):
    """Read the value off a fully eliminated chain (in the chain's arithmetic)."""
    row = chain.successors(1)
    if 1 in row:
        if len(row) != 1:
            raise ChainError("state 1 still has a loop and other successors")
        e = row[1]
        return arith.div(e.reward, e.duration)
    weights, parts = [], []
    for j, e in sorted(row.items()):
        if not chain.is_absorbing(j):
            raise ChainError(f"state {j} is neither eliminated nor absorbing")
        loop = chain.edge(j, j)
        weights.append(e.probability)
        parts.append(arith.mul(e.probability, arith.div(loop.reward, loop.duration)))
    return arith.div(arith.total(parts), arith.total(weights))


def mp_value(chain: MarkovChain) -> Fraction:
    """Expected mean-payoff ratio from state 1 of an exact chain."""
    if chain.mode != "exact":
        raise ChainError("mp_value needs an exact chain")
    final, _ = run_schedule(chain)
    return final_value(final)


def mp_value_with_trace(chain: MarkovChain) -> tuple[Fraction, EliminationTrace]:
    if chain.mode != "exact":
        raise ChainError("mp_value needs an exact chain")
    final, trace = run_schedule(chain)
    return final_value(final), trace
