"""An independent mean-payoff solver built from graph search and linear algebra.

Bottom strongly connected components are found with Tarjan's algorithm.  For
each one the value is the expected reward over a first-return cycle at a
representative state divided by the expected duration of that cycle.
Absorption probabilities from state 1 weight the component values.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .chain import ChainError, MarkovChain


def solve_linear(matrix: list[list[Fraction]], rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve ``matrix @ X = rhs`` exactly by Gauss-Jordan elimination.

    ``rhs`` has one row per equation and any number of columns.
    """
    n = len(matrix)
    a = [list(matrix[r]) + list(rhs[r]) for r in range(n)]
    width = len(a[0]) if a else 0
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ArithmeticError("singular system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        row = a[col]
        for c in range(col, width):
            row[c] *= inv
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                target = a[r]
                for c in range(col, width):
                    if row[c]:
                        target[c] -= f * row[c]
    return [a[r][n:] for r in range(n)]


def strongly_connected_components(chain: MarkovChain) -> list[frozenset[int]]:
    """Tarjan's algorithm, iterative, over the chain's present states."""
    rows = chain.rows()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[frozenset[int]] = []
    counter = 0
    for root in sorted(rows):
        if root in index:
            continue
        work = [(root, iter(sorted(rows[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            w = next(it, None)
            if w is not None:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(rows[w]))))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.add(x)
                    if x == v:
                        break
                components.append(frozenset(comp))
    return components


def find_bsccs(chain: MarkovChain) -> list[frozenset[int]]:
    """Bottom SCCs, sorted by their smallest state."""
    rows = chain.rows()
    bottoms = [
        c for c in strongly_connected_components(chain)
        if all(j in c for i in c for j in rows[i])
    ]
    return sorted(bottoms, key=min)


def _require_exact(chain: MarkovChain) -> None:
    if chain.mode != "exact":
        raise ChainError("the oracle works on exact chains only")


def bscc_value(chain: MarkovChain, component: frozenset[int]) -> Fraction:
    """Cycle reward over cycle duration at the smallest state of a BSCC."""
    _require_exact(chain)
    rows = chain.rows()
    rep = min(component)
    others = sorted(component - {rep})
    pos = {s: k for k, s in enumerate(others)}
    # h(x) = expected reward/duration accumulated from x until first hitting rep.
    matrix = [[Fraction(0)] * len(others) for _ in others]
    rhs = [[Fraction(0), Fraction(0)] for _ in others]
    for x in others:
        r = pos[x]
        matrix[r][r] += 1
        for y, e in rows[x].items():
            rhs[r][0] += e.probability * e.reward
            rhs[r][1] += e.probability * e.duration
            if y != rep:
                matrix[r][pos[y]] -= e.probability
    h = solve_linear(matrix, rhs) if others else []
    reward = Fraction(0)
    duration = Fraction(0)
    for y, e in rows[rep].items():
        reward += e.probability * e.reward
        duration += e.probability * e.duration
        if y != rep:
            reward += e.probability * h[pos[y]][0]
            duration += e.probability * h[pos[y]][1]
    if duration == 0:
        raise ChainError("a recurrent cycle has zero expected duration")
    return reward / duration


def absorption_probabilities(
    chain: MarkovChain, components: Sequence[frozenset[int]], start: int = 1
) -> list[Fraction]:
    """Probability of ending in each component, starting from ``start``."""
    _require_exact(chain)
    for k, c in enumerate(components):
        if start in c:
            return [Fraction(int(j == k)) for j in range(len(components))]
    rows = chain.rows()
    owner = {s: k for k, c in enumerate(components) for s in c}
    transient = sorted(s for s in rows if s not in owner)
    pos = {s: k for k, s in enumerate(transient)}
    m = len(components)
    matrix = [[Fraction(0)] * len(transient) for _ in transient]
    rhs = [[Fraction(0)] * m for _ in transient]
    for x in transient:
        r = pos[x]
        matrix[r][r] += 1
        for y, e in rows[x].items():
            if y in owner:
                rhs[r][owner[y]] += e.probability
            else:
                matrix[r][pos[y]] -= e.probability
    sol = solve_linear(matrix, rhs)
    return sol[pos[start]]


def oracle_value(chain: MarkovChain, start: int = 1) -> Fraction:
    """Expected mean-payoff ratio from ``start``, computed without elimination."""
    _require_exact(chain)
    components = find_bsccs(chain)
    weights = absorption_probabilities(chain, components, start)
    return sum(
        (w * bscc_value(chain, c) for w, c in zip(weights, components) if w),
        Fraction(0),
    )
