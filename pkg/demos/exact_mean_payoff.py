"""Exact mean-payoff values of Markov chains with rewards and durations.

Walks through a small chain by hand, shows each elimination step, and
compares the result with the linear-algebra oracle.
"""

from __future__ import annotations

import random
from fractions import Fraction

from boundedmem import mp_value, oracle_value
from boundedmem.chain import chain_from_rows
from boundedmem.elimination import run_schedule
from boundedmem.generators import random_chain

# %% A chain that leaves state 1 towards two absorbing loops.
# State 2 pays 1 per unit of time, state 3 pays 2.
chain = chain_from_rows(
    {
        1: {2: (Fraction(1, 2), 0, 1), 3: (Fraction(1, 2), 0, 1)},
        2: {2: (1, 1, 1)},
        3: {3: (1, 4, 2)},
    }
)
print("value from state 1:", mp_value(chain))

# %% The schedule removes self-loops and states from the highest number down.
def show(step, work):
    print(f"  {step.kind:5} {step.state}: {step.op} {step.reason}".rstrip())

print("elimination schedule:")
run_schedule(chain, observer=show)

# %% With a transient self-loop the steps have real work to do.
busy = chain_from_rows(
    {
        1: {2: (Fraction(1, 2), 1, 1), 3: (Fraction(1, 2), 0, 1)},
        2: {2: (Fraction(1, 2), 2, 1), 1: (Fraction(1, 2), 0, 3)},
        3: {3: (1, 1, 1)},
    }
)
print("elimination schedule, chain with a transient loop:")
run_schedule(busy, observer=show)
print("value:", mp_value(busy), "oracle:", oracle_value(busy))

# %% A transient cycle: state 1 returns to itself before absorbing.
cyclic = chain_from_rows(
    {
        1: {1: (Fraction(1, 3), 3, 1), 2: (Fraction(2, 3), 0, 2)},
        2: {2: (1, 5, 4)},
    }
)
print("cyclic chain:", mp_value(cyclic), "oracle:", oracle_value(cyclic))

# %% Random chains agree with the oracle exactly.
rng = random.Random(0)
agree = sum(mp_value(c) == oracle_value(c) for c in (random_chain(rng) for _ in range(200)))
print(f"{agree}/200 random chains match the oracle")
