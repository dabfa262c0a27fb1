"""Writing strategy and value questions as first-order real-arithmetic sentences.

The value constraints are checked here by replaying them on concrete
numbers; when z3 is installed the sentences are also handed to it.
"""

from __future__ import annotations

from fractions import Fraction

from boundedmem.chain import induce, n_bound
from boundedmem.elimination import mp_value
from boundedmem.encoding import (
    emit_achieve_sentence,
    emit_ne_sentence,
    emit_pow2,
    evaluate_val,
    sentence_variable_bound,
)
from boundedmem.formula import serialize_smt2, stats
from boundedmem.generators import matching_pennies
from boundedmem.model import StrategyAutomaton, StrategyProfile

game = matching_pennies()
profile = StrategyProfile(
    (StrategyAutomaton.uniform(game, 0), StrategyAutomaton.constant(game, 1, 0))
)

# %% The value constraints reproduce the exact solver.
print("encoded value:", evaluate_val(game, [1, 1], 0, profile))
print("solver value: ", mp_value(induce(game, profile, 0, prune=True)))

# %% Small powers of two are built by repeated squaring.
enc = emit_pow2(-5)
print("2^-5 via", len(enc.clauses) - 2, "squarings and one product")

# %% The equilibrium sentence and its size.
sentence = emit_ne_sentence(game, [1, 1], Fraction(1, 4))
s = stats(sentence)
print("NE sentence:", s.to_json())
print("variable bound:", sentence_variable_bound(game, [1, 1], n_bound(game, [1, 1])))
print(serialize_smt2(sentence).splitlines()[0], "...")

# %% Optional: ask z3.
try:
    import z3
except ImportError:
    print("z3 not installed; skipping the solver run")
else:
    for label, f in [
        ("NE at eps 1/4", sentence),
        ("guarantee 0", emit_achieve_sentence(game, [1, 1], Fraction(0), Fraction(0))),
        ("guarantee 1/2", emit_achieve_sentence(game, [1, 1], Fraction(1, 2), Fraction(0))),
    ]:
        solver = z3.Solver()
        solver.from_string(serialize_smt2(f))
        print(f"z3, {label}:", solver.check())
