"""Encoding strategies, values and equilibrium questions as real-arithmetic formulas.

``Strat`` constrains a block of variables to describe a strategy.
``Val`` mirrors the elimination schedule symbolically.  Every quantity of the
chain at every step gets its own variable:

* existence flag per edge (``x``), probability (``q``), expected duration
  (``n``) and expected reward (``r``);
* an existence flag per state.

Each variable is pinned by one :class:`Definition`: a disjunction of
branches, each giving the variable's value under a guard.  Substituting a
concrete profile and solving the definitions in order therefore replays the
elimination run and produces the value.

Edges that can never exist (no action and outcome produce them, and no
earlier composition could create them) are left out statically.  Quantities
that a step does not change are reused rather than copied.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .chain import chain_state_space
from .formula import (
    And,
    Cmp,
    Formula,
    ONE,
    Or,
    Term,
    Var,
    ZERO,
    add,
    conj,
    const,
    disj,
    eq,
    eval_term,
    evaluate,
    exists,
    forall,
    ge,
    gt,
    implies,
    lt,
    mul,
    sub,
    term_vars,
    le,
)
from .model import Game, StrategyAutomaton, StrategyProfile


class EncodingError(ValueError):
    pass


# -- strategies ---------------------------------------------------------------


@dataclass(frozen=True)
class StratFragment:
    """Variables and constraints describing one player's strategy."""

    player: int
    bound: int
    formula: Formula
    action_vars: Mapping[tuple[int, int, int], str]
    update_vars: Mapping[tuple[int, int, int], str]

    @property
    def variables(self) -> list[str]:
        return list(self.action_vars.values()) + list(self.update_vars.values())


def emit_strat(game: Game, player: int, bound: int, prefix: str = "x", tag_player: bool = True) -> StratFragment:
    """Probability variables for actions and memory updates of one player.

    Names are ``{prefix}{player}_a_m{m}_s{s}_{a}`` and
    ``{prefix}{player}_u_m{m}_s{s}_{m'}``; with ``tag_player`` off the player
    number is left out, so several players can share one variable pool.
    """
    if bound < 1:
        raise EncodingError("memory bound must be positive")
    tag = f"{prefix}{player}" if tag_player else prefix
    action_vars: dict[tuple[int, int, int], str] = {}
    update_vars: dict[tuple[int, int, int], str] = {}
    clauses = []
    for m in range(bound):
        for s in range(len(game.signals[player])):
            block = []
            for a in range(len(game.actions[player])):
                name = f"{tag}_a_m{m}_s{s}_{a}"
                action_vars[(m, s, a)] = name
                block.append(Var(name))
            clauses += [c for v in block for c in (le(0, v), le(v, 1))]
            clauses.append(eq(add(*block), 1))
            block = []
            for m2 in range(bound):
                name = f"{tag}_u_m{m}_s{s}_{m2}"
                update_vars[(m, s, m2)] = name
                block.append(Var(name))
            clauses += [c for v in block for c in (le(0, v), le(v, 1))]
            clauses.append(eq(add(*block), 1))
    return StratFragment(player, bound, conj(*clauses), action_vars, update_vars)


def strategy_assignment(fragment: StratFragment, strategy: StrategyAutomaton) -> dict[str, Fraction]:
    """Values of the fragment's variables describing ``strategy``."""
    if strategy.memory_bound != fragment.bound:
        raise EncodingError("strategy memory differs from the fragment's bound")
    env = {}
    for (m, s, a), name in fragment.action_vars.items():
        env[name] = strategy.action_prob(m, s, a)
    for (m, s, m2), name in fragment.update_vars.items():
        env[name] = strategy.update_prob(m, s, m2)
    return env


def decode_strategy(fragment: StratFragment, env: Mapping[str, Fraction]) -> StrategyAutomaton:
    acts: dict[tuple[int, int], dict[int, Fraction]] = defaultdict(dict)
    upd: dict[tuple[int, int], dict[int, Fraction]] = defaultdict(dict)
    for (m, s, a), name in fragment.action_vars.items():
        if env[name]:
            acts[(m, s)][a] = Fraction(env[name])
        else:
            acts[(m, s)]
    for (m, s, m2), name in fragment.update_vars.items():
        if env[name]:
            upd[(m, s)][m2] = Fraction(env[name])
        else:
            upd[(m, s)]
    return StrategyAutomaton(fragment.player, fragment.bound, dict(acts), dict(upd))


# -- values ---------------------------------------------------------------------


@dataclass(frozen=True)
class Definition:
    """``formula`` is a disjunction of guarded branches fixing ``target``."""

    target: str
    formula: Formula


@dataclass(frozen=True)
class ValFragment:
    player: int
    output: str
    n_states: int
    definitions: tuple[Definition, ...]
    inputs: tuple[str, ...]
    aux: tuple[str, ...]

    @property
    def formula(self) -> Formula:
        return conj(*(d.formula for d in self.definitions))


class _Builder:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.defs: list[Definition] = []
        self.aux: list[str] = []

    def fresh(self, name: str) -> Var:
        full = f"{self.prefix}_{name}"
        self.aux.append(full)
        return Var(full)

    def define(self, var: Var, *branches: Formula) -> None:
        self.defs.append(Definition(var.name, disj(*branches)))


def emit_val(
    game: Game,
    bounds: Sequence[int],
    player: int,
    strats: Sequence[StratFragment] | None = None,
    prefix: str = "c",
    output: str = "y",
) -> ValFragment:
    """Constraints whose unique solution for a given profile puts its value in ``output``.

    The chain states are those of :func:`~boundedmem.chain.chain_state_space`
    with every player starting in memory mode 0.
    """
    k = game.player_count
    if strats is None:
        strats = [emit_strat(game, i, bounds[i]) for i in range(k)]
    if [s.bound for s in strats] != list(bounds):
        raise EncodingError("strategy fragments do not match the bounds")
    space = chain_state_space(game, bounds, [0] * k)
    index = {label: n + 1 for n, label in enumerate(space)}
    n_states = len(space)
    b = _Builder(prefix)
    states = range(1, n_states + 1)
    absent = (ZERO, ZERO, ONE, ZERO)
    edge: dict[tuple[int, int], tuple[Term, Term, Term, Term]] = {}

    # Initial values: probability and reward of every edge as polynomials.
    for S, (v, mems, sigs) in enumerate(space, start=1):
        terms: dict[int, list[tuple[Fraction, Fraction, list[Term]]]] = defaultdict(list)
        for a in game.action_profiles():
            act_factors = [Var(strats[i].action_vars[(mems[i], sigs[i], a[i])]) for i in range(k)]
            grouped: dict[tuple, list[Fraction]] = {}
            for o in game.transitions[(v, a)]:
                slot = grouped.setdefault((o.signals, o.next_state), [Fraction(0), Fraction(0)])
                slot[0] += o.probability
                slot[1] += o.probability * o.rewards[player]
            for (sig2, v2), (p, r) in grouped.items():
                for mem2 in product(*(range(bounds[i]) for i in range(k))):
                    upd_factors = [
                        Var(strats[i].update_vars[(mems[i], sig2[i], mem2[i])]) for i in range(k)
                    ]
                    T = index[(v2, mem2, sig2)]
                    terms[T].append((p, r, act_factors + upd_factors))
        for T in states:
            if T not in terms:
                edge[(S, T)] = absent
                continue
            q_poly = add(*(mul(const(p), *f) for p, _, f in terms[T]))
            r_poly = add(*(mul(const(r), *f) for _, r, f in terms[T] if r))
            x, q, r = b.fresh(f"x{S}_{T}_0"), b.fresh(f"q{S}_{T}_0"), b.fresh(f"r{S}_{T}_0")
            b.define(q, eq(q, q_poly))
            b.define(x, conj(eq(x, 1), gt(q, 0)), conj(eq(x, 0), eq(q, 0)))
            b.define(r, conj(eq(x, 1), eq(mul(r, q), r_poly)), conj(eq(x, 0), eq(r, 0)))
            edge[(S, T)] = (x, q, ONE, r)

    present = {S: ONE for S in states}
    step = 0

    def loop_step(v: int) -> None:
        xvv, qvv, nvv, rvv = edge[(v, v)]
        others = [T for T in states if T != v and edge[(v, T)][0] != ZERO]
        if xvv == ZERO or not others:
            return
        x_new = b.fresh(f"x{v}_{v}_{step}")
        out_sum = add(*(edge[(v, T)][0] for T in others))
        b.define(x_new, conj(eq(x_new, 0), gt(out_sum, 0)), conj(eq(x_new, 1), eq(out_sum, 0)))
        go = conj(eq(xvv, 1), eq(x_new, 0))
        stay = disj(eq(xvv, 0), eq(x_new, 1))
        rest = sub(1, qvv)
        for T in others:
            x, q, n, r = edge[(v, T)]
            q2 = b.fresh(f"q{v}_{T}_{step}")
            n2 = b.fresh(f"n{v}_{T}_{step}")
            r2 = b.fresh(f"r{v}_{T}_{step}")
            b.define(q2, conj(go, eq(mul(q2, rest), q)), conj(stay, eq(q2, q)))
            b.define(
                n2,
                conj(go, eq(mul(n2, rest), add(mul(qvv, nvv), mul(n, rest)))),
                conj(stay, eq(n2, n)),
            )
            b.define(
                r2,
                conj(go, eq(mul(r2, rest), add(mul(qvv, rvv), mul(r, rest)))),
                conj(stay, eq(r2, r)),
            )
            edge[(v, T)] = (x, q2, n2, r2)
        edge[(v, v)] = (x_new, qvv, nvv, rvv)

    def state_step(v: int) -> None:
        incoming = [S for S in states if S != v and edge[(S, v)][0] != ZERO]
        outgoing = [T for T in states if T != v and edge[(v, T)][0] != ZERO]
        if not incoming:
            # Nothing can enter v, so it is removed.
            present[v] = ZERO
            return
        x_new = b.fresh(f"e{v}_{step}")
        in_sum = add(*(edge[(S, v)][0] for S in incoming))
        out_sum = add(*(edge[(v, T)][0] for T in outgoing))
        b.define(
            x_new,
            conj(eq(x_new, 1), gt(in_sum, 0), eq(out_sum, 0)),
            conj(eq(x_new, 0), disj(eq(in_sum, 0), gt(out_sum, 0))),
        )
        present[v] = x_new
        go = eq(x_new, 0)
        stay = eq(x_new, 1)
        # Rows of states above v can no longer point at v: those states are
        # either gone or absorbing.  Only rows below v change.
        lower = [S for S in incoming if S < v]
        for S in lower:
            xa, qa, na, ra = edge[(S, v)]
            for T in outgoing:
                x, q, n, r = edge[(S, T)]
                xb, qb, nb, rb = edge[(v, T)]
                both = eq(add(xa, xb), 2)
                one_missing = lt(add(xa, xb), 2)
                via_q = mul(qa, qb)
                x2 = b.fresh(f"x{S}_{T}_{step}")
                q2 = b.fresh(f"q{S}_{T}_{step}")
                n2 = b.fresh(f"n{S}_{T}_{step}")
                r2 = b.fresh(f"r{S}_{T}_{step}")
                if x == ZERO:
                    b.define(x2, conj(stay, eq(x2, 0)), conj(go, eq(x2, 1), both), conj(go, eq(x2, 0), one_missing))
                    b.define(q2, conj(go, both, eq(q2, via_q)), conj(go, one_missing, eq(q2, 0)), conj(stay, eq(q2, 0)))
                    for new, old, pa, pb in ((n2, n, na, nb), (r2, r, ra, rb)):
                        b.define(
                            new,
                            conj(go, both, eq(new, add(pa, pb))),
                            conj(go, one_missing, eq(new, old)),
                            conj(stay, eq(new, old)),
                        )
                else:
                    b.define(
                        x2,
                        conj(stay, eq(x2, x)),
                        conj(go, eq(x2, 1), disj(eq(x, 1), both)),
                        conj(go, eq(x2, 0), eq(x, 0), one_missing),
                    )
                    b.define(
                        q2,
                        conj(go, both, eq(x, 1), eq(q2, add(q, via_q))),
                        conj(go, one_missing, eq(q2, q)),
                        conj(go, both, eq(x, 0), eq(q2, via_q)),
                        conj(stay, eq(q2, q)),
                    )
                    for new, old, pa, pb in ((n2, n, na, nb), (r2, r, ra, rb)):
                        b.define(
                            new,
                            conj(
                                go,
                                both,
                                eq(x, 1),
                                eq(mul(new, add(q, via_q)), add(mul(old, q), mul(via_q, add(pa, pb)))),
                            ),
                            conj(go, one_missing, eq(new, old)),
                            conj(go, both, eq(x, 0), eq(new, add(pa, pb))),
                            conj(stay, eq(new, old)),
                        )
                edge[(S, T)] = (x2, q2, n2, r2)
        # Edges into v disappear with it.  Its own row is never read again.
        for S in lower:
            x, q, n, r = edge[(S, v)]
            x2 = b.fresh(f"x{S}_{v}_{step}")
            b.define(x2, conj(stay, eq(x2, x)), conj(go, eq(x2, 0)))
            edge[(S, v)] = (x2, q, n, r)

    for v in range(n_states, 1, -1):
        step += 1
        loop_step(v)
        step += 1
        state_step(v)
    step += 1
    loop_step(1)

    values: dict[int, Term] = {}
    for s in range(2, n_states + 1):
        if present[s] == ZERO:
            values[s] = ZERO
            continue
        vs = b.fresh(f"v{s}")
        xss, qss, nss, rss = edge[(s, s)]
        b.define(vs, conj(eq(present[s], 1), eq(mul(vs, nss), rss)), conj(eq(present[s], 0), eq(vs, 0)))
        values[s] = vs
    y = Var(output)
    x11, q11, n11, r11 = edge[(1, 1)]
    spread = add(
        *(
            mul(edge[(1, s)][0], edge[(1, s)][1], values[s])
            for s in range(2, n_states + 1)
            if edge[(1, s)][0] != ZERO and values[s] != ZERO
        )
    )
    if x11 == ZERO:
        b.define(y, eq(y, spread))
    else:
        b.define(y, conj(eq(x11, 1), eq(mul(y, n11), r11)), conj(eq(x11, 0), eq(y, spread)))
    inputs = tuple(name for s in strats for name in s.variables)
    return ValFragment(player, output, n_states, tuple(b.defs), inputs, tuple(b.aux))


def solve_definitions(fragment: ValFragment, env: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Replay the definitions on concrete inputs; each must fix its target uniquely."""
    env = dict(env)
    for d in fragment.definitions:
        branches = d.formula.args if isinstance(d.formula, Or) else (d.formula,)
        found: set[Fraction] = set()
        for branch in branches:
            items = branch.args if isinstance(branch, And) else (branch,)
            guards, equations = [], []
            for item in items:
                names = set()
                for a in _atoms_of(item):
                    names.update(term_vars(a.lhs))
                    names.update(term_vars(a.rhs))
                (equations if d.target in names else guards).append(item)
            if not all(evaluate(g, env) for g in guards):
                continue
            value = None
            for item in equations:
                if isinstance(item, Cmp) and item.op == "=":
                    f0 = _residual(item, env, d.target, Fraction(0))
                    f1 = _residual(item, env, d.target, Fraction(1))
                    if f1 != f0:
                        value = -f0 / (f1 - f0)
                        break
            if value is None:
                raise EncodingError(f"branch for {d.target} does not determine it")
            trial = dict(env)
            trial[d.target] = value
            if all(evaluate(e, trial) for e in equations):
                found.add(value)
        if len(found) != 1:
            raise EncodingError(f"{d.target} has {len(found)} consistent values")
        env[d.target] = found.pop()
    return env


def _atoms_of(f: Formula):
    from .formula import atoms

    return atoms(f)


def _residual(atom: Cmp, env: Mapping[str, Fraction], target: str, t: Fraction) -> Fraction:
    trial = dict(env)
    trial[target] = t
    return eval_term(atom.lhs, trial) - eval_term(atom.rhs, trial)


def evaluate_val(
    game: Game, bounds: Sequence[int], player: int, profile: StrategyProfile
) -> Fraction:
    """Value obtained by replaying ``emit_val`` on the numbers of ``profile``."""
    strats = [emit_strat(game, i, bounds[i]) for i in range(game.player_count)]
    frag = emit_val(game, bounds, player, strats)
    env: dict[str, Fraction] = {}
    for frag_i, strat in zip(strats, profile.strategies):
        if strat.initial_memory != 0:
            raise EncodingError("the encoding starts every strategy in memory mode 0")
        env.update(strategy_assignment(frag_i, strat))
    return solve_definitions(frag, env)[frag.output]


# -- constants and sentences ------------------------------------------------------


@dataclass(frozen=True)
class Pow2Encoding:
    variables: tuple[str, ...]
    clauses: tuple[Formula, ...]
    result: str


def emit_pow2(e: int, prefix: str = "p") -> Pow2Encoding:
    """Variables and clauses whose solution sets ``result`` to ``2**e`` (e < 0).

    ``v1 = 1/2`` and ``v(l+1) = v(l)^2``, so ``v(l) = 2^-(2^(l-1))``; the
    result is the product of the ``v(l)`` for the set bits of ``-e``.
    """
    if e >= 0:
        raise EncodingError("the exponent must be negative")
    mag = -e
    length = mag.bit_length()
    names = [f"{prefix}_v{l}" for l in range(1, length + 1)]
    clauses: list[Formula] = [eq(Var(names[0]), const(Fraction(1, 2)))]
    for l in range(1, length):
        clauses.append(eq(Var(names[l]), mul(Var(names[l - 1]), Var(names[l - 1]))))
    result = f"{prefix}_r"
    factors = [Var(names[p]) for p in range(length) if mag >> p & 1]
    clauses.append(eq(Var(result), mul(*factors)))
    return Pow2Encoding(tuple(names) + (result,), tuple(clauses), result)


def encode_constant(c: Fraction, prefix: str) -> tuple[Term, tuple[str, ...], tuple[Formula, ...]]:
    """A term for ``c``; dyadic non-integers go through :func:`emit_pow2`."""
    c = Fraction(c)
    den = c.denominator
    if den == 1 or den & (den - 1):
        return const(c), (), ()
    enc = emit_pow2(-(den.bit_length() - 1), prefix)
    return mul(const(c.numerator), Var(enc.result)), enc.variables, enc.clauses


def _ordered_union(*groups: Sequence[str]) -> list[str]:
    return list(dict.fromkeys(name for g in groups for name in g))


def emit_ne_sentence(game: Game, bounds: Sequence[int], eps: Fraction) -> Formula:
    """True iff some profile of bounded strategies is an eps-Nash equilibrium.

    Profile variables and the claimed values ``y_i`` are existential.  The
    deviation variables (one pool reused for every player), the candidate
    value ``yp`` and all auxiliary value variables are universal.  The matrix
    states that each ``y_i`` is the value of the profile and that no
    deviation yields more than ``y_i + eps``.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise EncodingError("epsilon must be nonnegative")
    k = game.player_count
    strats = [emit_strat(game, i, bounds[i], "x") for i in range(k)]
    devs = [emit_strat(game, i, bounds[i], "d", tag_player=False) for i in range(k)]
    eps_term, eps_vars, eps_clauses = encode_constant(eps, "eps")
    ys = [Var(f"y{i}") for i in range(k)]
    yp = "yp"
    pins, guards, aux = [], [], []
    for i in range(k):
        val = emit_val(game, bounds, i, strats, "c", yp)
        pins.append(implies(val.formula, eq(ys[i], Var(yp))))
        aux.append(val.aux)
        mixed = list(strats)
        mixed[i] = devs[i]
        dev_val = emit_val(game, bounds, i, mixed, "c", yp)
        guards.append(implies(conj(devs[i].formula, dev_val.formula), ge(add(ys[i], eps_term), Var(yp))))
        aux.append(dev_val.aux)
    matrix = conj(*(s.formula for s in strats), *eps_clauses, *pins, *guards)
    outer = _ordered_union(*(s.variables for s in strats), [y.name for y in ys], eps_vars)
    inner = _ordered_union(*(d.variables for d in devs), [yp], *aux)
    return exists(outer, forall(inner, matrix))


def emit_achieve_sentence(game: Game, bounds: Sequence[int], v: Fraction, eps: Fraction) -> Formula:
    """True iff player 0 has a bounded strategy securing at least ``v - eps``."""
    if not game.is_zero_sum():
        raise EncodingError("the guarantee sentence needs a two-player zero-sum game")
    eps = Fraction(eps)
    if eps < 0:
        raise EncodingError("epsilon must be nonnegative")
    own = emit_strat(game, 0, bounds[0], "x")
    opp = emit_strat(game, 1, bounds[1], "x")
    v_term, v_vars, v_clauses = encode_constant(Fraction(v), "tv")
    e_term, e_vars, e_clauses = encode_constant(eps, "eps")
    val = emit_val(game, bounds, 0, [own, opp], "c", "y")
    matrix = conj(
        own.formula,
        *v_clauses,
        *e_clauses,
        implies(conj(opp.formula, val.formula), ge(Var("y"), sub(v_term, e_term))),
    )
    outer = _ordered_union(own.variables, v_vars, e_vars)
    inner = _ordered_union(opp.variables, ["y"], val.aux)
    return exists(outer, forall(inner, matrix))


def val_variable_bound(n: int) -> int:
    return 8 * n**3 + 3 * n


def val_polynomial_bound(n: int) -> int:
    return 100 * n**3 + 40 * n


def sentence_variable_bound(game: Game, bounds: Sequence[int], n: int) -> int:
    """(k+1) + k * (|Sigma| prod b) * (|A| + sum b) + 8N^3 + 3N.

    |Sigma| and |A| are the largest per-player signal and action counts.
    """
    k = game.player_count
    sig = max(len(s) for s in game.signals)
    act = max(len(a) for a in game.actions)
    prod_b = 1
    for b in bounds:
        prod_b *= b
    return (k + 1) + k * (sig * prod_b) * (act + sum(bounds)) + val_variable_bound(n)
