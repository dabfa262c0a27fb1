"""The elimination schedule run in rounded floating point, with an error certificate.

Rewards are first shifted so that every per-step reward is at least 1: each
edge reward becomes ``r + c*d`` for a constant ``c``, which raises the
mean-payoff ratio by exactly ``c``.  The shift is subtracted from the result
in exact arithmetic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .chain import ChainError, EdgeData, MarkovChain
from .elimination import final_value, run_schedule
from .ufloat import (
    UFloat,
    add_u,
    div_u,
    mul_u,
    normalize_dist,
    round_to,
    sum_u,
)


class FloatArith:
    """Rounded arithmetic at one precision, for the elimination engine."""

    name = "float"

    def __init__(self, u: int):
        self.u = u

    def add(self, x, y):
        return add_u(x, y)

    def mul(self, x, y):
        return mul_u(x, y)

    def div(self, x, y):
        return div_u(x, y)

    def total(self, xs):
        return sum_u(xs, self.u)

    def normalize(self, xs):
        return list(normalize_dist(list(xs)).entries)

    renormalize = normalize


class CertificateWarning(UserWarning):
    """The precision is below the level at which the error bound is proven."""


def certificate_floor(n: int) -> int:
    """Smallest precision for which the drift bound is claimed: 1000 N^2."""
    return 1000 * n * n


def drift_constant(n: int) -> int:
    """N * (200 N + 100 (N^4 + N^3)): the bound is this times 2^-u times C."""
    return n * (200 * n + 100 * (n**4 + n**3))


def drift_bound(n: int, u: int, c: Fraction) -> Fraction:
    return Fraction(drift_constant(n) * c) / (1 << u)


def reward_shift(chain: MarkovChain) -> Fraction:
    """The constant c making every ``r + c*d`` at least 1 (0 when already so)."""
    ratios = [e.reward / e.duration for e in chain.edges.values()]
    low = min(ratios)
    return Fraction(0) if low >= 1 else 1 - low


def to_float_chain(chain: MarkovChain, u: int) -> MarkovChain:
    """Shift rewards, round all numbers to precision u, and normalize each row."""
    if chain.mode != "exact":
        raise ChainError("only exact chains can be converted")
    for e in chain.edges.values():
        if e.duration < 1:
            raise ChainError("float evaluation needs every duration to be at least 1")
    shift = reward_shift(chain)
    edges = {}
    for i, row in chain.rows().items():
        keys = sorted(row)
        probs = normalize_dist([round_to(row[j].probability, u) for j in keys]).entries
        for j, p in zip(keys, probs):
            e = row[j]
            edges[(i, j)] = EdgeData(
                p, round_to(e.reward + shift * e.duration, u), round_to(e.duration, u)
            )
    return MarkovChain(chain.n, edges, chain.labels, f"float:{u}", chain.removed, shift)


def shifted_reward_bound(chain: MarkovChain) -> Fraction:
    """Largest shifted edge reward, read from a float chain or an exact one."""
    if chain.mode == "exact":
        shift = reward_shift(chain)
        return max(e.reward + shift * e.duration for e in chain.edges.values())
    return max(e.reward.to_fraction() for e in chain.edges.values())


@dataclass(frozen=True)
class FloatValue:
    """Result of a float evaluation.

    ``value`` is the approximation of the true value, ``raw`` the float result
    before the shift is removed, and ``bound`` the certified error (None when
    the precision is below the certificate floor).
    """

    value: Fraction
    raw: UFloat
    shift: Fraction
    u: int
    n: int
    c_shifted: Fraction
    bound: Fraction | None


def mp_value_float(chain: MarkovChain, u: int | None = None) -> FloatValue:
    """Approximate mean-payoff value from state 1 using u-bit floats.

    An exact chain is converted first (``u`` is then required); a float chain
    is used as is.
    """
    if chain.mode == "exact":
        if u is None:
            raise ValueError("a precision is needed to evaluate an exact chain in floats")
        fchain = to_float_chain(chain, u)
    else:
        fchain = chain
        if u is not None and u != fchain.precision:
            raise ValueError("requested precision differs from the chain's")
        u = fchain.precision
    for e in fchain.edges.values():
        if e.duration.to_fraction() < 1:
            raise ChainError("float evaluation needs every duration to be at least 1")
    arith = FloatArith(u)
    final, _ = run_schedule(fchain, arith)
    raw = final_value(final, arith)
    n = len(fchain.alive_states())
    c = shifted_reward_bound(fchain)
    bound = None
    if u >= certificate_floor(n):
        bound = drift_bound(n, u, c)
    else:
        warnings.warn(
            f"precision {u} is below {certificate_floor(n)}; no error certificate issued",
            CertificateWarning,
            stacklevel=2,
        )
    return FloatValue(raw.to_fraction() - fchain.reward_shift, raw, fchain.reward_shift, u, n, c, bound)


def precision_for(n: int, c: Fraction, target: Fraction) -> int:
    """Smallest certified precision whose drift bound is below ``target``."""
    if target <= 0:
        raise ValueError("target error must be positive")
    need = Fraction(drift_constant(n) * c) / target
    # Integer bit lengths estimate log2(need) without converting to float.
    u = max(1, need.numerator.bit_length() - need.denominator.bit_length())
    while drift_bound(n, u, c) >= target:
        u += 1
    while u > 1 and drift_bound(n, u - 1, c) < target:
        u -= 1
    return max(u, certificate_floor(n))
