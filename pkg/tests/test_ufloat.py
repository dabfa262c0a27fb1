from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import closeness_cases
from boundedmem.ufloat import (
    ClosenessBudget,
    PrecisionMismatch,
    UDist,
    UFloat,
    add_u,
    closeness_base,
    closeness_steps,
    div_u,
    fits_exponent,
    is_close,
    mul_u,
    normalize_dist,
    rel_dist,
    round_dist,
    round_to,
)

F = Fraction
positive = st.fractions(min_value=F(1, 10**6), max_value=10**6, max_denominator=10**6)
precisions = st.sampled_from([1, 2, 3, 8, 16, 53, 100])


def test_round_zero():
    assert round_to(0, 8) == UFloat.zero(8)
    assert round_to(0, 8).to_fraction() == 0


@given(st.integers(1, 2**8 - 1), st.integers(-40, 40))
def test_dyadics_are_exact(a, e):
    x = F(a) * F(2) ** e
    r = round_to(x, 8)
    assert r.to_fraction() == x
    assert closeness_steps(r, x, 8) == 0


def test_one_third_at_eight_bits_matches_scan():
    # Scan every candidate with 9 significant bits around 1/3.
    x = F(1, 3)
    candidates = [F(m, 2**10) for m in range(2**8, 2**9)]
    best = min(candidates, key=lambda c: (abs(c - x), c))
    r = round_to(x, 8)
    assert r.to_fraction() == best
    assert abs(r.to_fraction() / x - 1) <= F(1, 2**8)


def test_ties_go_to_even():
    # 2 + 1/2 at u=1 sits between 2 and 3; the even mantissa wins.
    assert round_to(F(5, 2), 1).to_fraction() == 2
    assert round_to(F(7, 2), 1).to_fraction() == 4


def test_negative_and_bad_precision():
    with pytest.raises(ValueError):
        round_to(F(-1), 4)
    with pytest.raises(ValueError):
        round_to(F(1), 0)
    with pytest.raises(ValueError):
        UFloat(3, 0, 4)


def test_identities():
    x = round_to(F(3, 7), 12)
    assert add_u(x, UFloat.zero(12)) == x
    half = round_to(F(1, 2), 1)
    assert mul_u(half, half).to_fraction() == F(1, 4)
    with pytest.raises(ZeroDivisionError):
        div_u(x, UFloat.zero(12))
    with pytest.raises(PrecisionMismatch):
        add_u(x, round_to(1, 13))


@settings(max_examples=300)
@given(positive, positive, precisions)
def test_single_operation_error(x, y, u):
    xf, yf = round_to(x, u), round_to(y, u)
    ex, ey = xf.to_fraction(), yf.to_fraction()
    limit = 1 / closeness_base(u) - 1
    for got, exact in ((add_u(xf, yf), ex + ey), (mul_u(xf, yf), ex * ey), (div_u(xf, yf), ex / ey)):
        assert abs(got.to_fraction() / exact - 1) <= limit


def test_rel_dist_examples():
    assert rel_dist(F(5, 3), F(5, 3)) == 0
    assert rel_dist(1, 2) == 1
    assert rel_dist(0, 0) == 0
    assert rel_dist(0, 1) == math.inf
    with pytest.raises(ValueError):
        rel_dist(-1, 1)


@given(positive, positive)
def test_rel_dist_symmetric(x, y):
    assert rel_dist(x, y) == rel_dist(y, x)


def test_normalize_examples():
    dist = normalize_dist([round_to(v, 4) for v in (1, 1, 2)])
    assert [e.to_fraction() for e in dist.entries] == [F(1, 4), F(1, 4), F(1, 2)]
    assert [e.to_fraction() for e in normalize_dist([round_to(1, 4)]).entries] == [1]
    with pytest.raises(ValueError):
        normalize_dist([UFloat.zero(4)])


@settings(max_examples=200)
@given(st.lists(positive, min_size=1, max_size=6))
def test_normalized_representation_is_close(values):
    u = 32
    target = [v / sum(values) for v in values]
    dist = round_dist(target, u)
    m = len(values)
    limit = closeness_base(u) ** (-(2 * m + 2)) - 1
    for p, q in zip(dist.normalized(), target):
        assert rel_dist(p, q) <= limit


@settings(max_examples=200)
@given(st.lists(positive, min_size=1, max_size=6), st.sampled_from([2, 4, 8, 32]))
def test_udist_band_holds(values, u):
    dist = normalize_dist([round_to(v, u) for v in values])
    slack = F(4 * len(values), 2**u)
    assert abs(dist.exact_sum() - 1) <= slack


def test_udist_rejects_out_of_band():
    with pytest.raises(ValueError, match="tolerance band"):
        UDist((round_to(F(1, 2), 8),))


def test_json_roundtrip():
    x = round_to(F(22, 7), 30)
    assert UFloat.from_json(x.to_json()) == x


def test_exponent_fit():
    assert fits_exponent(round_to(F(1, 2**3), 3))
    assert not fits_exponent(round_to(F(1, 2**8), 3))


def test_budget_rules():
    a, b = ClosenessBudget(10, 2), ClosenessBudget(10, 3)
    assert a.then(b).i == 5
    assert a.float_add(b).i == 4
    assert a.float_mul(b).i == 6
    assert a.float_div(b).i == 7
    assert ClosenessBudget(10, 0).float_div(ClosenessBudget(10, 3)).i == 4
    with pytest.raises(PrecisionMismatch):
        a.then(ClosenessBudget(11, 1))


def test_product_budget_alone_is_unsound_for_division():
    # With an exact numerator (i = 0) the product rule would promise one step,
    # but rounding the denominator and the quotient can cost two.
    rng = random.Random(3)
    u = 4
    for _ in range(2000):
        x = F(rng.randint(1, 2**u), 1)
        y = F(rng.randint(2**u, 2**(u + 4)), rng.randint(1, 2**u))
        xf, yf = round_to(x, u), round_to(y, u)
        i, j = closeness_steps(xf, x, u), closeness_steps(yf, y, u)
        if i == 0 and j == 1 and not is_close(div_u(xf, yf), x / y, u, i * j + 1):
            assert is_close(div_u(xf, yf), x / y, u, ClosenessBudget(u, i).float_div(ClosenessBudget(u, j)).i)
            return
    pytest.fail("no counterexample found")


@pytest.mark.parametrize("check", closeness_cases.CHECKS, ids=lambda c: c.__name__)
def test_closeness_items(check):
    rng = random.Random(11)
    for _ in range(500):
        assert check(rng, rng.choice([2, 5, 16, 53]))


def test_unit_roundoff_needs_the_extra_bit():
    # With only u significant bits the neighbours of 17/16 at u=4 are 1 and
    # 9/8, and neither is (4,1)-close; with u+1 bits 17/16 is exact.
    x = F(17, 16)
    assert not is_close(F(1), x, 4, 1)
    assert not is_close(F(9, 8), x, 4, 1)
    assert round_to(x, 4).to_fraction() == x
