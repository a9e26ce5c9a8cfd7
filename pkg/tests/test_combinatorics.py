from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bell_by_partitions, bernoulli_akiyama, eulerian_by_descents, sigma, trim
from qdiv.combinatorics import (
    DivisorTable,
    bell_complete,
    bernoulli,
    binomial,
    divisor_sigma,
    eulerian_poly,
    faulhaber_sum,
    fk_poly,
    lemma31_check,
    bernoulli_eulerian_sides,
    power_sum_gf_check,
)
from qdiv.errors import DomainError, LengthError
from qdiv.series import Polynomial, QSeries

F = Fraction


def test_divisor_sigma_examples():
    assert divisor_sigma(0, 6) == 4
    assert divisor_sigma(1, 6) == 12
    assert all(divisor_sigma(m, 1) == 1 for m in range(6))
    with pytest.raises(DomainError):
        divisor_sigma(1, 0)


def test_divisor_sigma_matches_enumeration():
    for m in range(4):
        for n in range(1, 400):
            assert divisor_sigma(m, n) == sigma(m, n)


def test_divisor_table():
    table = DivisorTable.build([0, 1, 3], 60)
    assert table.sigma(0, 12) == 6
    assert table.sigma(3, 60) == sigma(3, 60)


def test_binomial_examples():
    assert binomial(5, 2) == 10
    assert binomial(7, 0) == 1
    assert binomial(3, 5) == 0


def test_bernoulli_examples():
    assert bernoulli(0) == 1
    assert bernoulli(1) == F(-1, 2)
    assert bernoulli(3) == 0
    assert [bernoulli(j) for j in range(7)] == [1, F(-1, 2), F(1, 6), 0, F(-1, 30), 0, F(1, 42)]


def test_bernoulli_matches_independent_algorithm():
    for j in range(30):
        assert bernoulli(j) == bernoulli_akiyama(j)


def test_bernoulli_generating_function_residual():
    # (sum B_j x^j / j!) * (e^x - 1) / x == 1 up to x^J
    J = 20
    b = QSeries([bernoulli(j) / math.factorial(j) for j in range(J + 1)], J)
    e = QSeries([F(1, math.factorial(j + 1)) for j in range(J + 1)], J)
    assert b * e == QSeries([1], J)


def test_eulerian_examples():
    assert eulerian_poly(0) == Polynomial([1])
    assert eulerian_poly(2) == Polynomial([1, 1])
    assert eulerian_poly(3) == Polynomial([1, 4, 1])


@pytest.mark.parametrize("k", range(0, 8))
def test_eulerian_counts_descents(k):
    assert list(eulerian_poly(k).coeffs) == eulerian_by_descents(k)


def test_eulerian_coefficients_sum_to_factorial():
    for k in range(1, 16):
        c = eulerian_poly(k).coeffs
        assert all(x >= 0 and x.denominator == 1 for x in c)
        assert sum(c) == math.factorial(k)


@pytest.mark.parametrize("k,order", [(0, 10), (1, 10), (4, 50), (6, 30)])
def test_power_sum_gf(k, order):
    assert power_sum_gf_check(k, order)


def test_faulhaber_examples():
    assert faulhaber_sum(1, 5) == 10
    assert faulhaber_sum(3, 3) == 9


def test_faulhaber_brute_force():
    for k in range(1, 11):
        for n in range(1, 101):
            assert faulhaber_sum(k, n) == sum(m**k for m in range(1, n))


def test_faulhaber_at_zero_counts_the_zeroth_term():
    # with B_1 = -1/2 the closed form is sum_{m=0}^{n-1} m^k, and 0^0 = 1
    for n in range(1, 50):
        assert faulhaber_sum(0, n) == n == sum(m**0 for m in range(0, n))


def test_bell_examples():
    u1, u2, u3 = F(2), F(3, 5), F(-7)
    assert bell_complete(1, [u1]) == u1
    assert bell_complete(2, [u1, u2]) == u1**2 + u2
    assert bell_complete(3, [u1, u2, u3]) == u1**3 + 3 * u1 * u2 + u3
    assert bell_complete(0, []) == 1
    with pytest.raises(LengthError):
        bell_complete(3, [u1, u2])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 8), st.lists(st.fractions(-5, 5, max_denominator=7), min_size=8, max_size=8))
def test_bell_matches_partition_sum(m, u):
    assert bell_complete(m, u[:m]) == bell_by_partitions(m, u[:m])


def test_bell_over_polynomials():
    u = [Polynomial([0, 1]), Polynomial([1, 0, 2]), Polynomial([F(1, 3)])]
    assert bell_complete(3, u) == bell_by_partitions(3, u)


def test_lemma_bridge_examples():
    s1, rhs1 = bernoulli_eulerian_sides(1)
    assert s1 == rhs1 == Polynomial([0, 1])
    assert lemma31_check(5)


def test_lemma_bridge_fails_at_zero():
    # S_0 = B_0 A_1 = 1 while t A_0 = t; the identity needs k >= 1
    s0, rhs0 = bernoulli_eulerian_sides(0)
    assert s0 == Polynomial([1])
    assert rhs0 == Polynomial([0, 1])
    assert not lemma31_check(0)


def test_lemma_bridge_matches_telescoped_form():
    # the generating-function route gives S_k = sum_j C(k,j) A_j (t-1)^(k-j)
    t1 = Polynomial([-1, 1])
    for k in range(0, 12):
        direct = sum((math.comb(k, j) * eulerian_poly(j) * t1 ** (k - j) for j in range(k + 1)), Polynomial())
        assert bernoulli_eulerian_sides(k)[0] == direct


def test_fk_examples():
    assert fk_poly(1) == Polynomial([1])
    assert fk_poly(2) == Polynomial([-1, 2])
    assert fk_poly(3) == Polynomial([1, -3, 3])
    with pytest.raises(DomainError):
        fk_poly(0)


def test_fk_telescopes():
    for k in range(1, 11):
        f = fk_poly(k)
        acc = 0
        for n in range(1, 201):
            acc += f(n)
            assert acc == n**k


def test_eulerian_is_memo_stable():
    assert eulerian_poly(9) is eulerian_poly(9)
    assert trim(list(eulerian_poly(4).coeffs)) == [1, 11, 11, 1]
