"""Exact combinatorial primitives: divisor sums, Bernoulli numbers,
Eulerian polynomials, complete Bell polynomials and power sums."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from qdiv.errors import DomainError, LengthError
from qdiv.series import Polynomial, QSeries, qs_inv, qs_mul, qs_shift

__all__ = [
    "DivisorTable",
    "bell_complete",
    "bernoulli",
    "bernoulli_eulerian_sides",
    "binomial",
    "divisor_sigma",
    "eulerian_poly",
    "faulhaber_sum",
    "fk_poly",
    "lemma31_check",
    "power_sum_gf_check",
    "power_sum_gf_sides",
]

_lock = threading.Lock()
_bernoulli_cache: list[Fraction] = [Fraction(1)]
_eulerian_cache: list[Polynomial] = [Polynomial([1])]


def divisor_sigma(m: int, n: int) -> int:
    """Sum of ``d**m`` over the divisors ``d`` of ``n`` (trial division)."""
    if n < 1:
        raise DomainError(f"divisor sums need n >= 1, got {n}")
    if m < 0:
        raise DomainError("negative divisor powers are not supported")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**m
            e = n // d
            if e != d:
                total += e**m
        d += 1
    return total


@dataclass(frozen=True)
class DivisorTable:
    """``values[m][n-1] == divisor_sigma(m, n)`` for ``1 <= n <= max_n``."""

    max_n: int
    values: dict[int, tuple[int, ...]]

    @classmethod
    def build(cls, powers: Sequence[int], max_n: int) -> DivisorTable:
        values = {m: tuple(divisor_sigma(m, n) for n in range(1, max_n + 1)) for m in powers}
        return cls(max_n, values)

    def sigma(self, m: int, n: int) -> int:
        return self.values[m][n - 1]


def binomial(n: int, k: int) -> int:
    """``C(n, k)``, zero when ``k > n`` or ``k < 0``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def bernoulli(j: int) -> Fraction:
    """Bernoulli number ``B_j`` from ``x / (e^x - 1)``, so ``B_1 = -1/2``.

    Uses ``sum_{i=0}^{m} C(m+1, i) B_i = 0`` for ``m >= 1``.
    """
    if j < 0:
        raise DomainError("Bernoulli index must be non-negative")
    with _lock:
        cache = _bernoulli_cache
        while len(cache) <= j:
            m = len(cache)
            acc = sum(math.comb(m + 1, i) * cache[i] for i in range(m))
            cache.append(-Fraction(acc) / (m + 1))
        return cache[j]


def eulerian_poly(k: int) -> Polynomial:
    """Eulerian polynomial ``A_k(t)``.

    ``A_0 = 1`` and ``A_k(t) = sum_{j<k} C(k, j) A_j(t) (t - 1)^(k-1-j)``.
    """
    if k < 0:
        raise DomainError("Eulerian index must be non-negative")
    with _lock:
        cache = _eulerian_cache
        t_minus_1 = Polynomial([-1, 1])
        while len(cache) <= k:
            m = len(cache)
            acc = Polynomial()
            for j in range(m):
                acc = acc + math.comb(m, j) * cache[j] * t_minus_1 ** (m - 1 - j)
            cache.append(acc)
        return cache[k]


def power_sum_gf_sides(k: int, order: int) -> tuple[QSeries, QSeries]:
    """Both sides of ``sum n^k q^n = q A_k(q) / (1 - q)^(k+1)`` as series.

    The left side is read off coefficientwise; the right side is assembled
    from the Eulerian polynomial with exact series division.
    """
    lhs = QSeries([0] + [n**k for n in range(1, order + 1)], order)
    numerator = qs_shift(eulerian_poly(k).to_qseries(order), 1)
    one_minus_q = QSeries([1, -1][: order + 1], order)
    rhs = qs_mul(numerator, qs_inv(one_minus_q) ** (k + 1))
    return lhs, rhs


def power_sum_gf_check(k: int, order: int) -> bool:
    lhs, rhs = power_sum_gf_sides(k, order)
    return lhs == rhs


def faulhaber_sum(k: int, n: int) -> Fraction:
    """``sum_{m=1}^{n-1} m^k`` via ``(1/(k+1)) sum_j C(k+1, j) B_j n^(k+1-j)``.

    The closed form really sums from ``m = 0``; for ``k = 0`` the term
    ``0^0 = 1`` makes it return ``n`` rather than ``n - 1``.
    """
    if n < 1:
        raise DomainError("Faulhaber's formula here needs n >= 1")
    acc = sum(math.comb(k + 1, j) * bernoulli(j) * n ** (k + 1 - j) for j in range(k + 1))
    return Fraction(acc) / (k + 1)


def bell_complete(m: int, u: Sequence[Any]) -> Any:
    """Complete Bell polynomial ``Y_m(u_1, ..., u_m)`` over any commutative ring.

    Ring elements need ``+`` and ``*`` among themselves and multiplication by
    integers. ``Y_0`` is the integer 1.
    """
    if len(u) != m:
        raise LengthError(f"Y_{m} takes exactly {m} arguments, got {len(u)}")
    ys: list[Any] = [1]
    for r in range(m):
        acc = None
        for i in range(r + 1):
            term = math.comb(r, i) * (ys[r - i] * u[i])
            acc = term if acc is None else acc + term
        ys.append(acc)
    return ys[m]


def bernoulli_eulerian_sides(k: int) -> tuple[Polynomial, Polynomial]:
    """``S_k(t) = (1/(k+1)) sum_j C(k+1, j) B_j (1-t)^j A_{k+1-j}(t)`` and ``t A_k(t)``."""
    one_minus_t = Polynomial([1, -1])
    s = Polynomial()
    for j in range(k + 1):
        s = s + (math.comb(k + 1, j) * bernoulli(j)) * one_minus_t**j * eulerian_poly(k + 1 - j)
    s = s * Fraction(1, k + 1)
    return s, Polynomial.x() * eulerian_poly(k)


def lemma31_check(k: int) -> bool:
    """Whether ``S_k(t) == t A_k(t)``. Holds for k >= 1; at k = 0 ``S_0 = 1``."""
    lhs, rhs = bernoulli_eulerian_sides(k)
    return lhs == rhs


def fk_poly(k: int) -> Polynomial:
    """``f_k(n) = sum_{j=1}^{k} C(k, j) (-1)^(j-1) n^(k-j)``, i.e. ``n^k - (n-1)^k``."""
    if k < 1:
        raise DomainError("f_k is defined for k >= 1")
    coeffs = [0] * k
    for j in range(1, k + 1):
        coeffs[k - j] += math.comb(k, j) * (-1) ** (j - 1)
    return Polynomial(coeffs)
