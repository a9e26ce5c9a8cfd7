"""Exact distribution, moments and cumulants of the reachable-set size.

``X_n`` is the number of vertices reachable from vertex 1 (itself included)
in the acyclic random digraph on ``1..n`` where each forward edge is present
with probability ``p = 1 - q``. Everything here is an exact polynomial in
``q`` or, for the ``n -> infinity`` limits, an exact truncated q-series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from qdiv.combinatorics import bell_complete, fk_poly
from qdiv.errors import DomainError
from qdiv.identities import K, IdentityReport, Fault, RecurrenceSpec, compare, partial_limit
from qdiv.series import (
    BiSeries,
    Polynomial,
    QSeries,
    bis_log,
    qs_one,
    qs_scale,
    zseries_log,
)

__all__ = [
    "CumulantSet",
    "PmfExact",
    "a_nk",
    "a_nk_sum",
    "bell_cumulant_check",
    "cumulants_exact",
    "e_via_recurrence",
    "limit_cumulant",
    "limit_cumulants",
    "limit_z_moments",
    "pmf_exact",
    "raw_moment_exact",
    "z_cumulants_exact",
    "z_moment_exact",
]


def _one_minus_qpow(j: int) -> Polynomial:
    if j == 0:
        return Polynomial()
    return Polynomial([1] + [0] * (j - 1) + [-1])


def _require_n(n: int) -> None:
    if n < 1:
        raise DomainError(f"the graph needs at least one vertex, got n={n}")


@dataclass(frozen=True)
class PmfExact:
    """``probs[h-1] = Pr(X_n = h)`` as a polynomial in q."""

    n: int
    probs: tuple[Polynomial, ...]

    def total(self) -> Polynomial:
        return sum(self.probs, Polynomial())

    def evaluate(self, q: float | Fraction) -> list:
        """Probabilities at a numeric q; exact when q is rational."""
        return [p(q) for p in self.probs]


@lru_cache(maxsize=None)
def pmf_exact(n: int) -> PmfExact:
    """``Pr(X_n = h) = q^(n-h) prod_{j=1}^{h-1} (1 - q^(n-j))``."""
    _require_n(n)
    probs = []
    prod = Polynomial([1])
    for h in range(1, n + 1):
        if h > 1:
            prod = prod * _one_minus_qpow(n - h + 1)
        probs.append(Polynomial.monomial(n - h) * prod)
    return PmfExact(n, tuple(probs))


def raw_moment_exact(n: int, k: int) -> Polynomial:
    """``e_{n,k} = E(X_n^k)`` straight from the pmf."""
    pmf = pmf_exact(n)
    return sum((h**k * p for h, p in enumerate(pmf.probs, start=1)), Polynomial())


def z_moment_exact(n: int, k: int) -> Polynomial:
    """``E((n - X_n)^k)`` straight from the pmf."""
    pmf = pmf_exact(n)
    return sum(((n - h) ** k * p for h, p in enumerate(pmf.probs, start=1)), Polynomial())


@lru_cache(maxsize=None)
def _a_table(k: int, n: int) -> tuple[Polynomial, ...]:
    # a_{r,k} = f_k(r) + (1 - q^(r-1)) a_{r-1,k}, a_{0,k} = 0
    f = fk_poly(k)
    rows = [Polynomial()]
    for r in range(1, n + 1):
        rows.append(f(r) + _one_minus_qpow(r - 1) * rows[-1])
    return tuple(rows)


def a_nk(n: int, k: int) -> Polynomial:
    """``a_{n,k}`` by its first-order recurrence. ``a_{n,1} = e_{n,1}``."""
    if k < 1:
        raise DomainError("a_{n,k} is defined for k >= 1")
    if n < 0:
        raise DomainError("n must be non-negative")
    return _a_table(k, n)[n]


def a_nk_sum(n: int, k: int) -> Polynomial:
    """``a_{n,k} = sum_{i=1}^{n} f_k(i) prod_{j=i}^{n-1} (1 - q^j)``."""
    f = fk_poly(k)
    total = Polynomial()
    for i in range(1, n + 1):
        prod = Polynomial([1])
        for j in range(i, n):
            prod = prod * _one_minus_qpow(j)
        total = total + f(i) * prod
    return total


def e_via_recurrence(n: int, k: int) -> Polynomial:
    """``e_{n,k} = sum_{l=1}^{k} C(k,l) (-1)^(l-1) n^(k-l) a_{n,l}``."""
    _require_n(n)
    if k < 1:
        raise DomainError("k must be >= 1")
    total = Polynomial()
    for ell in range(1, k + 1):
        total = total + (math.comb(k, ell) * (-1) ** (ell - 1) * n ** (k - ell)) * a_nk(n, ell)
    return total


@dataclass(frozen=True)
class CumulantSet:
    """``kappa[t-1]`` is the exact t-th cumulant as a polynomial in q."""

    n: int
    tmax: int
    kappa: tuple[Polynomial, ...]

    def __getitem__(self, t: int) -> Polynomial:
        if not 1 <= t <= self.tmax:
            raise IndexError(t)
        return self.kappa[t - 1]


def _cumulants_from_moments(moments: list[Polynomial]) -> tuple[Polynomial, ...]:
    coeffs = [m * Fraction(1, math.factorial(t)) for t, m in enumerate(moments)]
    logs = zseries_log(coeffs, Polynomial())
    return tuple(math.factorial(t) * logs[t] for t in range(1, len(moments)))


def cumulants_exact(n: int, tmax: int) -> CumulantSet:
    """Cumulants of ``X_n`` from the log of its moment generating function."""
    _require_n(n)
    if tmax < 1:
        raise DomainError("tmax must be >= 1")
    moments = [Polynomial([1])] + [raw_moment_exact(n, t) for t in range(1, tmax + 1)]
    return CumulantSet(n, tmax, _cumulants_from_moments(moments))


def z_cumulants_exact(n: int, tmax: int) -> CumulantSet:
    """Cumulants of ``Z_n = n - X_n`` from its own moments."""
    _require_n(n)
    moments = [Polynomial([1])] + [z_moment_exact(n, t) for t in range(1, tmax + 1)]
    return CumulantSet(n, tmax, _cumulants_from_moments(moments))


# ---------------------------------------------------------------------------
# n -> infinity
# ---------------------------------------------------------------------------


def limit_z_moments(kmax: int, order: int) -> list[QSeries]:
    """``lim E(Z_n^k)`` for ``k = 1..kmax`` as series to ``q^order``.

    ``E(Z_n^k) = n^k - a_{n,k}`` is the partial limit ``b_n`` of the
    ``f_k`` recurrence. It is taken at ``n = N + 2``, after checking that
    ``n = N + 1`` already agrees.
    """
    out = []
    for k in range(1, kmax + 1):
        spec = RecurrenceSpec.power_difference(k)
        settled = partial_limit(spec, order + 1, order)
        value = partial_limit(spec, order + 2, order)
        if value != settled:
            raise ArithmeticError(f"Z-moment {k} has not stabilised at order {order}")
        out.append(value)
    return out


def limit_cumulants(tmax: int, order: int) -> list[QSeries]:
    """``lim kappa_t(Z_n)`` for ``t = 1..tmax`` via the log of the limiting MGF."""
    if tmax < 1:
        raise DomainError("tmax must be >= 1")
    moments = limit_z_moments(tmax, order)
    coeffs = [qs_one(order)] + [
        qs_scale(Fraction(1, math.factorial(t)), m) for t, m in enumerate(moments, start=1)
    ]
    logs = bis_log(BiSeries(coeffs))
    return [qs_scale(math.factorial(t), logs[t]) for t in range(1, tmax + 1)]


def limit_cumulant(t: int, order: int) -> QSeries:
    """``lim kappa_t(n - X_n)``; equals ``K_t`` and ``(-1)^t lim kappa_t(X_n)`` for t >= 2."""
    if t < 1:
        raise DomainError("cumulant index must be >= 1")
    return limit_cumulants(t, order)[t - 1]


def _bell_combination(t: int, y: list) -> QSeries:
    y1, y2, y3 = y[1], y[2], y[3]
    if t == 3:
        return y3 - 3 * (y1 * y2) + 2 * (y1 * y1 * y1)
    y4 = y[4]
    if t == 4:
        return y4 - 4 * (y1 * y3) - 3 * (y2 * y2) + 12 * (y2 * y1 * y1) - 6 * (y1 * y1 * y1 * y1)
    y5 = y[5]
    if t == 5:
        # expansion of mu_5 - 10 mu_3 mu_2 in raw moments
        return (
            y5
            - 5 * (y4 * y1)
            - 10 * (y3 * y2)
            + 20 * (y3 * y1 * y1)
            + 30 * (y2 * y2 * y1)
            - 60 * (y2 * y1 * y1 * y1)
            + 24 * (y1 * y1 * y1 * y1 * y1)
        )
    raise DomainError("explicit combinations exist for t in {3, 4, 5}")


def bell_cumulant_check(t: int, order: int, faults: tuple[Fault, ...] = ()) -> IdentityReport:
    """Explicit cumulant combination of ``Y_k(K_1..K_k)`` against ``(-1)^t K_t``.

    ``Y_k`` is the limit of ``E(Z_n^k)``; the combination is ``kappa_t`` of
    the limit of ``Z_n``, and ``kappa_t(X_n) = (-1)^t kappa_t(Z_n)``.
    """
    if t not in (3, 4, 5):
        raise DomainError("explicit combinations exist for t in {3, 4, 5}")
    ks = [K(i, order) for i in range(1, t + 1)]
    y = [None] + [bell_complete(i, ks[:i]) for i in range(1, t + 1)]
    sign = (-1) ** t
    lhs = qs_scale(sign, _bell_combination(t, y))
    rhs = qs_scale(sign, ks[t - 1])
    return compare("bell_cumulant", {"t": t}, order, [[lhs, rhs]], faults)
