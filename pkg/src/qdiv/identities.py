"""Builders for the divisor-type q-series and a coefficientwise verifier.

Every builder returns a :class:`QSeries` at the requested truncation order.
Sums over ``n`` stop as soon as the smallest q-exponent a term can carry
exceeds the order; each builder notes that exponent.

The verification suite compares independently built sides of every identity
and emits one :class:`IdentityReport` per check. Fault injection hooks let
the test-suite prove that the comparison can actually fail.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence, Union

from qdiv.combinatorics import bell_complete, divisor_sigma, eulerian_poly, fk_poly, power_sum_gf_sides
from qdiv.errors import DomainError
from qdiv.series import (
    BiSeries,
    Polynomial,
    QSeries,
    as_rational,
    bis_inv,
    bis_log,
    bis_mul,
    pochhammer_tail,
    qs_add,
    qs_compose_power,
    qs_div_factor,
    qs_monomial,
    qs_mul,
    qs_mul_factor,
    qs_one,
    qs_scale,
    qs_shift,
    qs_zero,
    rational_str,
)

Series = Union[QSeries, BiSeries]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mismatch:
    exponent: Any  # int for q-series, (t, m) for series in z and q
    lhs: Fraction
    rhs: Fraction

    def to_json(self) -> dict:
        exp = list(self.exponent) if isinstance(self.exponent, tuple) else self.exponent
        return {"exponent": exp, "lhs": rational_str(self.lhs), "rhs": rational_str(self.rhs)}


@dataclass(frozen=True)
class IdentityReport:
    identity_id: str
    params: dict
    order: int
    first_mismatch: Mismatch | None = None

    @property
    def verdict(self) -> str:
        return "pass" if self.first_mismatch is None else "fail"

    @property
    def passed(self) -> bool:
        return self.first_mismatch is None

    @property
    def key(self) -> str:
        return report_key(self.identity_id, self.params)

    def to_json(self) -> dict:
        return {
            "identity_id": self.identity_id,
            "params": dict(self.params),
            "order": self.order,
            "verdict": self.verdict,
            "first_mismatch": None if self.first_mismatch is None else self.first_mismatch.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> IdentityReport:
        mm = data["first_mismatch"]
        mismatch = None
        if mm is not None:
            exp = mm["exponent"]
            mismatch = Mismatch(tuple(exp) if isinstance(exp, list) else exp, Fraction(mm["lhs"]), Fraction(mm["rhs"]))
        report = cls(data["identity_id"], dict(data["params"]), data["order"], mismatch)
        if report.verdict != data["verdict"]:
            raise ValueError("verdict inconsistent with first_mismatch")
        return report


def report_key(identity_id: str, params: dict) -> str:
    inner = ",".join(f"{k}={params[k]}" for k in sorted(params))
    return f"{identity_id}[{inner}]"


@dataclass(frozen=True)
class Fault:
    """Add ``delta`` to one coefficient of one side of one check.

    ``group`` and ``side`` index into the list of equalities the check
    returns; ``exponent`` is an int for q-series or ``(t, m)`` for
    bivariate sides.
    """

    key: str
    exponent: Any
    delta: Fraction = Fraction(1)
    group: int = 0
    side: int = 0


def _perturb(s: Series, exponent: Any, delta: Fraction) -> Series:
    if isinstance(s, BiSeries):
        t, m = exponent
        coeffs = list(s.coeffs)
        coeffs[t] = _perturb(coeffs[t], m, delta)
        return BiSeries(coeffs)
    c = list(s.coeffs)
    c[exponent] += delta
    return QSeries(c, s.order)


def _first_mismatch(a: Series, b: Series) -> Mismatch | None:
    if isinstance(a, BiSeries):
        if a.zorder != b.zorder or a.qorder != b.qorder:
            raise DomainError("sides of a bivariate identity carry different orders")
        for t, (x, y) in enumerate(zip(a.coeffs, b.coeffs)):
            mm = _first_mismatch(x, y)
            if mm is not None:
                return Mismatch((t, mm.exponent), mm.lhs, mm.rhs)
        return None
    if a.order != b.order:
        raise DomainError("sides of an identity carry different orders")
    for m, (x, y) in enumerate(zip(a.coeffs, b.coeffs)):
        if x != y:
            return Mismatch(m, x, y)
    return None


def compare(
    identity_id: str,
    params: dict,
    order: int,
    groups: Sequence[Sequence[Series]],
    faults: Sequence[Fault] = (),
) -> IdentityReport:
    """Check that within each group every side equals the first one."""
    key = report_key(identity_id, params)
    groups = [list(g) for g in groups]
    for f in faults:
        if f.key == key:
            groups[f.group][f.side] = _perturb(groups[f.group][f.side], f.exponent, as_rational(f.delta))
    for sides in groups:
        ref = sides[0]
        for other in sides[1:]:
            mm = _first_mismatch(ref, other)
            if mm is not None:
                return IdentityReport(identity_id, dict(params), order, mm)
    return IdentityReport(identity_id, dict(params), order, None)


# ---------------------------------------------------------------------------
# Series builders
# ---------------------------------------------------------------------------


def K(m: int, order: int) -> QSeries:
    """``K_m = sum_{n>=1} sigma_{m-1}(n) q^n``."""
    if m < 1:
        raise DomainError("K_m is defined for m >= 1")
    return QSeries([0] + [divisor_sigma(m - 1, n) for n in range(1, order + 1)], order)


def lambert(m: int, order: int) -> QSeries:
    """``sum_{n>=1} n^m q^n / (1 - q^n)``; term n starts at ``q^n``."""
    total = qs_zero(order)
    for n in range(1, order + 1):
        total = qs_add(total, qs_div_factor(qs_monomial(n, order, n**m), n))
    return total


def weighted_tail_sum(weight: Callable[[int], Any], order: int, start: int = 0) -> QSeries:
    """``sum_{n>=start} weight(n) q^n (q^{n+1};q)_inf``; term n starts at ``q^n``.

    The tail product is maintained from the top down,
    ``(q^{n+1})_inf = (q^{n+2})_inf (1 - q^{n+1})``, so the sum costs O(N^2).
    """
    out = qs_zero(order)
    tail = qs_one(order)  # (q^{n+1})_inf, factors above q^N are 1
    for n in range(order, start - 1, -1):
        tail = qs_mul_factor(tail, n + 1)
        w = as_rational(weight(n))
        if w:
            out = qs_add(out, qs_scale(w, qs_shift(tail, n)))
    return out


def uchimura_weighted(k: int, order: int) -> QSeries:
    """``M_k = sum_{n>=1} n^k q^n (q^{n+1})_inf``."""
    return weighted_tail_sum(lambda n: n**k, order, start=1)


def _ramanujan_sum(
    order: int,
    numerator: Callable[[int], QSeries],
    exponent: Callable[[int], int],
    power: int,
) -> QSeries:
    """``sum_{n>=1} (-1)^(n-1) q^exponent(n) numerator(n) / ((1-q^n)^power (q)_n)``.

    ``exponent`` must be increasing in ``n``; the loop stops once it
    exceeds ``order``.
    """
    total = qs_zero(order)
    inv_poch = qs_one(order)  # 1 / (q)_n, updated incrementally
    n = 1
    while exponent(n) <= order:
        inv_poch = qs_div_factor(inv_poch, n)
        term = inv_poch
        for _ in range(power):
            term = qs_div_factor(term, n)
        num = numerator(n)
        if num is not None:
            term = qs_mul(term, num)
        term = qs_shift(term, exponent(n))
        total = qs_add(total, term) if n % 2 else qs_add(total, qs_scale(-1, term))
        n += 1
    return total


def _eulerian_at_qn(k: int, order: int) -> Callable[[int], QSeries]:
    base = eulerian_poly(k).to_qseries(order)
    return lambda n: qs_compose_power(base, n)


def ramanujan_side(k: int, order: int) -> QSeries:
    """``sum (-1)^(n-1) q^C(n+1,2) A_k(q^n) / ((1-q^n)^k (q)_n)``."""
    return _ramanujan_sum(order, _eulerian_at_qn(k, order), lambda n: n * (n + 1) // 2, k)


def theorem21_lhs(k: int, order: int) -> QSeries:
    """``sum_{n>=1} (sum_{m<=n} m^k) q^n (q^{n+1})_inf``."""
    prefix = [0]
    for m in range(1, order + 1):
        prefix.append(prefix[-1] + m**k)
    return weighted_tail_sum(lambda n: prefix[n], order, start=1)


def theorem21_rhs(k: int, order: int) -> QSeries:
    """``sum (-1)^(n-1) q^C(n+1,2) A_k(q^n) / ((1-q^n)^(k+1) (q)_n)``."""
    return _ramanujan_sum(order, _eulerian_at_qn(k, order), lambda n: n * (n + 1) // 2, k + 1)


def _require_dilcher_k(k: int) -> None:
    if k < 1:
        raise DomainError("Dilcher's identity needs k >= 1")


def dilcher_lhs(k: int, order: int) -> QSeries:
    """``sum_{n>=k} C(n, k) q^n (q^{n+1})_inf``."""
    _require_dilcher_k(k)
    return weighted_tail_sum(lambda n: math.comb(n, k), order, start=k)


def dilcher_ramanujan(k: int, order: int) -> QSeries:
    """``sum (-1)^(n-1) q^(C(n+k,2) - C(k,2)) / ((1-q^n)^k (q)_n)``.

    The ``q^-C(k,2)`` prefactor is folded into the exponent
    ``C(n+k,2) - C(k,2) = nk + C(n,2)``, which is positive for ``n >= 1``.
    """
    _require_dilcher_k(k)
    ck2 = math.comb(k, 2)
    return _ramanujan_sum(order, lambda n: None, lambda n: math.comb(n + k, 2) - ck2, k)


def dilcher_nested(k: int, order: int) -> QSeries:
    """k-fold nested Lambert sum with ``j_1 >= j_2 >= ... >= j_k >= 1``.

    ``T_1(J) = sum_{j<=J} g_j`` and ``T_r(J) = sum_{j<=J} g_j T_{r-1}(j)``
    with ``g_j = q^j / (1 - q^j)``; returns ``T_k(N)``.
    """
    _require_dilcher_k(k)
    prev = [qs_one(order)] * (order + 1)  # T_0(j) = 1
    for _ in range(k):
        row = [qs_zero(order)]
        running = qs_zero(order)
        for j in range(1, order + 1):
            g_times = qs_div_factor(qs_shift(prev[j], j), j)
            running = qs_add(running, g_times)
            row.append(running)
        prev = row
    return prev[order]


# ---------------------------------------------------------------------------
# The a_n(q) recurrence and its limit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecurrenceSpec:
    """Forcing polynomial ``f`` of ``a_n = f(n) + (1 - q^(n-1)) a_(n-1)``."""

    f: Polynomial
    description: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.f, Polynomial):
            object.__setattr__(self, "f", Polynomial(self.f))
        if not self.f:
            raise DomainError("the forcing polynomial must not be identically zero")

    @classmethod
    def constant_one(cls) -> RecurrenceSpec:
        return cls(Polynomial([1]), "f(n) = 1")

    @classmethod
    def power_difference(cls, k: int) -> RecurrenceSpec:
        """``f_k(n) = n^k - (n-1)^k``; k = 0 falls back to ``f = 1``."""
        if k == 0:
            return cls(Polynomial([1]), "f_0(n) = 1")
        return cls(fk_poly(k), f"f_{k}(n) = n^{k} - (n-1)^{k}")

    @classmethod
    def dilcher(cls, k: int) -> RecurrenceSpec:
        """``f(n) = C(n-1, k-1)`` as a polynomial in n."""
        _require_dilcher_k(k)
        p = Polynomial([1])
        for i in range(1, k):
            p = p * Polynomial([-i, 1])
        return cls(p * Fraction(1, math.factorial(k - 1)), f"f(n) = C(n-1, {k - 1})")


def _f_series(spec: RecurrenceSpec, n: int, order: int) -> QSeries:
    return QSeries([spec.f(n)], order)


def a_sequence(spec: RecurrenceSpec, n: int, order: int, initial: Any = 0) -> QSeries:
    """``a_n`` from ``a_r = f(r) + (1 - q^(r-1)) a_(r-1)`` starting at ``a_0 = initial``.

    The first step multiplies ``a_0`` by ``1 - q^0 = 0``, so ``initial``
    never influences ``a_n`` for ``n >= 1``.
    """
    a = QSeries([initial], order)
    for r in range(1, n + 1):
        a = qs_add(_f_series(spec, r, order), qs_mul_factor(a, r - 1))
    return a


def partial_limit(spec: RecurrenceSpec, n: int, order: int) -> QSeries:
    """``b_n = sum_{i<=n} f(i) - a_n`` via ``b_n = b_(n-1) + q^(n-1) a_(n-1)``."""
    a = qs_zero(order)
    b = qs_zero(order)
    for r in range(1, n + 1):
        b = qs_add(b, qs_shift(a, r - 1))
        a = qs_add(_f_series(spec, r, order), qs_mul_factor(a, r - 1))
    return b


def limit_series(spec: RecurrenceSpec, order: int) -> QSeries:
    """``lim_n (sum_{i<=n} f(i) - a_n)`` to order N.

    ``b_n - b_(n-1) = q^(n-1) a_(n-1)`` vanishes mod ``q^(N+1)`` once
    ``n - 1 > N``, so ``b_(N+1)`` already has every coefficient final.
    """
    return partial_limit(spec, order + 1, order)


def limit_direct_series(spec: RecurrenceSpec, order: int) -> QSeries:
    """``sum_{n>=1} (sum_{i<=n} f(i)) q^n (q^{n+1})_inf`` with brute-force prefix sums."""
    prefix = [Fraction(0)]
    for i in range(1, order + 1):
        prefix.append(prefix[-1] + spec.f(i))
    return weighted_tail_sum(lambda n: prefix[n], order, start=1)


# ---------------------------------------------------------------------------
# Moment and cumulant checks
# ---------------------------------------------------------------------------


def moment_bell_sides(m: int, order: int) -> tuple[QSeries, QSeries]:
    if m < 1:
        raise DomainError("moment index must be >= 1")
    ks = [K(t, order) for t in range(1, m + 1)]
    return uchimura_weighted(m, order), bell_complete(m, ks)


def moment_bell_check(m: int, order: int, faults: Sequence[Fault] = ()) -> IdentityReport:
    lhs, rhs = moment_bell_sides(m, order)
    return compare("moment_bell", {"m": m}, order, [[lhs, rhs]], faults)


def divisor_cumulant_series(torder: int, qorder: int) -> BiSeries:
    """``sum_{t=1}^{T} K_t z^t / t!``."""
    coeffs = [qs_zero(qorder)]
    for t in range(1, torder + 1):
        coeffs.append(qs_scale(Fraction(1, math.factorial(t)), K(t, qorder)))
    return BiSeries(coeffs)


def weighted_mgf(torder: int, qorder: int) -> BiSeries:
    """``G = sum_{n>=0} e^(nz) q^n (q^{n+1})_inf`` expanded to ``z^T``."""
    coeffs = [weighted_tail_sum(lambda n: 1, qorder, start=0)]
    for t in range(1, torder + 1):
        coeffs.append(qs_scale(Fraction(1, math.factorial(t)), uchimura_weighted(t, qorder)))
    return BiSeries(coeffs)


def exp_z_pochhammer(torder: int, qorder: int) -> BiSeries:
    """``(e^z q; q)_inf = prod_{l=1}^{N} (1 - e^z q^l)`` to ``z^T``."""
    inv_fact = [Fraction(1, math.factorial(i)) for i in range(torder + 1)]
    acc = list(BiSeries.one(torder, qorder).coeffs)
    for ell in range(1, qorder + 1):
        # (1 - e^z q^l) * A: c_t -> c_t - q^l sum_i A_(t-i) / i!
        shifted = [qs_shift(c, ell) for c in acc]
        new = []
        for t in range(torder + 1):
            s = acc[t]
            for i in range(t + 1):
                if shifted[t - i]:
                    s = qs_add(s, qs_scale(-inv_fact[i], shifted[t - i]))
            new.append(s)
        acc = new
    return BiSeries(acc)


def closed_form_mgf(torder: int, qorder: int) -> BiSeries:
    """``(q)_inf / (e^z q)_inf`` in the truncated bivariate ring."""
    return bis_inv(exp_z_pochhammer(torder, qorder)) * pochhammer_tail(1, qorder)


def cumulant_gf_check(torder: int, qorder: int, faults: Sequence[Fault] = ()) -> IdentityReport:
    """``log G`` has ``z^t`` coefficient ``K_t / t!`` and ``G`` equals the product form."""
    g = weighted_mgf(torder, qorder)
    groups = [
        [bis_log(g), divisor_cumulant_series(torder, qorder)],
        [g, closed_form_mgf(torder, qorder)],
    ]
    return compare("cumulant_gf", {"T": torder}, qorder, groups, faults)


def ksum_logproduct_check(torder: int, qorder: int, faults: Sequence[Fault] = ()) -> IdentityReport:
    """``sum_t K_t z^t / t! = log((q)_inf / (e^z q)_inf)``."""
    lhs = divisor_cumulant_series(torder, qorder)
    rhs = bis_log(closed_form_mgf(torder, qorder))
    return compare("ksum_logproduct", {"T": torder}, qorder, [[lhs, rhs]], faults)


def pentagonal_series(order: int) -> QSeries:
    """Euler's pentagonal expansion of ``(q)_inf``."""
    c = [0] * (order + 1)
    j = 0
    while j * (3 * j - 1) // 2 <= order:
        sign = -1 if j % 2 else 1
        for e in {j * (3 * j - 1) // 2, j * (3 * j + 1) // 2}:
            if e <= order:
                c[e] += sign
        j += 1
    return QSeries(c, order)


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


def _stability_sides(order: int) -> list[QSeries]:
    spec = RecurrenceSpec.constant_one()
    return [partial_limit(spec, order + 1 + m, order) for m in (0, 1, 5, 17)]


def _task_groups(identity_id: str, params: dict, order: int) -> list[list[Series]]:
    p = params
    if identity_id == "kluyver":
        return [[uchimura_weighted(1, order), ramanujan_side(1, order), lambert(0, order), K(1, order)]]
    if identity_id == "lambert":
        return [[lambert(p["m"], order), K(p["m"] + 1, order)]]
    if identity_id == "ramanujan_type":
        return [[uchimura_weighted(p["k"], order), ramanujan_side(p["k"], order)]]
    if identity_id == "prefix_power_sum":
        return [[theorem21_lhs(p["k"], order), theorem21_rhs(p["k"], order)]]
    if identity_id == "dilcher":
        k = p["k"]
        return [[dilcher_lhs(k, order), dilcher_ramanujan(k, order), dilcher_nested(k, order)]]
    if identity_id == "power_sum_gf":
        return [list(power_sum_gf_sides(p["k"], order))]
    if identity_id == "normalization":
        return [[weighted_tail_sum(lambda n: 1, order, start=0), qs_one(order)]]
    if identity_id == "pentagonal":
        return [[pochhammer_tail(1, order), pentagonal_series(order)]]
    if identity_id == "limit_const1":
        return [[limit_series(RecurrenceSpec.constant_one(), order), K(1, order)]]
    if identity_id == "limit_fk":
        k = p["k"]
        return [[limit_series(RecurrenceSpec.power_difference(k), order), uchimura_weighted(k, order)]]
    if identity_id == "limit_dilcher":
        k = p["k"]
        return [[limit_series(RecurrenceSpec.dilcher(k), order), dilcher_lhs(k, order)]]
    if identity_id == "limit_stability":
        return [_stability_sides(order)]
    if identity_id == "moment_bell":
        return [list(moment_bell_sides(p["m"], order))]
    if identity_id == "cumulant_gf":
        t = p["T"]
        g = weighted_mgf(t, order)
        return [[bis_log(g), divisor_cumulant_series(t, order)], [g, closed_form_mgf(t, order)]]
    if identity_id == "ksum_logproduct":
        t = p["T"]
        return [[divisor_cumulant_series(t, order), bis_log(closed_form_mgf(t, order))]]
    raise DomainError(f"unknown identity {identity_id!r}")


def suite_tasks(kmax: int, mmax: int, tmax: int) -> list[tuple[str, dict]]:
    """Deterministic enumeration of every check the suite performs."""
    tasks: list[tuple[str, dict]] = [("kluyver", {}), ("normalization", {}), ("pentagonal", {})]
    tasks += [("lambert", {"m": m}) for m in range(0, mmax + 1)]
    tasks += [("ramanujan_type", {"k": k}) for k in range(0, kmax + 1)]
    tasks += [("prefix_power_sum", {"k": k}) for k in range(0, kmax + 1)]
    tasks += [("dilcher", {"k": k}) for k in range(1, kmax + 1)]
    tasks += [("power_sum_gf", {"k": k}) for k in range(0, kmax + 1)]
    tasks += [("limit_const1", {}), ("limit_stability", {})]
    tasks += [("limit_fk", {"k": k}) for k in range(1, kmax + 1)]
    tasks += [("limit_dilcher", {"k": k}) for k in range(1, kmax + 1)]
    tasks += [("moment_bell", {"m": m}) for m in range(1, mmax + 1)]
    if tmax >= 1:
        tasks += [("cumulant_gf", {"T": tmax}), ("ksum_logproduct", {"T": tmax})]
    return tasks


def run_check(identity_id: str, params: dict, order: int, faults: Sequence[Fault] = ()) -> IdentityReport:
    groups = _task_groups(identity_id, params, order)
    return compare(identity_id, params, order, groups, faults)


def _run_check_star(args: tuple) -> IdentityReport:
    return run_check(*args)


def default_jobs() -> int:
    env = os.environ.get("QDIV_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_suite(
    order: int,
    kmax: int = 4,
    mmax: int = 4,
    tmax: int = 4,
    jobs: int | None = 1,
    faults: Sequence[Fault] = (),
) -> list[IdentityReport]:
    """Run every check; the report order never depends on ``jobs``."""
    if order < 0:
        raise DomainError("order must be non-negative")
    tasks = suite_tasks(kmax, mmax, tmax)
    args = [(ident, params, order, tuple(faults)) for ident, params in tasks]
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(args) <= 1:
        return [_run_check_star(a) for a in args]
    with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as pool:
        return list(pool.map(_run_check_star, args))
