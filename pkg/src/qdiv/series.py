"""Exact polynomials, truncated power series in q, and series in z over them.

Coefficients are :class:`fractions.Fraction` values everywhere; nothing is
ever rounded. A :class:`QSeries` carries a fixed truncation order ``N`` and
represents an element of ``Q[q] / (q^(N+1))``. Binary operations insist on
equal orders; use :meth:`QSeries.truncate` to drop precision explicitly.

The multiplication kernels skip zero coefficients, so products with sparse
factors such as ``1 - q^j`` cost O(N) rather than O(N^2).
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Iterator, Sequence, TypeVar

from qdiv.errors import (
    DomainError,
    LengthError,
    NotInvertibleError,
    OrderMismatchError,
)

__all__ = [
    "BiSeries",
    "Polynomial",
    "QSeries",
    "as_rational",
    "bis_add",
    "bis_exp",
    "bis_inv",
    "bis_log",
    "bis_mul",
    "pochhammer_finite",
    "pochhammer_tail",
    "qs_add",
    "qs_compose_power",
    "qs_div_factor",
    "qs_exp",
    "qs_from_coeffs",
    "qs_from_json",
    "qs_inv",
    "qs_log",
    "qs_monomial",
    "qs_mul",
    "qs_mul_factor",
    "qs_neg",
    "qs_one",
    "qs_scale",
    "qs_shift",
    "qs_sub",
    "qs_to_json",
    "qs_zero",
    "rational_str",
    "zseries_exp",
    "zseries_inv",
    "zseries_log",
]

_ZERO = Fraction(0)
_ONE = Fraction(1)

R = TypeVar("R")


def as_rational(value: Any) -> Fraction:
    """Coerce ``value`` to a Fraction without any rounding.

    Accepts ints, Fractions, other :class:`numbers.Rational` instances and
    strings such as ``"-3/4"``. Floats are rejected on purpose.
    """
    if type(value) is Fraction:
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def rational_str(value: Fraction) -> str:
    """Lowest-terms ``"p/q"`` form; integers print without a denominator."""
    return str(as_rational(value))


def _freeze(values: Iterable) -> tuple:
    return tuple(v if type(v) is Fraction else Fraction(v) for v in values)


# ---------------------------------------------------------------------------
# Polynomial
# ---------------------------------------------------------------------------


class Polynomial:
    """Exact polynomial over the rationals, ``coeffs[i]`` multiplies ``x**i``.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [as_rational(v) for v in coeffs]
        while c and not c[-1]:
            c.pop()
        self._c = tuple(c)

    @classmethod
    def _raw(cls, c: list) -> Polynomial:
        while c and not c[-1]:
            c.pop()
        obj = object.__new__(cls)
        obj._c = _freeze(c)
        return obj

    @classmethod
    def constant(cls, value: Any) -> Polynomial:
        return cls([value])

    @classmethod
    def x(cls) -> Polynomial:
        return cls([0, 1])

    @classmethod
    def monomial(cls, k: int, coeff: Any = 1) -> Polynomial:
        if k < 0:
            raise DomainError("monomial exponent must be non-negative")
        return cls([0] * k + [coeff])

    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i < len(self._c):
            return self._c[i]
        return _ZERO

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._c)

    def __bool__(self) -> bool:
        return bool(self._c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self._c == other._c
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return self._c == Polynomial([other])._c
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("Polynomial", self._c))

    def __repr__(self) -> str:
        return f"Polynomial([{', '.join(rational_str(c) for c in self._c)}])"

    def __str__(self) -> str:
        return _format_terms(self._c, "x") or "0"

    def _coerce(self, other: Any) -> Polynomial | None:
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return Polynomial([other])
        return None

    def __add__(self, other: Any) -> Polynomial:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._c, o._c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        obj = object.__new__(Polynomial)
        obj._c = tuple(-v for v in self._c)
        return obj

    def __sub__(self, other: Any) -> Polynomial:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Any) -> Polynomial:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Any) -> Polynomial:
        if isinstance(other, Polynomial):
            a, b = self._c, other._c
            if not a or not b:
                return Polynomial()
            out: list = [0] * (len(a) + len(b) - 1)
            bnz = [(j, v) for j, v in enumerate(b) if v]
            for i, u in enumerate(a):
                if not u:
                    continue
                for j, v in bnz:
                    out[i + j] += u * v
            return Polynomial._raw(out)
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            c = as_rational(other)
            if not c:
                return Polynomial()
            obj = object.__new__(Polynomial)
            obj._c = tuple(c * v for v in self._c)
            return obj
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise DomainError("negative powers of a polynomial are not polynomials")
        result = Polynomial([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __call__(self, x: Any) -> Any:
        """Evaluate by Horner's rule; exact for rational ``x``."""
        if isinstance(x, (int, Rational)) and not isinstance(x, bool):
            x = as_rational(x)
            acc = _ZERO
        else:
            acc = 0
        for c in reversed(self._c):
            acc = acc * x + c
        return acc

    def evalf(self, x: float) -> float:
        """Horner evaluation in double precision."""
        acc = 0.0
        for c in reversed(self._c):
            acc = acc * x + float(c)
        return acc

    def to_qseries(self, order: int) -> QSeries:
        """Read the polynomial as a series in q, dropping powers above ``order``."""
        c = self._c[: order + 1]
        return QSeries._raw(c + (_ZERO,) * (order + 1 - len(c)))

    def to_json(self) -> list[str]:
        return [rational_str(c) for c in self._c]


def _format_terms(coeffs: Sequence[Fraction], var: str) -> str:
    parts = []
    for i, c in enumerate(coeffs):
        if not c:
            continue
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            power = var if i == 1 else f"{var}^{i}"
            body = power if mag == 1 else f"{mag}*{power}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return ""
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


# ---------------------------------------------------------------------------
# QSeries
# ---------------------------------------------------------------------------


class QSeries:
    """Element of ``Q[q]/(q^(N+1))`` with coefficient list of length ``N+1``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable = (), order: int | None = None):
        c = tuple(as_rational(v) for v in coeffs)
        if order is None:
            if not c:
                raise LengthError("order is required for an empty coefficient list")
            order = len(c) - 1
        if order < 0:
            raise DomainError(f"truncation order must be >= 0, got {order}")
        if len(c) > order + 1:
            raise LengthError(f"{len(c)} coefficients do not fit truncation order {order}")
        self._c = c + (_ZERO,) * (order + 1 - len(c))

    @classmethod
    def _raw(cls, c: tuple) -> QSeries:
        obj = object.__new__(cls)
        obj._c = c
        return obj

    @property
    def order(self) -> int:
        return len(self._c) - 1

    @property
    def coeffs(self) -> tuple:
        return self._c

    def __getitem__(self, m: int) -> Fraction:
        return self._c[m]

    def __len__(self) -> int:
        return len(self._c)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._c)

    def __bool__(self) -> bool:
        return any(self._c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, QSeries):
            return self._c == other._c
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("QSeries", self._c))

    def __repr__(self) -> str:
        return f"QSeries([{', '.join(rational_str(c) for c in self._c)}], order={self.order})"

    def __str__(self) -> str:
        body = _format_terms(self._c, "q") or "0"
        return f"{body} + O(q^{self.order + 1})"

    def truncate(self, order: int) -> QSeries:
        """Explicitly drop every coefficient above ``order``."""
        if order > self.order:
            raise OrderMismatchError(
                f"cannot raise precision from {self.order} to {order}"
            )
        if order < 0:
            raise DomainError("truncation order must be >= 0")
        return QSeries._raw(self._c[: order + 1])

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, or None for zero."""
        for i, c in enumerate(self._c):
            if c:
                return i
        return None

    def __add__(self, other: Any) -> QSeries:
        if isinstance(other, QSeries):
            return qs_add(self, other)
        return NotImplemented

    def __sub__(self, other: Any) -> QSeries:
        if isinstance(other, QSeries):
            return qs_sub(self, other)
        return NotImplemented

    def __neg__(self) -> QSeries:
        return qs_neg(self)

    def __mul__(self, other: Any) -> QSeries:
        if isinstance(other, QSeries):
            return qs_mul(self, other)
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return qs_scale(other, self)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> QSeries:
        if isinstance(other, QSeries):
            return qs_mul(self, qs_inv(other))
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return qs_scale(1 / as_rational(other), self)
        return NotImplemented

    def __pow__(self, k: int) -> QSeries:
        if k < 0:
            return qs_inv(self) ** (-k)
        result = qs_one(self.order)
        base = self
        while k:
            if k & 1:
                result = qs_mul(result, base)
            k >>= 1
            if k:
                base = qs_mul(base, base)
        return result

    def to_json(self) -> dict:
        return qs_to_json(self)


def _check_orders(a: QSeries, b: QSeries) -> int:
    if len(a._c) != len(b._c):
        raise OrderMismatchError(
            f"truncation orders differ: {a.order} vs {b.order}"
        )
    return len(a._c) - 1


def qs_from_coeffs(values: Sequence, order: int) -> QSeries:
    """Series with the given low-order coefficients, zero-padded to ``order``."""
    return QSeries(values, order)


def qs_zero(order: int) -> QSeries:
    return QSeries((), order)


def qs_one(order: int) -> QSeries:
    return QSeries((1,), order)


def qs_monomial(k: int, order: int, coeff: Any = 1) -> QSeries:
    """``coeff * q**k``; the zero series when ``k > order``."""
    if k < 0:
        raise DomainError("negative exponents are not representable")
    c = [_ZERO] * (order + 1)
    if k <= order:
        c[k] = as_rational(coeff)
    return QSeries._raw(tuple(c))


def qs_add(a: QSeries, b: QSeries) -> QSeries:
    _check_orders(a, b)
    return QSeries._raw(tuple(x + y for x, y in zip(a._c, b._c)))


def qs_sub(a: QSeries, b: QSeries) -> QSeries:
    _check_orders(a, b)
    return QSeries._raw(tuple(x - y for x, y in zip(a._c, b._c)))


def qs_neg(a: QSeries) -> QSeries:
    return QSeries._raw(tuple(-x for x in a._c))


def qs_scale(c: Any, a: QSeries) -> QSeries:
    c = as_rational(c)
    if not c:
        return qs_zero(a.order)
    return QSeries._raw(tuple(c * x for x in a._c))


def qs_mul(a: QSeries, b: QSeries) -> QSeries:
    """Truncated Cauchy product."""
    n = _check_orders(a, b)
    anz = [(i, v) for i, v in enumerate(a._c) if v]
    bnz = [(j, v) for j, v in enumerate(b._c) if v]
    if len(anz) > len(bnz):
        anz, bnz = bnz, anz
    out: list = [0] * (n + 1)
    for i, u in anz:
        lim = n - i
        for j, v in bnz:
            if j > lim:
                break
            out[i + j] += u * v
    return QSeries._raw(_freeze(out))


def qs_inv(a: QSeries) -> QSeries:
    """Multiplicative inverse by forward substitution; needs ``a[0] != 0``."""
    c = a._c
    a0 = c[0]
    if not a0:
        raise NotInvertibleError("constant coefficient is zero")
    n = len(c) - 1
    inv0 = 1 / a0
    anz = [(i, v) for i, v in enumerate(c) if v and i]
    b: list = [inv0] + [_ZERO] * n
    for m in range(1, n + 1):
        acc = 0
        for i, v in anz:
            if i > m:
                break
            bm = b[m - i]
            if bm:
                acc += v * bm
        b[m] = -acc * inv0 if acc else _ZERO
    return QSeries._raw(_freeze(b))


def qs_exp(a: QSeries) -> QSeries:
    """Truncated exponential; requires a zero constant term."""
    c = a._c
    if c[0]:
        raise DomainError("exp needs a series with zero constant term")
    n = len(c) - 1
    # m e_m = sum_{i=1}^{m} i a_i e_{m-i}
    anz = [(i, i * v) for i, v in enumerate(c) if v]
    e: list = [_ONE] + [_ZERO] * n
    for m in range(1, n + 1):
        acc = 0
        for i, iv in anz:
            if i > m:
                break
            acc += iv * e[m - i]
        e[m] = Fraction(acc) / m
    return QSeries._raw(tuple(e))


def qs_log(a: QSeries) -> QSeries:
    """Truncated logarithm; requires constant term exactly 1."""
    c = a._c
    if c[0] != 1:
        raise DomainError("log needs a series with constant term 1")
    n = len(c) - 1
    # m l_m = m a_m - sum_{i=1}^{m-1} i l_i a_{m-i}
    lg: list = [_ZERO] * (n + 1)
    anz = [(j, v) for j, v in enumerate(c) if v and j]
    for m in range(1, n + 1):
        acc = m * c[m]
        for j, v in anz:
            if j >= m:
                break
            i = m - j
            if lg[i]:
                acc -= i * lg[i] * v
        lg[m] = Fraction(acc) / m
    return QSeries._raw(tuple(lg))


def qs_shift(a: QSeries, k: int) -> QSeries:
    """Multiply by ``q**k``."""
    if k < 0:
        raise DomainError("negative shifts are not representable")
    n = a.order
    if k > n:
        return qs_zero(n)
    return QSeries._raw((_ZERO,) * k + a._c[: n + 1 - k])


def qs_compose_power(a: QSeries, m: int) -> QSeries:
    """Substitute ``q -> q**m``."""
    if m < 1:
        raise DomainError("substitution power must be a positive integer")
    n = a.order
    out = [_ZERO] * (n + 1)
    for i in range(0, n // m + 1):
        out[i * m] = a._c[i]
    return QSeries._raw(tuple(out))


def qs_mul_factor(a: QSeries, j: int, coeff: Any = 1) -> QSeries:
    """Multiply by the binomial ``1 - coeff * q**j`` in O(N)."""
    if j < 0:
        raise DomainError("factor exponent must be non-negative")
    c = a._c
    n = len(c) - 1
    coeff = as_rational(coeff)
    if j > n or not coeff:
        return a
    out = list(c)
    for m in range(j, n + 1):
        v = c[m - j]
        if v:
            out[m] -= coeff * v
    return QSeries._raw(tuple(out))


def qs_div_factor(a: QSeries, j: int) -> QSeries:
    """Divide by ``1 - q**j`` (``j >= 1``) in O(N)."""
    if j < 1:
        raise NotInvertibleError("1 - q^0 is not invertible")
    out = list(a._c)
    for m in range(j, len(out)):
        if out[m - j]:
            out[m] += out[m - j]
    return QSeries._raw(tuple(out))


def pochhammer_finite(n: int, order: int) -> QSeries:
    """``(q;q)_n = prod_{j=1}^{n} (1 - q^j)`` truncated at ``order``."""
    if n < 0:
        raise DomainError("n must be non-negative")
    s = qs_one(order)
    for j in range(1, min(n, order) + 1):
        s = qs_mul_factor(s, j)
    return s


def pochhammer_tail(m: int, order: int) -> QSeries:
    """``(q^m;q)_inf = prod_{j>=m} (1 - q^j)``; factors beyond ``order`` are 1."""
    if m < 1:
        raise DomainError("tail product must start at j >= 1")
    s = qs_one(order)
    for j in range(m, order + 1):
        s = qs_mul_factor(s, j)
    return s


def qs_to_json(a: QSeries) -> dict:
    return {"order": a.order, "coeffs": [rational_str(c) for c in a._c]}


def qs_from_json(data: dict) -> QSeries:
    order = data["order"]
    coeffs = data["coeffs"]
    if not isinstance(order, int) or len(coeffs) != order + 1:
        raise LengthError("serialized series must carry exactly order+1 coefficients")
    return QSeries([Fraction(c) for c in coeffs], order)


# ---------------------------------------------------------------------------
# Series in z over an arbitrary coefficient ring
# ---------------------------------------------------------------------------
#
# The helpers below only use +, -, * between ring elements and scalar
# multiplication by Fractions, so they serve both QSeries coefficients
# (BiSeries) and exact Polynomial coefficients (finite-n cumulants).


def zseries_exp(a: Sequence[R], one: R) -> list[R]:
    """Coefficients of ``exp(sum a_t z^t)`` for ``a[0] == 0``."""
    e: list = [one]
    for t in range(1, len(a)):
        acc = None
        for i in range(1, t + 1):
            if not a[i] or not e[t - i]:
                continue
            term = Fraction(i, t) * (a[i] * e[t - i])
            acc = term if acc is None else acc + term
        e.append(acc if acc is not None else one * 0)
    return e


def zseries_log(a: Sequence[R], zero: R) -> list[R]:
    """Coefficients of ``log(sum a_t z^t)`` for ``a[0] == 1``."""
    lg: list = [zero]
    for t in range(1, len(a)):
        acc = a[t]
        for i in range(1, t):
            if not lg[i] or not a[t - i]:
                continue
            acc = acc - Fraction(i, t) * (lg[i] * a[t - i])
        lg.append(acc)
    return lg


def zseries_inv(a: Sequence[R], inv0: R) -> list[R]:
    """Coefficients of ``1 / sum a_t z^t`` given ``inv0 = 1/a[0]``."""
    b: list = [inv0]
    for t in range(1, len(a)):
        acc = None
        for i in range(1, t + 1):
            if not a[i] or not b[t - i]:
                continue
            term = a[i] * b[t - i]
            acc = term if acc is None else acc + term
        b.append(-(inv0 * acc) if acc is not None else inv0 * 0)
    return b


class BiSeries:
    """Series in z truncated at ``z^(T+1)`` whose coefficients are QSeries."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[QSeries], zorder: int | None = None):
        c = tuple(coeffs)
        if not c:
            raise LengthError("a BiSeries needs at least the z^0 coefficient")
        qorder = c[0].order
        for s in c:
            if not isinstance(s, QSeries):
                raise TypeError("BiSeries coefficients must be QSeries")
            if s.order != qorder:
                raise OrderMismatchError("all z-coefficients must share one q-order")
        if zorder is None:
            zorder = len(c) - 1
        if len(c) > zorder + 1:
            raise LengthError(f"{len(c)} coefficients do not fit z-order {zorder}")
        self._c = c + (qs_zero(qorder),) * (zorder + 1 - len(c))

    @classmethod
    def _raw(cls, c: Sequence[QSeries]) -> BiSeries:
        obj = object.__new__(cls)
        obj._c = tuple(c)
        return obj

    @classmethod
    def zero(cls, zorder: int, qorder: int) -> BiSeries:
        return cls._raw([qs_zero(qorder)] * (zorder + 1))

    @classmethod
    def one(cls, zorder: int, qorder: int) -> BiSeries:
        return cls._raw([qs_one(qorder)] + [qs_zero(qorder)] * zorder)

    @property
    def zorder(self) -> int:
        return len(self._c) - 1

    @property
    def qorder(self) -> int:
        return self._c[0].order

    @property
    def coeffs(self) -> tuple:
        return self._c

    def __getitem__(self, t: int) -> QSeries:
        return self._c[t]

    def __iter__(self) -> Iterator[QSeries]:
        return iter(self._c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, BiSeries):
            return self._c == other._c
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("BiSeries", self._c))

    def __repr__(self) -> str:
        return f"BiSeries(zorder={self.zorder}, qorder={self.qorder})"

    def __add__(self, other: Any) -> BiSeries:
        if isinstance(other, BiSeries):
            return bis_add(self, other)
        return NotImplemented

    def __neg__(self) -> BiSeries:
        return BiSeries._raw([-s for s in self._c])

    def __sub__(self, other: Any) -> BiSeries:
        if isinstance(other, BiSeries):
            return bis_add(self, -other)
        return NotImplemented

    def __mul__(self, other: Any) -> BiSeries:
        if isinstance(other, BiSeries):
            return bis_mul(self, other)
        if isinstance(other, QSeries):
            return BiSeries._raw([qs_mul(other, s) for s in self._c])
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return BiSeries._raw([qs_scale(other, s) for s in self._c])
        return NotImplemented

    __rmul__ = __mul__


def _check_bi(a: BiSeries, b: BiSeries) -> None:
    if a.zorder != b.zorder or a.qorder != b.qorder:
        raise OrderMismatchError(
            f"bivariate orders differ: (z {a.zorder}, q {a.qorder}) "
            f"vs (z {b.zorder}, q {b.qorder})"
        )


def bis_add(a: BiSeries, b: BiSeries) -> BiSeries:
    _check_bi(a, b)
    return BiSeries._raw([qs_add(x, y) for x, y in zip(a._c, b._c)])


def bis_mul(a: BiSeries, b: BiSeries) -> BiSeries:
    _check_bi(a, b)
    t_max = a.zorder
    out = []
    for t in range(t_max + 1):
        acc = qs_zero(a.qorder)
        for i in range(t + 1):
            if a._c[i] and b._c[t - i]:
                acc = qs_add(acc, qs_mul(a._c[i], b._c[t - i]))
        out.append(acc)
    return BiSeries._raw(out)


def bis_exp(a: BiSeries) -> BiSeries:
    if a._c[0]:
        raise DomainError("exp needs a zero z^0 coefficient")
    return BiSeries._raw(zseries_exp(a._c, qs_one(a.qorder)))


def bis_log(a: BiSeries) -> BiSeries:
    if a._c[0] != qs_one(a.qorder):
        raise DomainError("log needs the z^0 coefficient to be exactly 1")
    return BiSeries._raw(zseries_log(a._c, qs_zero(a.qorder)))


def bis_inv(a: BiSeries) -> BiSeries:
    """Inverse in the bivariate ring; the z^0 coefficient must be a unit."""
    return BiSeries._raw(zseries_inv(a._c, qs_inv(a._c[0])))

