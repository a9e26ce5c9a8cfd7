"""Independent brute-force oracles.

Everything here is deliberately naive: plain integer or Fraction lists,
direct enumeration and no reuse of the library's series machinery.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def mul(a: list, b: list, order: int) -> list:
    out = [0] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x:
            for j, y in enumerate(b[: order + 1 - i]):
                out[i + j] += x * y
    return out


def tail_product(m: int, order: int) -> list:
    """prod_{j>=m} (1 - q^j) mod q^(order+1)."""
    out = [1] + [0] * order
    for j in range(max(m, 1), order + 1):
        factor = [0] * (order + 1)
        factor[0], factor[j] = 1, -1
        out = mul(out, factor, order)
    return out


def sigma(m: int, n: int) -> int:
    return sum(d**m for d in range(1, n + 1) if n % d == 0)


def k_series(m: int, order: int) -> list:
    return [0] + [sigma(m - 1, n) for n in range(1, order + 1)]


def weighted_tail(weight, order: int, start: int = 0) -> list:
    """sum_n w(n) q^n prod_{j>n} (1 - q^j), each product built from scratch."""
    out = [0] * (order + 1)
    for n in range(start, order + 1):
        w = weight(n)
        if w:
            tail = tail_product(n + 1, order)
            for i in range(order + 1 - n):
                out[n + i] += w * tail[i]
    return out


def set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def bell_by_partitions(m: int, u: list):
    """Y_m(u_1..u_m) as a sum over set partitions of {1..m}."""
    total = 0
    for part in set_partitions(list(range(m))):
        term = 1
        for block in part:
            term = term * u[len(block) - 1]
        total = total + term
    return total


def eulerian_by_descents(k: int) -> list:
    if k == 0:
        return [1]
    counts = [0] * k
    for perm in itertools.permutations(range(k)):
        counts[sum(perm[i] > perm[i + 1] for i in range(k - 1))] += 1
    return counts


def bernoulli_akiyama(j: int) -> Fraction:
    """Akiyama-Tanigawa; that algorithm yields B_1 = +1/2, flipped here."""
    a = [Fraction(0)] * (j + 1)
    for m in range(j + 1):
        a[m] = Fraction(1, m + 1)
        for i in range(m, 0, -1):
            a[i - 1] = i * (a[i - 1] - a[i])
    return -a[0] if j == 1 else a[0]


def pmf_bruteforce(n: int) -> list[list[int]]:
    """Pr(X_n = h) as integer coefficient lists in q, by enumerating every graph."""
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    e_total = len(edges)
    out = [[0] * (e_total + 1) for _ in range(n)]
    for mask in range(1 << e_total):
        present = [edges[b] for b in range(e_total) if mask >> b & 1]
        reach = {0}
        for i, j in sorted(present):
            if i in reach:
                reach.add(j)
        e = len(present)
        # (1 - q)^e q^(E - e)
        for r in range(e + 1):
            out[len(reach) - 1][e_total - e + r] += math.comb(e, r) * (-1) ** r
    return out


def trim(c: list) -> list:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c
