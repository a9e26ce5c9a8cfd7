"""Monte Carlo sampling of the reachable-set size in the random acyclic digraph.

Random streams
--------------
Samples are drawn in fixed-size chunks. Chunk ``i`` uses a PCG64 generator
seeded with ``SeedSequence(entropy=seed, spawn_key=(0, i))``; the bootstrap
uses ``spawn_key=(1,)``. SeedSequence hashes entropy and spawn key through
its avalanche mixer, so streams are independent and the output depends
only on the configuration, never on how many worker processes ran.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from qdiv.dag_model import limit_cumulants, pmf_exact
from qdiv.errors import ConfigError
from qdiv.series import zseries_log

METHODS = ("direct-graph", "pure-birth", "inverse-cdf")
CHUNK_SIZE = 1 << 14
TMAX = 5


@dataclass(frozen=True)
class SimConfig:
    n: int
    p: float
    samples: int
    seed: int = 0
    method: str = "pure-birth"
    bootstrap: int = 1000
    ci_level: float = 0.99
    limit_order: int = 60

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.p < 1.0):
            raise ConfigError(f"p must lie strictly between 0 and 1, got {self.p!r}")
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}")
        if self.bootstrap < 1:
            raise ConfigError("bootstrap resample count must be >= 1")
        if not (0.0 < self.ci_level < 1.0):
            raise ConfigError("ci_level must lie strictly between 0 and 1")
        if self.limit_order < 0:
            raise ConfigError("limit_order must be non-negative")

    @property
    def q(self) -> float:
        return 1.0 - self.p


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(0, index))))


def bootstrap_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(1,))))


def pmf_numeric(n: int, q: float) -> np.ndarray:
    """``Pr(X_n = h) = q^(n-h) prod_{j<h} (1 - q^(n-j))`` in double precision.

    The factored form is used instead of Horner on the expanded polynomial,
    whose alternating coefficients cancel badly for large n and q near 1.
    """
    h = np.arange(1, n + 1)
    factors = 1.0 - q ** (n - h[:-1].astype(float))
    prods = np.concatenate([[1.0], np.cumprod(factors)])
    return q ** (n - h).astype(float) * prods


def sample_batch(n: int, p: float, method: str, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` independent outcomes in ``1..n``."""
    if method == "direct-graph":
        # Vertices are visited in topological order, so one sweep settles
        # reachability: j is reached iff some reached i < j has edge i -> j.
        reached = np.zeros((size, n), dtype=bool)
        reached[:, 0] = True
        for j in range(1, n):
            edges = rng.random((size, j)) < p
            reached[:, j] = np.any(edges & reached[:, :j], axis=1)
        return reached.sum(axis=1).astype(np.int64)
    if method == "pure-birth":
        q = 1.0 - p
        s = np.ones(size, dtype=np.int64)
        for _ in range(n - 1):
            s += rng.random(size) < 1.0 - q**s
        return s
    if method == "inverse-cdf":
        cdf = np.cumsum(pmf_numeric(n, 1.0 - p))
        cdf /= cdf[-1]
        h = np.searchsorted(cdf, rng.random(size), side="right") + 1
        return np.minimum(h, n).astype(np.int64)
    raise ConfigError(f"unknown method {method!r}")


def sample_gamma(config: SimConfig, rng: np.random.Generator) -> int:
    return int(sample_batch(config.n, config.p, config.method, rng, 1)[0])


def _chunk_counts(args: tuple) -> np.ndarray:
    n, p, method, seed, index, size = args
    draws = sample_batch(n, p, method, chunk_rng(seed, index), size)
    return np.bincount(draws, minlength=n + 1)[1:]


def sample_counts(config: SimConfig, workers: int = 1) -> np.ndarray:
    """Histogram of ``config.samples`` outcomes; ``counts[h-1]`` counts h."""
    sizes = [CHUNK_SIZE] * (config.samples // CHUNK_SIZE)
    if config.samples % CHUNK_SIZE:
        sizes.append(config.samples % CHUNK_SIZE)
    tasks = [(config.n, config.p, config.method, config.seed, i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            parts = list(pool.map(_chunk_counts, tasks))
    else:
        parts = [_chunk_counts(t) for t in tasks]
    return np.sum(parts, axis=0, dtype=np.int64)


def moments_from_counts(counts: np.ndarray, tmax: int = TMAX) -> tuple[np.ndarray, np.ndarray]:
    """Plug-in raw moments and cumulants, one row per histogram.

    Cumulants come from the moment-to-cumulant recursion applied to the
    centred moments, which avoids cancellation between large raw moments.
    """
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    h = np.arange(1, counts.shape[1] + 1, dtype=float)
    w = counts / counts.sum(axis=1, keepdims=True)
    raw = np.stack([w @ h**k for k in range(1, tmax + 1)], axis=1)
    mean = raw[:, 0]
    dev = h[None, :] - mean[:, None]
    central = [np.ones_like(mean), np.zeros_like(mean)]
    central += [np.sum(w * dev**k, axis=1) for k in range(2, tmax + 1)]
    kappa = [None, np.zeros_like(mean)]
    for t in range(2, tmax + 1):
        acc = central[t].copy()
        for i in range(2, t - 1):
            acc -= math.comb(t - 1, i - 1) * kappa[i] * central[t - i]
        kappa.append(acc)
    kappa[1] = mean
    return raw, np.stack(kappa[1:], axis=1)


def exact_references(n: int, q: Fraction, tmax: int = TMAX) -> tuple[list[Fraction], list[Fraction]]:
    """Exact raw moments and cumulants of ``X_n`` at a rational ``q``.

    Evaluating the pmf polynomials first and taking the log afterwards gives
    the same numbers as evaluating the cumulant polynomials, because
    evaluation at ``q`` is a ring homomorphism, and is far cheaper.
    """
    probs = pmf_exact(n).evaluate(q)
    raw = [sum(h**k * pr for h, pr in enumerate(probs, start=1)) for k in range(tmax + 1)]
    logs = zseries_log([m / math.factorial(k) for k, m in enumerate(raw)], Fraction(0))
    kappa = [math.factorial(t) * logs[t] for t in range(1, tmax + 1)]
    return raw[1:], kappa


def limit_references(n: int, q: Fraction, order: int, tmax: int = TMAX) -> list[Fraction]:
    """Limiting cumulants of ``X_n`` at q from the truncated divisor series.

    ``kappa_1(X_n) ~ n - K_1(q)`` and ``kappa_t(X_n) ~ (-1)^t K_t(q)``.
    """
    out = []
    for t, series in enumerate(limit_cumulants(tmax, order), start=1):
        value = sum(c * q**m for m, c in enumerate(series.coeffs) if c)
        out.append(n - value if t == 1 else (-1) ** t * value)
    return out


def _sig(x: float) -> float:
    return float(f"{x:.12g}")


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    counts: tuple[int, ...]
    moments: tuple[float, ...]
    moments_ci: tuple[tuple[float, float], ...]
    cumulants: tuple[float, ...]
    cumulants_ci: tuple[tuple[float, float], ...]
    exact_moments: tuple[float, ...]
    exact_cumulants: tuple[float, ...]
    limit_cumulants: tuple[float, ...]
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def block(est, ci, exact, limit=None):
            d = {
                "estimate": [_sig(x) for x in est],
                "ci_low": [_sig(lo) for lo, _ in ci],
                "ci_high": [_sig(hi) for _, hi in ci],
                "exact": [_sig(x) for x in exact],
            }
            if limit is not None:
                d["limit"] = [_sig(x) for x in limit]
                d["exact_minus_limit"] = [_sig(a - b) for a, b in zip(exact, limit)]
            return d

        return {
            "config": asdict(self.config),
            "counts": list(self.counts),
            "moments": block(self.moments, self.moments_ci, self.exact_moments),
            "cumulants": block(self.cumulants, self.cumulants_ci, self.exact_cumulants, self.limit_cumulants),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        d = self.to_dict()
        cfg = d["config"]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "p", "samples", "seed", "method", "quantity", "t",
                         "estimate", "ci_low", "ci_high", "exact", "limit"])
        for name in ("moments", "cumulants"):
            blk = d[name]
            for t in range(TMAX):
                limit = blk["limit"][t] if "limit" in blk else ""
                writer.writerow([cfg["n"], cfg["p"], cfg["samples"], cfg["seed"], cfg["method"],
                                 name[:-1], t + 1, blk["estimate"][t], blk["ci_low"][t],
                                 blk["ci_high"][t], blk["exact"][t], limit])
        return buf.getvalue()


def bootstrap_intervals(
    counts: np.ndarray, resamples: int, level: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Percentile intervals for raw moments and cumulants.

    Resampling outcomes with replacement is the same as drawing a
    multinomial histogram with the observed frequencies.
    """
    total = int(counts.sum())
    draws = rng.multinomial(total, counts / total, size=resamples)
    raw, kappa = moments_from_counts(draws)
    alpha = (1.0 - level) / 2.0
    qs = [100 * alpha, 100 * (1 - alpha)]
    return np.percentile(raw, qs, axis=0).T, np.percentile(kappa, qs, axis=0).T


def simulate(config: SimConfig, workers: int = 1) -> SimReport:
    counts = sample_counts(config, workers)
    raw, kappa = moments_from_counts(counts)
    raw_ci, kappa_ci = bootstrap_intervals(counts, config.bootstrap, config.ci_level, bootstrap_rng(config.seed))
    q = Fraction(config.q)
    exact_raw, exact_kappa = exact_references(config.n, q)
    limit = limit_references(config.n, q, config.limit_order)
    return SimReport(
        config=config,
        counts=tuple(int(c) for c in counts),
        moments=tuple(float(x) for x in raw[0]),
        moments_ci=tuple((float(lo), float(hi)) for lo, hi in raw_ci),
        cumulants=tuple(float(x) for x in kappa[0]),
        cumulants_ci=tuple((float(lo), float(hi)) for lo, hi in kappa_ci),
        exact_moments=tuple(float(x) for x in exact_raw),
        exact_cumulants=tuple(float(x) for x in exact_kappa),
        limit_cumulants=tuple(float(x) for x in limit),
    )


def chi_square_gof(counts: np.ndarray, probs: np.ndarray, min_expected: float = 5.0) -> tuple[float, float]:
    """Pearson goodness-of-fit; adjacent cells with tiny expectation are pooled."""
    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(probs, dtype=float) * counts.sum()
    obs_cells, exp_cells = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(counts, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_cells.append(o_acc)
            exp_cells.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc or o_acc:
        if exp_cells:
            obs_cells[-1] += o_acc
            exp_cells[-1] += e_acc
        else:
            obs_cells.append(o_acc)
            exp_cells.append(e_acc)
    if len(obs_cells) < 2:
        return 0.0, 1.0
    exp_arr = np.array(exp_cells)
    exp_arr *= sum(obs_cells) / exp_arr.sum()
    res = stats.chisquare(np.array(obs_cells), exp_arr)
    return float(res.statistic), float(res.pvalue)
