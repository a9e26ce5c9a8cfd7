from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from qdiv.dag_model import cumulants_exact, pmf_exact, raw_moment_exact
from qdiv.errors import ConfigError
from qdiv.simulation import (
    METHODS,
    SimConfig,
    chi_square_gof,
    chunk_rng,
    exact_references,
    moments_from_counts,
    pmf_numeric,
    sample_batch,
    sample_counts,
    sample_gamma,
    simulate,
)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=0, p=0.5, samples=10),
        dict(n=3, p=0.0, samples=10),
        dict(n=3, p=1.0, samples=10),
        dict(n=3, p=0.5, samples=0),
        dict(n=3, p=0.5, samples=10, method="magic"),
        dict(n=3, p=0.5, samples=10, seed=-1),
        dict(n=3, p=0.5, samples=10, ci_level=1.0),
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        SimConfig(**kwargs)


@pytest.mark.parametrize("method", METHODS)
def test_single_vertex_is_deterministic(method):
    report = simulate(SimConfig(n=1, p=0.5, samples=10, seed=7, method=method, bootstrap=50))
    assert report.cumulants[0] == 1.0
    assert report.cumulants[1:] == (0.0, 0.0, 0.0, 0.0)


@pytest.mark.parametrize("method", METHODS)
def test_nearly_complete_graph(method):
    eps = 1e-9
    draws = sample_batch(8, 1 - eps, method, chunk_rng(3, 0), 2000)
    assert np.all(draws == 8)
    assert sample_gamma(SimConfig(n=8, p=1 - eps, samples=1, method=method), chunk_rng(1, 0)) == 8


@pytest.mark.parametrize("method", METHODS)
def test_two_vertices_success_rate(method):
    draws = sample_batch(2, 0.3, method, chunk_rng(11, 0), 100000)
    assert set(np.unique(draws)) <= {1, 2}
    # Pr(h = 2) = p; 5 sigma band
    assert abs(np.mean(draws == 2) - 0.3) < 5 * np.sqrt(0.3 * 0.7 / 100000)


def test_pmf_numeric_matches_exact():
    for n, q in ((6, 0.5), (25, 0.99), (40, 0.1)):
        exact = [float(p(Fraction(q))) for p in pmf_exact(n).probs]
        assert np.allclose(pmf_numeric(n, q), exact, rtol=1e-12, atol=1e-300)


def test_counts_independent_of_workers():
    cfg = SimConfig(n=7, p=0.4, samples=40000, seed=9)
    assert np.array_equal(sample_counts(cfg, 1), sample_counts(cfg, 3))


def test_seed_changes_stream():
    a = sample_counts(SimConfig(n=7, p=0.4, samples=5000, seed=1))
    b = sample_counts(SimConfig(n=7, p=0.4, samples=5000, seed=2))
    assert not np.array_equal(a, b)


def test_plugin_cumulants_on_known_histogram():
    # outcomes 1, 2, 2, 3: mean 2, variance 1/2, skew 0, kappa_4 = mu_4 - 3 mu_2^2 = 1/2 - 3/4
    raw, kappa = moments_from_counts(np.array([1, 2, 1]), tmax=4)
    assert raw[0] == pytest.approx([2.0, 4.5, 11.0, 28.5])
    assert kappa[0] == pytest.approx([2.0, 0.5, 0.0, -0.25])


def test_exact_references_match_polynomials():
    q = Fraction(1, 3)
    raw, kappa = exact_references(6, q)
    cs = cumulants_exact(6, 5)
    assert raw == [raw_moment_exact(6, k)(q) for k in range(1, 6)]
    assert kappa == [cs[t](q) for t in range(1, 6)]


def test_report_is_reproducible_and_serialisable():
    cfg = SimConfig(n=10, p=0.5, samples=30000, seed=42, bootstrap=200)
    a, b = simulate(cfg).to_json(), simulate(cfg, workers=2).to_json()
    assert a == b
    data = json.loads(a)
    assert data["config"]["seed"] == 42
    assert len(data["cumulants"]["limit"]) == 5
    assert sum(data["counts"]) == 30000
    csv_text = simulate(cfg).to_csv()
    assert csv_text.splitlines()[0].startswith("n,p,samples,seed,method")
    assert len(csv_text.splitlines()) == 11


def test_exact_within_bootstrap_interval():
    report = simulate(SimConfig(n=12, p=0.5, samples=100000, seed=5))
    for t in (0, 1):
        lo, hi = report.cumulants_ci[t]
        assert lo <= report.exact_cumulants[t] <= hi


def test_limit_reference_gap_shrinks():
    # n - kappa_1 approaches K_1(q); the gap is the exact-vs-limit defect
    gaps = []
    for n in (5, 10, 20, 40):
        r = simulate(SimConfig(n=n, p=0.5, samples=1, bootstrap=1))
        gaps.append(abs(r.exact_cumulants[0] - r.limit_cumulants[0]))
    assert gaps == sorted(gaps, reverse=True)
    assert gaps[-1] < 1e-9


def test_chi_square_detects_wrong_distribution():
    rng = chunk_rng(0, 0)
    draws = sample_batch(6, 0.5, "pure-birth", rng, 50000)
    counts = np.bincount(draws, minlength=7)[1:]
    _, p_ok = chi_square_gof(counts, pmf_numeric(6, 0.5))
    _, p_bad = chi_square_gof(counts, pmf_numeric(6, 0.45))
    assert p_ok > 1e-3
    assert p_bad < 1e-6
