"""Acceptance checks, one or more tests per criterion.

Each test carries a ``criterion`` marker; the summary hook in conftest.py
prints one PASS/FAIL line per criterion at the end of the run.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import eval_legendre

from legpos.amplitude import AmplitudeSpec, amplitude_value, expand_amplitude
from legpos.basis import LEGENDRE, BasisSpec, CoefficientVector, ScalarMode, apply_linear_factor, gegenbauer_limit_check
from legpos.quadrature import coefficients_by_quadrature, gauss_legendre_rule
from legpos.schoenberg import (
    SchoenbergProblem,
    estimate_alpha0,
    gram_matrix,
    harmonic_count,
    harmonic_count_at_degree,
    kernel_matrix,
    min_eigenvalue,
    n_schedule,
    sample_unit_vectors,
)
from legpos.search import BisectionConfig, critical_alpha, landscape

from oracles import bracketed_roots

Q = ScalarMode.rational()
HP = ScalarMode.high_precision(50)

SAMPLES = 50


def report(label, **values):
    print(f"{label}: " + ", ".join(f"{k}={v}" for k, v in values.items()))


@pytest.mark.criterion(1, "two-factor identity, 100 rational pairs, exact")
def test_two_factor_identity():
    rng = random.Random(2024)
    start = time.perf_counter()
    for _ in range(100):
        x1 = Fraction(rng.randint(-999, 999), rng.randint(1, 999))
        x2 = Fraction(rng.randint(-999, 999), rng.randint(1, 999))
        v = CoefficientVector(LEGENDRE, (Fraction(1),), Q)
        v = apply_linear_factor(apply_linear_factor(v, 1, -x1), 1, -x2)
        assert v.coeffs == (x1 * x2 + Fraction(1, 3), -(x1 + x2), Fraction(2, 3))
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(2, "recurrence and quadrature coefficients agree to 1e-30, M <= 20")
def test_dual_path():
    start = time.perf_counter()
    tol = HP.convert("1e-30")
    worst = HP.zero
    for M in range(21):
        for alpha in ("0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7", "0.8", "0.9"):
            spec = AmplitudeSpec(M, alpha, 2, 3)
            rec = expand_amplitude(spec, LEGENDRE, HP)
            quad = coefficients_by_quadrature(lambda x: amplitude_value(spec, x, HP), M + 2, M + 1,
                                              LEGENDRE, HP, degree=M + 1)
            worst = max(worst, max(abs(a - b) for a, b in zip(rec.coeffs, quad.coeffs)))
    elapsed = time.perf_counter() - start
    report("dual path", max_discrepancy=HP.ctx.nstr(worst, 5), seconds=round(elapsed, 1))
    assert worst < tol
    assert elapsed < 60


@pytest.mark.criterion(3, "Golub-Welsch nodes and moments, N <= 50, 1e-12")
def test_golub_welsch():
    start = time.perf_counter()
    worst_nodes = worst_moment = 0.0
    for N in range(1, 51):
        rule = gauss_legendre_rule(N)
        nodes = np.array(rule.nodes)
        roots = bracketed_roots(lambda z: eval_legendre(N, z), N)
        assert len(roots) == N
        worst_nodes = max(worst_nodes, np.max(np.abs(nodes - roots)))
        for k in range(2 * N):
            exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
            worst_moment = max(worst_moment, abs(rule.integrate(lambda x: x ** k) - exact))
    elapsed = time.perf_counter() - start
    report("golub-welsch", nodes=worst_nodes, moments=worst_moment, seconds=round(elapsed, 1))
    assert worst_nodes < 1e-12 and worst_moment < 1e-12
    assert elapsed < 30


@pytest.mark.slow
@pytest.mark.criterion(4, "planted problem recovered within 5% at n = 2H(l_min, d)")
@pytest.mark.parametrize("d, a0", [(2, 0.25), (3, 0.5), (4, 0.5)])
def test_schoenberg_recovery(d, a0):
    l_min = 2
    n = 2 * harmonic_count(l_min, d)
    problem = SchoenbergProblem.planted(d, l_min, a0)
    stats = estimate_alpha0(problem, n, SAMPLES, seed=d, tol_eig=1e-10 * n)
    rel = abs(stats.mean_alpha - a0) / a0
    report(f"recovery d={d}", n=n, mean=stats.mean_alpha, std=stats.std_alpha, rel_error=rel)
    assert rel <= 0.05


@pytest.mark.slow
@pytest.mark.criterion(5, "mean estimate non-increasing over the n schedule within 1 pooled SE")
@pytest.mark.parametrize("d, a0", [(2, 0.25), (3, 0.5), (4, 0.5)])
def test_overestimation_trend(d, a0):
    problem = SchoenbergProblem.planted(d, 2, a0)
    series = [estimate_alpha0(problem, n, SAMPLES, seed=100 + d, tol_eig=1e-10 * n)
              for n in n_schedule(2, d)]
    for prev, cur in zip(series, series[1:]):
        pooled = np.sqrt(prev.std_alpha ** 2 / prev.samples + cur.std_alpha ** 2 / cur.samples)
        assert cur.mean_alpha <= prev.mean_alpha + pooled, (prev.n, cur.n)
    report(f"trend d={d}", means=[round(s.mean_alpha, 4) for s in series])
    assert series[0].mean_alpha >= a0 - 1e-6


def printed_closed_form(l, d):
    return {
        2: (l + 1) ** 2,
        3: Fraction((l + 1) * (2 + l) * (2 * l + 3), 6),
        4: Fraction((l + 1) * (l + 2) ** 2 * (l + 3), 12),
        5: Fraction((1 + l) * (2 + l) * (3 + l) * (4 + l) * (5 + 2 * l), 120),
    }[d]


@pytest.mark.criterion(6, "summed per-degree counts equal the closed-form H(l, d)")
def test_harmonic_counts():
    for d in (2, 3, 4, 5):
        for l in range(11):
            cumulative = sum(harmonic_count_at_degree(m, d) for m in range(l + 1))
            assert cumulative == harmonic_count(l, d) == printed_closed_form(l, d)


@pytest.mark.criterion(7, "dimension monotonicity: exact embedding and computed alpha_crit")
@pytest.mark.parametrize("d", [2, 3, 4])
def test_embedding_bit_identical(d):
    rng = np.random.default_rng(d)
    problem = SchoenbergProblem(d, rng.uniform(0, 1, 9), (2, 5), 0.3)
    for n in (3, 17, 40):
        v = sample_unit_vectors(n, d + 1, rng)
        for extra in (1, 3):
            padded = np.vstack([v, np.zeros((extra, n))])
            z, zp = gram_matrix(v), gram_matrix(padded)
            assert np.array_equal(z, zp)
            assert np.array_equal(kernel_matrix(problem, 0.45, z), kernel_matrix(problem, 0.45, zp))


@pytest.mark.slow
@pytest.mark.criterion(7, "dimension monotonicity: exact embedding and computed alpha_crit")
def test_critical_alpha_grows_with_dimension():
    eps = 1e-6
    config = BisectionConfig(epsilon=eps)
    for beta in (1, 2, 3):
        for M in range(21):
            d2 = critical_alpha(M, beta, beta + 1, LEGENDRE, config).value
            d3 = critical_alpha(M, beta, beta + 1, BasisSpec(3), config).value
            assert d3 >= d2 - 2 * eps, (M, beta, d2, d3)


@pytest.mark.slow
@pytest.mark.criterion(8, "landscape profile over M in [100,150] within 1e-3 of [100,125]")
def test_landscape_stabilization():
    result = landscape(range(100, 151), [2.0], lambda b: 3.0, LEGENDRE, BisectionConfig(epsilon=1e-6))
    assert all(c.status == "ok" for c in result.cells)
    half = result.profile(100, 125)[2.0]
    full = result.profile(100, 150)[2.0]
    report("landscape", max_100_125=half, max_100_150=full, change=full - half)
    assert abs(full - half) < 1e-3


@pytest.mark.criterion(9, "Gegenbauer large-d limit, n <= 4")
def test_large_d_limit():
    from math import factorial
    start = time.perf_counter()
    for n in range(5):
        for z in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            target = z ** n / factorial(n)
            errors = [abs(gegenbauer_limit_check(n, z, d) - target) for d in (10, 100, 1000, 10_000)]
            assert errors[-1] <= Fraction(1, 100)
            if n == 0:
                assert all(e == 0 for e in errors)
            else:
                assert all(b < a for a, b in zip(errors, errors[1:])), (n, z, errors)
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(10, "non-negative coefficients give PSD kernels, 100 random cases")
def test_forward_direction():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst = np.inf
    for _ in range(100):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, 101))
        cf = rng.uniform(0, 1, int(rng.integers(1, 31)))
        problem = SchoenbergProblem(d, cf, (), 1.0)
        v = sample_unit_vectors(n, d + 1, rng)
        lowest = min_eigenvalue(kernel_matrix(problem, 0.0, gram_matrix(v)))
        worst = min(worst, lowest / n)
        assert lowest >= -1e-10 * n
    report("forward direction", worst_scaled_eigenvalue=worst)
    assert time.perf_counter() - start < 60
