import json
from math import sqrt

import numpy as np
import pytest

from legpos.basis import BasisSpec, eval_basis_series
from legpos.schoenberg import (
    AmplitudeProblem,
    ConfigError,
    SchoenbergProblem,
    SchoenbergRun,
    estimate_alpha0,
    gram_matrix,
    harmonic_count,
    harmonic_count_at_degree,
    kernel_matrix,
    min_eigenvalue,
    n_schedule,
    psd_test,
    sample_unit_vectors,
    stats_rows,
    stats_to_csv,
    stats_to_json,
)
from legpos.search import critical_alpha


class TestHarmonicCounts:
    def test_examples(self):
        assert harmonic_count(3, 2) == 16
        assert harmonic_count(2, 4) == 20
        assert harmonic_count(1, 3) == 5

    def test_circle_like_counts(self):
        assert [harmonic_count_at_degree(l, 2) for l in range(8)] == [2 * l + 1 for l in range(8)]

    def test_degree_zero(self):
        assert all(harmonic_count(0, d) == 1 for d in range(2, 9))

    def test_rejects(self):
        with pytest.raises(ValueError):
            harmonic_count_at_degree(-1, 2)
        with pytest.raises(ValueError):
            harmonic_count(2, 1)


class TestSchedule:
    def test_d2(self):
        s = n_schedule(2, 2)
        assert s[0] == 1 and s[-1] == 18 and s == sorted(set(s))

    def test_d3(self):
        assert n_schedule(1, 3) == list(range(1, 11))

    def test_level_zero(self):
        assert n_schedule(0, 5) == [1, 2]


class TestSampling:
    def test_unit_norm(self):
        v = sample_unit_vectors(500, 4, 1)
        assert v.shape == (4, 500)
        assert np.max(np.abs(np.linalg.norm(v, axis=0) - 1)) < 1e-14

    def test_mean_near_zero(self):
        v = sample_unit_vectors(10_000, 3, 2)
        assert np.all(np.abs(v.mean(axis=1)) < 3 / sqrt(10_000))

    def test_deterministic(self):
        assert np.array_equal(sample_unit_vectors(7, 3, 5), sample_unit_vectors(7, 3, 5))

    def test_rejects(self):
        with pytest.raises(ValueError):
            sample_unit_vectors(0, 3)


class TestGram:
    def test_orthonormal(self):
        assert np.array_equal(gram_matrix(np.eye(3)), np.eye(3))

    def test_antipodal(self):
        v = np.array([[1.0, -1.0], [0.0, 0.0]])
        assert np.array_equal(gram_matrix(v), [[1, -1], [-1, 1]])

    def test_psd_and_clipped(self):
        z = gram_matrix(sample_unit_vectors(60, 3, 3))
        assert np.linalg.eigvalsh(z)[0] > -1e-12
        assert np.all(np.abs(z) <= 1)


class TestKernel:
    def test_constant(self):
        p = SchoenbergProblem(2, [1.0], (), 0.5)
        z = gram_matrix(sample_unit_vectors(5, 3, 0))
        assert np.array_equal(kernel_matrix(p, 0.3, z), np.ones((5, 5)))

    def test_hits_vanish_at_a0(self):
        p = SchoenbergProblem.planted(2, 2, 0.25, nmax=5)
        assert np.array_equal(p.effective_coefficients(0.25), [1, 1, 0, 0, 0, 0])

    def test_p2_at_zero(self):
        p = SchoenbergProblem(2, [0.0, 0.0, 1.0], (), 0.5)
        assert kernel_matrix(p, 0.0, np.zeros((1, 1)))[0, 0] == -0.5

    @pytest.mark.parametrize("d", [2, 3, 4, 6])
    def test_matches_series(self, d):
        rng = np.random.default_rng(d)
        p = SchoenbergProblem(d, rng.uniform(0, 1, 13), (3, 5, 9), 0.4)
        z = gram_matrix(sample_unit_vectors(12, d + 1, d))
        F = kernel_matrix(p, 0.7, z)
        eff = p.effective_coefficients(0.7)
        ref = np.array([[eval_basis_series(eff, x, BasisSpec(d)) for x in row] for row in z])
        assert np.max(np.abs(F - ref)) < 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            SchoenbergProblem(2, [1.0, -1.0], (), 0.5)
        with pytest.raises(ValueError):
            SchoenbergProblem(2, [1.0], (3,), 0.5)
        with pytest.raises(ValueError):
            SchoenbergProblem(2, [1.0], (), 0.0)


class TestEigen:
    def test_small(self):
        assert min_eigenvalue(np.eye(3)) == 1
        assert min_eigenvalue(np.array([[1.0, 2.0], [2.0, 1.0]])) == pytest.approx(-1, abs=1e-14)

    def test_lanczos_agrees_with_dense(self):
        p = SchoenbergProblem.planted(2, 2, 0.25, nmax=6)
        F = kernel_matrix(p, 0.6, gram_matrix(sample_unit_vectors(600, 3, 9)))
        dense = np.linalg.eigvalsh(F)[0]
        assert min_eigenvalue(F) == pytest.approx(dense, abs=1e-8 * np.abs(F).max())

    def test_psd_test(self):
        p = SchoenbergProblem.planted(2, 2, 0.25, nmax=4)
        v = sample_unit_vectors(40, 3, 4)
        assert psd_test(p, 0.2, v, tol_eig=1e-10 * 40)
        assert not psd_test(p, 0.5, v)


class TestEstimate:
    def test_single_vector_analytic(self):
        # the 1x1 matrix is f_alpha(1) = sum_k eff_k C_k(1); with Legendre C_k(1) = 1
        p = SchoenbergProblem.planted(2, 2, 0.25)
        expected = 0.25 * p.cf.sum() / (p.cf * p.hit_mask).sum()
        stats = estimate_alpha0(p, 1, 3)
        assert stats.mean_alpha == pytest.approx(expected, abs=2e-6)
        assert stats.std_alpha == pytest.approx(0, abs=1e-12)

    def test_deterministic(self):
        p = SchoenbergProblem.planted(3, 2, 0.5, nmax=8)
        assert estimate_alpha0(p, 6, 4, seed=3) == estimate_alpha0(p, 6, 4, seed=3)
        assert estimate_alpha0(p, 6, 4, seed=3) != estimate_alpha0(p, 6, 4, seed=4)

    def test_large_n_recovers(self):
        p = SchoenbergProblem.planted(2, 2, 0.25)
        assert estimate_alpha0(p, 18, 5).mean_alpha == pytest.approx(0.25, rel=0.05)

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            estimate_alpha0(SchoenbergProblem.planted(2, 2, 0.25), 3, 0)


class TestAmplitudeProblem:
    def test_bounded_by_algebraic_threshold(self):
        crit = critical_alpha(5, 2, 3).value
        problem = AmplitudeProblem(5, 2, gamma=3)
        small = estimate_alpha0(problem, 4, 3, tol_eig=4e-10).mean_alpha
        large = estimate_alpha0(problem, 60, 3, tol_eig=6e-9).mean_alpha
        assert small <= large <= crit + 2e-6
        assert large == pytest.approx(crit, abs=0.02)


CONFIG = {"dim": 2, "samples": 3, "tol": 1e-6, "n_list": [1, 4], "a0": 0.25,
          "nmax": 4, "hits": [2, 3, 4], "cf": [1, 1, 1, 1, 1]}


class TestConfig:
    def test_roundtrip(self):
        run = SchoenbergRun.from_config(CONFIG)
        again = SchoenbergRun.from_config(run.to_config())
        assert again.to_config() == run.to_config()
        assert [s.n for s in run.run()] == [1, 4]

    @pytest.mark.parametrize("patch, field", [({"dim": 1}, "dim"), ({"samples": 0}, "samples"),
                                              ({"n_list": []}, "n_list"), ({"extra": 1}, "<root>"),
                                              ({"cf": [1, 1]}, "cf"), ({"hits": [7]}, "hits")])
    def test_field_errors(self, patch, field):
        with pytest.raises(ConfigError) as info:
            SchoenbergRun.from_config({**CONFIG, **patch})
        assert any(e.startswith(field) for e in info.value.errors)

    def test_missing_key(self):
        cfg = dict(CONFIG)
        del cfg["a0"]
        with pytest.raises(ConfigError, match="a0"):
            SchoenbergRun.from_config(cfg)

    def test_tables(self):
        run = SchoenbergRun.from_config({**CONFIG, "dim": 4})
        rows = stats_rows(run.run(), 4, 0.25)
        assert rows[1]["n_scaled"] == pytest.approx(4 ** 0.25)
        lines = stats_to_csv(rows).split("\r\n")
        assert lines[0] == "n,n_scaled,mean_alpha,std_alpha,samples,a0" and len(lines) == 4
        assert json.loads(stats_to_json(rows, run.to_config()))["schema_version"] == 1
