import math
from fractions import Fraction

import numpy as np
import pytest

from lcsperm import distributions as D
from lcsperm import matrix as lm
from lcsperm.perm import Permutation, enumerate_permutations, lcs_perm, rank
from lcsperm.spectra import extreme_eigen


class TestDistribution:
    def test_uniform(self):
        U = D.uniform(3)
        assert np.allclose(U.weights, 1 / 6)
        assert sum(Fraction(1, 6) for _ in range(6)) == 1

    def test_rejects_negative_and_unnormalized(self):
        with pytest.raises(ValueError):
            D.Distribution(2, [1.5, -0.5])
        with pytest.raises(ValueError):
            D.Distribution(2, [0.5, 0.6])
        with pytest.raises(ValueError):
            D.Distribution(2, [1.0])

    def test_renormalizes_within_tolerance(self):
        P = D.Distribution(2, [0.5 + 4e-13, 0.5])
        assert P.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_json_dense_and_sparse(self):
        P = D.Distribution(3, [0.5, 0, 0, 0.25, 0, 0.25])
        assert D.Distribution.from_json(P.to_json()).weights.tolist() == P.weights.tolist()
        sparse = P.to_json(sparse=True)
        assert sparse == {"n": 3, "support": [[0, 0.5], [3, 0.25], [5, 0.25]]}
        assert D.Distribution.from_json(sparse).weights.tolist() == P.weights.tolist()
        with pytest.raises(ValueError):
            D.Distribution.from_json({"n": 3})

    def test_point_mass(self):
        P = D.point_mass(Permutation((2, 3, 1)))
        assert P.support.tolist() == [rank([2, 3, 1])]


class TestExpectation:
    def test_uniform_2(self):
        # (2 + 1 + 1 + 2) / 4
        assert D.expectation_exact(D.uniform(2)) == pytest.approx(1.5, abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_uniform_is_row_sum_average(self, n):
        assert D.expectation_exact(D.uniform(n)) == pytest.approx(lm.total_lis(n) / math.factorial(n), abs=1e-12)

    @pytest.mark.parametrize("n", [3, 5])
    def test_point_mass(self, n):
        for p in enumerate_permutations(n)[::7]:
            assert D.expectation_exact(D.point_mass(p)) == pytest.approx(n, abs=1e-12)

    def test_against_double_sum(self):
        P = D.random_dirichlet(3, seed=1)
        ps = enumerate_permutations(3)
        ref = sum(P.weights[i] * P.weights[j] * lcs_perm(ps[i], ps[j]) for i in range(6) for j in range(6))
        assert D.expectation_exact(P) == pytest.approx(ref, abs=1e-14)

    def test_matrix_free_operator(self):
        P = D.random_dirichlet(4, seed=2)
        assert D.expectation_exact(P, lm.MatrixFreeOperator(4)) == pytest.approx(D.expectation_exact(P), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            D.expectation_exact(D.uniform(3), lm.build_dense(4))

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_decomposition_identity(self, n):
        op = lm.DenseOperator(lm.build_dense(n))
        U = D.uniform(n)
        eu = D.expectation_exact(U, op)
        for seed in range(100):
            P = D.random_dirichlet(n, seed=seed, alpha=0.3)
            d = P.weights - U.weights
            assert D.expectation_exact(P, op) == pytest.approx(d @ op.matvec(d) + eu, abs=1e-9)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_cube_root_bound(self, n):
        for seed in range(20):
            assert D.expectation_exact(D.random_dirichlet(n, seed=seed, alpha=0.1)) >= n ** (1 / 3)


class TestCounterexample:
    def test_n4(self):
        res = D.counterexample(4)
        assert res.lambda_min == pytest.approx(-2.0, abs=1e-9)
        assert res.gap == pytest.approx(2 * res.c ** 2, abs=1e-8)
        assert res.expectation_p0 < res.expectation_uniform
        w = res.p0.weights
        assert w.min() == 0.0
        assert w.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_small_n_marker(self, n):
        res = D.counterexample(n)
        assert res.uniform_optimal and res.p0 is None
        assert res.to_dict()["p0"] is None

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_gap_identity(self, n):
        res = D.counterexample(n)
        assert res.gap > 1e-6
        assert res.gap == pytest.approx(-res.c ** 2 * res.lambda_min, abs=1e-8)
        # c is maximal: the most negative component of c * sign * r is -1/n!
        assert np.count_nonzero(res.p0.weights == 0.0) >= 1

    def test_best_sign_chosen(self):
        res = D.counterexample(5)
        _, r = extreme_eigen(lm.build_dense(5), "smallest")
        dim = r.shape[0]
        cs = [(1 / dim) / np.max(-s * r[s * r < 0]) for s in (1, -1)]
        assert res.c == pytest.approx(max(cs), rel=1e-12)

    def test_to_dict(self):
        d = D.counterexample(4).to_dict()
        assert set(d) >= {"c", "gap", "expectation_uniform", "expectation_p0", "p0"}
        assert len(d["p0"]) == 24

    def test_inconsistency_error(self):
        fake = lm.DenseOperator(lm.build_dense(4))
        fake.matvec = lambda v: 5.0 * np.asarray(v, dtype=float)
        with pytest.raises(D.InconsistencyError):
            D.counterexample(4, op=fake)


class TestSampling:
    def test_alias_table_exact(self):
        w = np.array([0.1, 0.0, 0.6, 0.3])
        table = D.AliasTable(w)
        # probability of outcome k: (prob[k] + sum of (1 - prob[j]) over j aliased to k) / m
        m = len(w)
        mass = table.prob / m
        for j in range(m):
            mass[table.alias[j]] += (1 - table.prob[j]) / m
        np.testing.assert_allclose(mass, w, atol=1e-15)

    def test_point_mass(self):
        a = Permutation((3, 1, 2))
        assert set(D.sample(D.point_mass(a), seed=0, count=50)) == {a}

    def test_uniform_frequencies(self):
        idx = D.sample_indices(D.uniform(3), seed=7, count=60000)
        freq = np.bincount(idx, minlength=6) / 60000
        assert np.all(np.abs(freq - 1 / 6) <= 0.01)

    def test_deterministic(self):
        P = D.random_dirichlet(4, seed=0)
        assert D.sample(P, 11, 200) == D.sample(P, 11, 200)
        assert D.sample(P, 11, 200) != D.sample(P, 12, 200)


class TestMonteCarlo:
    def test_point_mass(self):
        est, se = D.mc_expectation(D.point_mass(Permutation.identity(5)), pairs=1000, seed=0)
        assert est == 5.0 and se == 0.0

    def test_needs_two_pairs(self):
        with pytest.raises(ValueError):
            D.mc_expectation(D.uniform(3), pairs=1, seed=0)

    def test_uniform_4(self, kernels):
        exact = D.expectation_exact(D.uniform(4))
        est, se = D.mc_expectation(D.uniform(4), pairs=200_000, seed=5, kernels=kernels)
        assert abs(est - exact) <= 4 * se

    def test_deterministic_per_worker_count(self):
        P = D.uniform(5)
        a = D.mc_expectation(P, 10_000, seed=3, workers=3)
        assert a == D.mc_expectation(P, 10_000, seed=3, workers=3)
        assert a != D.mc_expectation(P, 10_000, seed=3, workers=1)

    def test_unbiased_over_seeds(self):
        exact = D.expectation_exact(D.uniform(4))
        ests, ses = zip(*(D.mc_expectation(D.uniform(4), 20_000, seed=s) for s in range(50)))
        pooled = math.sqrt(sum(se ** 2 for se in ses)) / 50
        assert abs(np.mean(ests) - exact) <= 4 * pooled


class TestMarginal:
    def test_point_mass(self):
        a = Permutation((2, 4, 1, 3))
        assert D.marginal_lcs(D.point_mass(a), a) == 4.0

    @pytest.mark.parametrize("n", [3, 5])
    def test_uniform_constant(self, n):
        for a in enumerate_permutations(n)[::5]:
            assert D.marginal_lcs(D.uniform(n), a) == pytest.approx(lm.total_lis(n) / math.factorial(n), abs=1e-12)

    def test_unrolls_to_expectation(self):
        P = D.random_dirichlet(4, seed=9)
        total = sum(P.weights[i] * D.marginal_lcs(P, a) for i, a in enumerate(enumerate_permutations(4)))
        assert total == pytest.approx(D.expectation_exact(P), abs=1e-12)
        np.testing.assert_allclose(
            D.marginal_lcs_all(P), [D.marginal_lcs(P, a) for a in enumerate_permutations(4)], atol=1e-12
        )

    def test_mismatch(self):
        with pytest.raises(ValueError):
            D.marginal_lcs(D.uniform(3), Permutation.identity(4))
