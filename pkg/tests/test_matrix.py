import math

import numpy as np
import pytest

from lcsperm import matrix as lm
from lcsperm.perm import enumerate_permutations, lcs_perm

from oracles import brute_lis


def test_build_dense_2():
    assert lm.build_dense(2).entries.tolist() == [[2, 1], [1, 2]]


@pytest.mark.parametrize("n", range(1, 6))
def test_entries_match_definition(n, kernels):
    ps = enumerate_permutations(n)
    m = lm.build_dense(n, kernels=kernels)
    assert m.entries.tolist() == [[lcs_perm(a, b) for b in ps] for a in ps]


@pytest.mark.parametrize("n", range(1, 7))
def test_invariants(n):
    L = lm.build_dense(n).entries
    assert L.dtype == np.uint8
    assert np.array_equal(L, L.T)
    assert np.all(np.diag(L) == n)
    assert L.min() >= 1 and L.max() <= n
    assert np.all(L.astype(np.int64).sum(axis=1) == lm.total_lis(n))


def test_row_sums_3():
    # 3 + 2 + 2 + 2 + 2 + 1
    assert sum(brute_lis(p.entries) for p in enumerate_permutations(3)) == 12
    assert set(lm.build_dense(3).entries.astype(int).sum(axis=1)) == {12}


def test_principal_block_of_l4():
    L4 = lm.build_dense(4).entries.astype(int)
    L3 = lm.build_dense(3).entries.astype(int)
    assert np.array_equal(L4[:6, :6], L3 + 1)


def test_read_only():
    with pytest.raises(ValueError):
        lm.build_dense(3).entries[0, 0] = 1


def test_dense_limit():
    with pytest.raises(MemoryError):
        lm.build_dense(8)
    with pytest.raises(MemoryError):
        lm.build_dense(9, allow_large=True)


def test_total_lis():
    assert lm.total_lis(1) == 1
    assert lm.total_lis(2) == 3
    assert lm.total_lis(3) == 12
    assert lm.total_lis(4) == sum(brute_lis(p.entries) for p in enumerate_permutations(4))


class TestMatvec:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_all_ones_is_eigenvector(self, n):
        op = lm.DenseOperator(lm.build_dense(n))
        E = np.ones(op.dim, dtype=np.int64)
        assert np.array_equal(lm.matvec(op, E), lm.total_lis(n) * E)

    def test_zero(self):
        op = lm.DenseOperator(lm.build_dense(4))
        assert np.all(lm.matvec(op, np.zeros(24)) == 0)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_matrix_free_agrees(self, n, kernels):
        dense = lm.DenseOperator(lm.build_dense(n))
        free = lm.MatrixFreeOperator(n, kernels=kernels)
        rng = np.random.default_rng(n)
        for _ in range(3):
            v = rng.standard_normal(dense.dim)
            np.testing.assert_allclose(free.matvec(v), dense.matvec(v), rtol=0, atol=1e-12)
        E = np.ones(dense.dim, dtype=np.int64)
        assert np.array_equal(free.matvec(E), lm.total_lis(n) * E)

    def test_matrix_free_with_workers(self):
        v = np.random.default_rng(0).standard_normal(120)
        one = lm.MatrixFreeOperator(5, workers=1).matvec(v)
        three = lm.MatrixFreeOperator(5, workers=3).matvec(v)
        assert np.array_equal(one, three)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            lm.matvec(lm.build_dense(3), np.ones(5))
        with pytest.raises(ValueError):
            lm.MatrixFreeOperator(3).matvec(np.ones(5))

    def test_parallel_build_identical(self):
        a = lm.build_dense(5, workers=1, kernels=lm._backend.kernels)
        b = lm.build_dense(5, workers=4, kernels=lm._backend.kernels)
        assert a == b


class TestBlocks:
    @pytest.mark.parametrize("n", range(1, 6))
    def test_pass(self, n):
        report = lm.verify_blocks(n)
        assert report.passed and report.witness is None
        assert report.cases == 4 * math.factorial(n) ** 2

    def test_corrupted_matrix_fails(self):
        big = lm.build_dense(4)
        entries = big.entries.copy()
        entries[20, 3] += 1
        report = lm.verify_blocks(3, big=lm.LcsMatrix(4, entries))
        assert not report.passed
        assert report.violations == 1
        assert report.witness["block"] == "bottom_left"
        assert (report.witness["row"], report.witness["col"]) == (20, 3)
        assert report.witness["actual"] == report.witness["expected"] + 1

    def test_middle_trunks_are_not_l_plus_j(self):
        # inserting 3 mid-position into [1,2] and [2,1] gives [1,3,2], [2,3,1]
        assert lcs_perm([1, 3, 2], [2, 3, 1]) == 1
        L3 = lm.build_dense(3).entries.astype(int)
        L2 = lm.build_dense(2).entries.astype(int)
        assert not np.array_equal(L3[2:4, 2:4], L2 + 1)


class TestFileFormat:
    def test_round_trip(self, tmp_path):
        m = lm.build_dense(4)
        path = tmp_path / "l4.lcsm"
        lm.save(m, path)
        assert lm.load(path) == m

    def test_header(self, tmp_path):
        path = tmp_path / "l5.lcsm"
        lm.save(lm.build_dense(5), path)
        data = path.read_bytes()
        assert data[:8] == b"LCSM\x01\x05\x00\x00"
        assert len(data) == 8 + 120 * 120
        assert lm.load(path).dim == 120

    def test_truncated(self, tmp_path):
        path = tmp_path / "t.lcsm"
        lm.save(lm.build_dense(4), path)
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(lm.MatrixFormatError):
            lm.load(path)
        path.write_bytes(b"LCS")
        with pytest.raises(lm.MatrixFormatError):
            lm.load(path)

    @pytest.mark.parametrize("header", [b"XCSM\x01\x03\x00\x00", b"LCSM\x02\x03\x00\x00", b"LCSM\x01\x03\x00\x01"])
    def test_bad_header(self, tmp_path, header):
        path = tmp_path / "b.lcsm"
        path.write_bytes(header + bytes(36))
        with pytest.raises(lm.MatrixFormatError):
            lm.load(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            lm.load(tmp_path / "nope.lcsm")
