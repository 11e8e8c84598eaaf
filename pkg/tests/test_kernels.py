"""Both kernel backends against the pure-Python definitions."""
import numpy as np
import pytest

from lcsperm import _backend
from lcsperm.perm import enumeration_array, lcs_perm, lis

from oracles import brute_lis


def _random_perms(rng, n, m):
    return (np.argsort(rng.random((m, n)), axis=1) + 1).astype(np.uint8)


@pytest.mark.parametrize("n", [1, 2, 5, 9, 14])
def test_lis_batch(kernels, n):
    rng = np.random.default_rng(n)
    seqs = _random_perms(rng, n, 300)
    out = np.empty(300, dtype=np.int64)
    kernels.lis_batch(seqs, out)
    assert out.tolist() == [lis(row) for row in seqs.tolist()]


def test_lis_batch_brute(kernels):
    seqs = enumeration_array(6)
    out = np.empty(seqs.shape[0], dtype=np.int64)
    kernels.lis_batch(seqs, out)
    assert out.tolist() == [brute_lis(row) for row in seqs.tolist()]


@pytest.mark.parametrize("n", [1, 3, 7, 10])
def test_lcs_pairs(kernels, n):
    rng = np.random.default_rng(100 + n)
    a, b = _random_perms(rng, n, 500), _random_perms(rng, n, 500)
    out = np.empty(500, dtype=np.int64)
    kernels.lcs_pairs(a, b, out)
    assert out.tolist() == [lcs_perm(x, y) for x, y in zip(a.tolist(), b.tolist())]


def test_lcs_against(kernels):
    perms = enumeration_array(5)
    a = np.array([3, 5, 1, 4, 2], dtype=np.uint8)
    out = np.empty(perms.shape[0], dtype=np.int64)
    kernels.lcs_against(perms, a, out)
    assert out.tolist() == [lcs_perm(a.tolist(), p) for p in perms.tolist()]


@pytest.mark.parametrize("n", [2, 4, 5])
def test_rows_and_mirror(kernels, n):
    perms = enumeration_array(n)
    dim = perms.shape[0]
    out = np.zeros((dim, dim), dtype=np.uint8)
    kernels.lcs_rows_upper(perms, out, 0, dim // 2)
    kernels.lcs_rows_upper(perms, out, dim // 2, dim)
    kernels.mirror_upper(out)
    ref = [[lcs_perm(a, b) for b in perms.tolist()] for a in perms.tolist()]
    assert out.tolist() == ref


@pytest.mark.parametrize("n", [3, 5])
def test_matvec_free(kernels, n):
    perms = enumeration_array(n)
    dim = perms.shape[0]
    v = np.random.default_rng(n).standard_normal(dim)
    out = np.zeros(dim)
    kernels.matvec_free(perms, v, out, 0, dim)
    ref = np.array([[lcs_perm(a, b) for b in perms.tolist()] for a in perms.tolist()], dtype=float) @ v
    np.testing.assert_allclose(out, ref, rtol=0, atol=1e-12)


def test_backends_agree_on_random_rows():
    names = _backend.available()
    if len(names) < 2:
        pytest.skip("compiled kernels not built")
    perms = enumeration_array(6)
    outs = []
    for name in names:
        k = _backend.load(name)
        out = np.zeros((720, 720), dtype=np.uint8)
        k.lcs_rows_upper(perms, out, 100, 140)
        outs.append(out)
    assert np.array_equal(outs[0], outs[1])


def test_selected_backend_is_importable():
    assert _backend.BACKEND in _backend.BACKENDS
    assert _backend.kernels is _backend.load(_backend.BACKEND)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.load("fortran")
