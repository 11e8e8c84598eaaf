"""numpy implementations of the kernels in ``_ckernels.pyx``.

Same signatures and output conventions; used when the extension is not built
or when ``LCSPERM_BACKEND=python``. Patience sorting is vectorized across
rows: for a batch of sequences the tails arrays are stored as one 2-D array
padded with a sentinel, so ``bisect_left`` becomes a row-wise count.
"""
import numpy as np

MAX_DEGREE = 255
_SENTINEL = 1 << 10  # above any uint8 value


def _lis_rows(seqs):
    m, n = seqs.shape
    tails = np.full((m, n), _SENTINEL, dtype=np.int16)
    rows = np.arange(m)
    for k in range(n):
        x = seqs[:, k].astype(np.int16)
        slot = (tails < x[:, None]).sum(axis=1)
        tails[rows, slot] = x
    return (tails < _SENTINEL).sum(axis=1)


def _positions(perms):
    # pos[r, v] = 0-based position of value v in perms[r]
    m, n = perms.shape
    pos = np.empty((m, n + 1), dtype=np.uint8)
    pos[np.arange(m)[:, None], perms] = np.arange(n, dtype=np.uint8)
    return pos


def lis_batch(seqs, out):
    seqs = np.asarray(seqs)
    if seqs.shape[0]:
        out[:] = _lis_rows(seqs)


def lcs_pairs(a, b, out, chunk=1 << 16):
    a, b = np.asarray(a), np.asarray(b)
    for s in range(0, a.shape[0], chunk):
        pa = _positions(a[s:s + chunk])
        rows = np.arange(pa.shape[0])[:, None]
        out[s:s + chunk] = _lis_rows(pa[rows, b[s:s + chunk]])


def lcs_against(perms, a, out):
    perms = np.asarray(perms)
    a = np.asarray(a)
    pos = np.empty(a.shape[0] + 1, dtype=np.uint8)
    pos[a] = np.arange(a.shape[0], dtype=np.uint8)
    out[:] = _lis_rows(pos[perms])


_BLOCK_ENTRIES = 1 << 18


def _row_block(perms, start, stop):
    # LCS(perms[i], perms[j]) for i in [start, stop) and every j
    pos = _positions(perms[start:stop])
    N, n = perms.shape
    seqs = pos[:, perms]  # (rows, N, n)
    return _lis_rows(seqs.reshape(-1, n)).reshape(stop - start, N)


def _blocks(perms, start, stop):
    step = max(1, _BLOCK_ENTRIES // perms.shape[0])
    for s in range(start, stop, step):
        yield s, min(stop, s + step)


def lcs_rows_upper(perms, out, start, stop):
    perms = np.asarray(perms)
    for s, e in _blocks(perms, start, stop):
        block = _row_block(perms, s, e)
        for i in range(s, e):
            out[i, i:] = block[i - s, i:]


def mirror_upper(out):
    for i in range(out.shape[0] - 1):
        out[i + 1:, i] = out[i, i + 1:]


def matvec_free(perms, v, out, start, stop):
    perms = np.asarray(perms)
    v = np.asarray(v)
    for s, e in _blocks(perms, start, stop):
        out[s:e] = _row_block(perms, s, e) @ v
