# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Mirrors ``_pykernels`` function for function.

All permutation arrays are C-contiguous uint8 with 1-based values and
degree <= 255. Every kernel releases the GIL so callers can split row
ranges across threads.
"""
from libc.stdlib cimport malloc, free

MAX_DEGREE = 255


cdef inline int _lis(const unsigned char* seq, int n, int* tails) noexcept nogil:
    cdef int length = 0
    cdef int lo, hi, mid, i, x
    for i in range(n):
        x = seq[i]
        lo = 0
        hi = length
        while lo < hi:
            mid = (lo + hi) >> 1
            if tails[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        tails[lo] = x
        if lo == length:
            length += 1
    return length


cdef inline int _lcs(const unsigned char* a, const unsigned char* b, int n,
                     unsigned char* pos, unsigned char* seq, int* tails) noexcept nogil:
    cdef int k
    for k in range(n):
        pos[a[k]] = <unsigned char>k
    for k in range(n):
        seq[k] = pos[b[k]]
    return _lis(seq, n, tails)


def lis_batch(const unsigned char[:, ::1] seqs, long long[::1] out):
    """out[r] = LIS of row r."""
    cdef Py_ssize_t m = seqs.shape[0], r
    cdef int n = <int>seqs.shape[1]
    cdef int* tails = <int*>malloc((n + 1) * sizeof(int))
    if tails == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(m):
                out[r] = _lis(&seqs[r, 0], n, tails)
    finally:
        free(tails)


def lcs_pairs(const unsigned char[:, ::1] a, const unsigned char[:, ::1] b, long long[::1] out):
    """out[r] = LCS(a[r], b[r]) for permutations."""
    cdef Py_ssize_t m = a.shape[0], r
    cdef int n = <int>a.shape[1]
    cdef int* tails = <int*>malloc((n + 1) * sizeof(int))
    cdef unsigned char* pos = <unsigned char*>malloc(n + 2)
    cdef unsigned char* seq = <unsigned char*>malloc(n + 1)
    if tails == NULL or pos == NULL or seq == NULL:
        free(tails); free(pos); free(seq)
        raise MemoryError()
    try:
        with nogil:
            for r in range(m):
                out[r] = _lcs(&a[r, 0], &b[r, 0], n, pos, seq, tails)
    finally:
        free(tails); free(pos); free(seq)


def lcs_against(const unsigned char[:, ::1] perms, const unsigned char[::1] a, long long[::1] out):
    """out[j] = LCS(a, perms[j])."""
    cdef Py_ssize_t m = perms.shape[0], j
    cdef int n = <int>perms.shape[1]
    cdef int* tails = <int*>malloc((n + 1) * sizeof(int))
    cdef unsigned char* pos = <unsigned char*>malloc(n + 2)
    cdef unsigned char* seq = <unsigned char*>malloc(n + 1)
    if tails == NULL or pos == NULL or seq == NULL:
        free(tails); free(pos); free(seq)
        raise MemoryError()
    try:
        with nogil:
            for j in range(m):
                out[j] = _lcs(&a[0], &perms[j, 0], n, pos, seq, tails)
    finally:
        free(tails); free(pos); free(seq)


def lcs_rows_upper(const unsigned char[:, ::1] perms, unsigned char[:, ::1] out,
                   Py_ssize_t start, Py_ssize_t stop):
    """Fill out[i, j] for start <= i < stop and j >= i."""
    cdef Py_ssize_t N = perms.shape[0], i, j
    cdef int n = <int>perms.shape[1], k
    cdef int* tails = <int*>malloc((n + 1) * sizeof(int))
    cdef unsigned char* pos = <unsigned char*>malloc(n + 2)
    cdef unsigned char* seq = <unsigned char*>malloc(n + 1)
    if tails == NULL or pos == NULL or seq == NULL:
        free(tails); free(pos); free(seq)
        raise MemoryError()
    try:
        with nogil:
            for i in range(start, stop):
                for k in range(n):
                    pos[perms[i, k]] = <unsigned char>k
                for j in range(i, N):
                    for k in range(n):
                        seq[k] = pos[perms[j, k]]
                    out[i, j] = <unsigned char>_lis(seq, n, tails)
    finally:
        free(tails); free(pos); free(seq)


def mirror_upper(unsigned char[:, ::1] out):
    """Copy the strict upper triangle onto the lower one in place."""
    cdef Py_ssize_t N = out.shape[0], i, j
    with nogil:
        for i in range(N):
            for j in range(i + 1, N):
                out[j, i] = out[i, j]


def matvec_free(const unsigned char[:, ::1] perms, const double[::1] v, double[::1] out,
                Py_ssize_t start, Py_ssize_t stop):
    """out[i] = sum_j LCS(perms[i], perms[j]) * v[j] for start <= i < stop."""
    cdef Py_ssize_t N = perms.shape[0], i, j
    cdef int n = <int>perms.shape[1], k
    cdef double acc
    cdef int* tails = <int*>malloc((n + 1) * sizeof(int))
    cdef unsigned char* pos = <unsigned char*>malloc(n + 2)
    cdef unsigned char* seq = <unsigned char*>malloc(n + 1)
    if tails == NULL or pos == NULL or seq == NULL:
        free(tails); free(pos); free(seq)
        raise MemoryError()
    try:
        with nogil:
            for i in range(start, stop):
                for k in range(n):
                    pos[perms[i, k]] = <unsigned char>k
                acc = 0.0
                for j in range(N):
                    for k in range(n):
                        seq[k] = pos[perms[j, k]]
                    acc = acc + _lis(seq, n, tails) * v[j]
                out[i] = acc
    finally:
        free(tails); free(pos); free(seq)
