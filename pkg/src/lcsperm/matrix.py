"""The LCS matrix L^(n) over the canonical enumeration of S_n.

Entries are stored as one unsigned byte each. Dense construction is the
default up to n = 7; n = 8 (about 1.6 GB) needs ``allow_large=True``. For
larger work the :class:`MatrixFreeOperator` recomputes rows on the fly.

File format (byte exact)::

    b"LCSM" | version (1 byte, = 1) | n (1 byte) | 2 zero bytes | n!*n! entries, row-major
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from ._parallel import default_workers, run_ranges, split_range, triangle_ranges
from .perm import _check_degree, enumeration_array
from .report import VerificationReport

__all__ = [
    "DENSE_LIMIT",
    "LARGE_DENSE_LIMIT",
    "MatrixFormatError",
    "LcsMatrix",
    "DenseOperator",
    "MatrixFreeOperator",
    "as_operator",
    "build_dense",
    "matvec",
    "total_lis",
    "verify_blocks",
    "save",
    "load",
]

DENSE_LIMIT = 7
LARGE_DENSE_LIMIT = 8

MAGIC = b"LCSM"
FORMAT_VERSION = 1
HEADER_SIZE = 8


class MatrixFormatError(ValueError):
    """A matrix file is truncated, has a bad header or a size mismatch."""


@dataclass(frozen=True)
class LcsMatrix:
    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        dim = math.factorial(self.n)
        if self.entries.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} array for n={self.n}, got {self.entries.shape}")
        if self.entries.dtype != np.uint8:
            raise ValueError("entries must be uint8")
        self.entries.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LcsMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.entries, other.entries)

    __hash__ = None


class DenseOperator:
    """Matrix-vector products against a materialized :class:`LcsMatrix`."""

    def __init__(self, matrix: LcsMatrix):
        self.matrix = matrix
        self.n = matrix.n
        self.dim = matrix.dim
        self._real = None

    def matvec(self, v):
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise ValueError(f"vector length {v.shape} does not match dim {self.dim}")
        if np.issubdtype(v.dtype, np.integer):
            return self.matrix.entries.astype(np.int64) @ v.astype(np.int64)
        if self._real is None:
            self._real = self.matrix.entries.astype(np.float64)
        return self._real @ v.astype(np.float64, copy=False)


class MatrixFreeOperator:
    """Applies L^(n) without storing it; each product costs O(n!^2 n log n)."""

    def __init__(self, n: int, workers: int | None = None, kernels=None):
        self.n = n
        self.perms = enumeration_array(n)
        self.dim = self.perms.shape[0]
        self.workers = workers or default_workers()
        self.kernels = kernels or _backend.kernels

    def matvec(self, v):
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise ValueError(f"vector length {v.shape} does not match dim {self.dim}")
        integer = np.issubdtype(v.dtype, np.integer)
        vf = np.ascontiguousarray(v, dtype=np.float64)
        out = np.empty(self.dim, dtype=np.float64)
        run_ranges(
            lambda a, b: self.kernels.matvec_free(self.perms, vf, out, a, b),
            split_range(0, self.dim, self.workers),
            self.workers,
        )
        if integer:
            # exact while |sum| < 2**53, which holds for every tractable n
            return np.rint(out).astype(np.int64)
        return out


def as_operator(obj):
    if isinstance(obj, (DenseOperator, MatrixFreeOperator)):
        return obj
    if isinstance(obj, LcsMatrix):
        return DenseOperator(obj)
    raise TypeError(f"cannot use {type(obj).__name__} as a matrix operator")


def matvec(op, v):
    """Apply L^(n) (dense or matrix-free) to ``v``; integer inputs stay exact."""
    return as_operator(op).matvec(v)


_dense_cache: dict[int, LcsMatrix] = {}


def build_dense(n: int, allow_large: bool = False, workers: int | None = None, kernels=None) -> LcsMatrix:
    """Materialize L^(n), computing the upper triangle and mirroring it.

    Results built with the default kernels are cached; matrices are read-only.
    """
    limit = LARGE_DENSE_LIMIT if allow_large else DENSE_LIMIT
    if n > limit:
        hint = "" if allow_large else " (pass allow_large=True for n = 8)"
        raise MemoryError(f"dense L^({n}) exceeds the limit n <= {limit}{hint}")
    _check_degree(n)
    use_cache = kernels is None
    if use_cache and n in _dense_cache:
        return _dense_cache[n]
    kernels = kernels or _backend.kernels
    workers = workers or default_workers()
    perms = enumeration_array(n)
    dim = perms.shape[0]
    out = np.empty((dim, dim), dtype=np.uint8)
    run_ranges(
        lambda a, b: kernels.lcs_rows_upper(perms, out, a, b),
        triangle_ranges(dim, workers),
        workers,
    )
    kernels.mirror_upper(out)
    matrix = LcsMatrix(n, out)
    if use_cache:
        _dense_cache[n] = matrix
    return matrix


def total_lis(n: int) -> int:
    """Sum of LIS(pi) over all pi in S_n, by enumeration."""
    perms = enumeration_array(n)
    out = np.empty(perms.shape[0], dtype=np.int64)
    _backend.kernels.lis_batch(perms, out)
    return int(out.sum())


def _compare_block(name, actual, expected, row0, col0):
    bad = np.argwhere(actual != expected)
    if bad.size == 0:
        return 0, None
    i, j = (int(x) for x in bad[0])
    return len(bad), {
        "block": name,
        "row": row0 + i,
        "col": col0 + j,
        "expected": int(expected[i, j]),
        "actual": int(actual[i, j]),
    }


def verify_blocks(n: int, big: LcsMatrix | None = None, small: LcsMatrix | None = None) -> VerificationReport:
    """Check the four corner blocks of L^(n+1) against L^(n) and L^(n) + J.

    With m = n!, the corners are the trunks where n+1 is appended (first) or
    prepended (last). Top-left and bottom-right must equal L^(n) + J, the
    off-diagonal corners must equal L^(n). Middle trunks are not checked:
    their diagonal blocks do not share this structure.
    """
    big = big if big is not None else build_dense(n + 1)
    small = small if small is not None else build_dense(n)
    m = small.dim
    B = big.entries.astype(np.int64)
    S = small.entries.astype(np.int64)
    last = B.shape[0] - m
    blocks = [
        ("top_left", B[:m, :m], S + 1, 0, 0),
        ("bottom_right", B[last:, last:], S + 1, last, last),
        ("bottom_left", B[last:, :m], S, last, 0),
        ("top_right", B[:m, last:], S, 0, last),
    ]
    violations = 0
    witness = None
    for name, actual, expected, r0, c0 in blocks:
        count, where = _compare_block(name, actual, expected, r0, c0)
        violations += count
        if witness is None:
            witness = where
    return VerificationReport(
        n=n,
        claim="block_structure",
        mode="exhaustive",
        cases=4 * m * m,
        violations=violations,
        witness=witness,
    )


def save(matrix: LcsMatrix, path) -> None:
    header = MAGIC + bytes([FORMAT_VERSION, matrix.n, 0, 0])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(matrix.entries).tobytes())


def load(path) -> LcsMatrix:
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise MatrixFormatError(f"{path}: truncated header ({len(data)} bytes)")
    if data[:4] != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {data[:4]!r}")
    version, n, r0, r1 = data[4], data[5], data[6], data[7]
    if version != FORMAT_VERSION:
        raise MatrixFormatError(f"{path}: unsupported format version {version}")
    if r0 or r1:
        raise MatrixFormatError(f"{path}: reserved header bytes are not zero")
    if n < 1:
        raise MatrixFormatError(f"{path}: degree must be >= 1")
    dim = math.factorial(n)
    body = len(data) - HEADER_SIZE
    if body != dim * dim:
        raise MatrixFormatError(f"{path}: expected {dim * dim} entry bytes for n={n}, found {body}")
    entries = np.frombuffer(data, dtype=np.uint8, offset=HEADER_SIZE).reshape(dim, dim).copy()
    return LcsMatrix(n, entries)
