"""Permutations of [n], their LIS/LCS statistics and the trunk enumeration of S_n.

Permutations use one-line notation with 1-based values: ``Permutation((2, 1, 3))``
maps 1 -> 2, 2 -> 1, 3 -> 3.

The canonical enumeration of S_{k+1} is built from that of S_k in k+1 trunks
of k! permutations each. Trunk i (1-based) lists every permutation of S_k, in
order, with the value k+1 inserted after position k+1-i. Trunk 1 therefore
appends k+1 and trunk k+1 prepends it::

    S_2 = [1,2], [2,1]
    S_3 = [1,2,3], [2,1,3], [1,3,2], [2,3,1], [3,1,2], [3,2,1]
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ENUMERATION_LIMIT",
    "Permutation",
    "compose",
    "inverse",
    "reverse",
    "lis",
    "lcs_perm",
    "lcs_dp_oracle",
    "enumerate_permutations",
    "enumeration_array",
    "rank",
    "unrank",
]

#: Largest degree materialized eagerly by :func:`enumerate_permutations`.
ENUMERATION_LIMIT = 9


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1, ..., n} in one-line notation."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(x) for x in self.entries)
        object.__setattr__(self, "entries", entries)
        n = len(entries)
        if n < 1:
            raise ValueError("a permutation needs degree n >= 1")
        if sorted(entries) != list(range(1, n + 1)):
            raise ValueError(f"{list(entries)} is not a permutation of 1..{n}")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def reversal(cls, n: int) -> Permutation:
        """rev(id): the identity read right-to-left."""
        return cls(tuple(range(n, 0, -1)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def __call__(self, k: int) -> int:
        """Image of the 1-based point ``k``."""
        return self.entries[k - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Permutation({list(self.entries)})"

    def to_json(self) -> list[int]:
        return list(self.entries)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> Permutation:
        return cls(tuple(data))


def _as_perm(a) -> Permutation:
    return a if isinstance(a, Permutation) else Permutation(tuple(a))


def _check_same_degree(a: Permutation, b: Permutation) -> None:
    if a.n != b.n:
        raise ValueError(f"degree mismatch: {a.n} vs {b.n}")


def compose(a, b) -> Permutation:
    """Return a o b, i.e. ``k -> a(b(k))``."""
    a, b = _as_perm(a), _as_perm(b)
    _check_same_degree(a, b)
    return Permutation(tuple(a.entries[x - 1] for x in b.entries))


def inverse(a) -> Permutation:
    a = _as_perm(a)
    inv = [0] * a.n
    for pos, value in enumerate(a.entries, start=1):
        inv[value - 1] = pos
    return Permutation(tuple(inv))


def reverse(a) -> Permutation:
    a = _as_perm(a)
    return Permutation(a.entries[::-1])


def _lis_sequence(seq: Iterable[int]) -> int:
    # patience sorting: tails[k] is the smallest tail of an increasing run of length k+1
    tails: list[int] = []
    for x in seq:
        k = bisect_left(tails, x)
        if k == len(tails):
            tails.append(x)
        else:
            tails[k] = x
    return len(tails)


def lis(a) -> int:
    """Length of the longest strictly increasing subsequence."""
    return _lis_sequence(_as_perm(a).entries)


def lcs_perm(a, b) -> int:
    """LCS length of two permutations of equal degree, via LIS(a^-1 o b)."""
    a, b = _as_perm(a), _as_perm(b)
    _check_same_degree(a, b)
    return _lis_sequence(compose(inverse(a), b).entries)


def lcs_dp_oracle(a: Sequence[int], b: Sequence[int]) -> int:
    """Textbook O(len(a) * len(b)) dynamic program for the LCS length.

    Works on arbitrary sequences; kept as an independent check on
    :func:`lcs_perm`.
    """
    a, b = list(a), list(b)
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def _check_degree(n: int, limit: int = ENUMERATION_LIMIT) -> None:
    if n < 1:
        raise ValueError("degree must be >= 1")
    if n > limit:
        raise MemoryError(
            f"refusing to materialize {math.factorial(n)} permutations (n={n} > {limit}); "
            "use unrank() to stream"
        )


@lru_cache(maxsize=None)
def _enumeration(n: int) -> np.ndarray:
    if n == 1:
        arr = np.ones((1, 1), dtype=np.uint8)
    else:
        prev = _enumeration(n - 1)
        k = n - 1
        m = prev.shape[0]
        arr = np.empty((n * m, n), dtype=np.uint8)
        for trunk in range(n):
            pos = k - trunk  # number of entries before the new value
            block = arr[trunk * m:(trunk + 1) * m]
            block[:, :pos] = prev[:, :pos]
            block[:, pos] = n
            block[:, pos + 1:] = prev[:, pos:]
    arr.setflags(write=False)
    return arr


def enumeration_array(n: int) -> np.ndarray:
    """The canonical enumeration as a read-only ``(n!, n)`` uint8 array."""
    _check_degree(n)
    return _enumeration(n)


def enumerate_permutations(n: int) -> list[Permutation]:
    """All n! permutations of [n] in the canonical trunk order."""
    return [Permutation(tuple(row)) for row in enumeration_array(n).tolist()]


def rank(a) -> int:
    """Index of ``a`` in the canonical enumeration of S_n."""
    entries = list(_as_perm(a).entries)
    index = 0
    while len(entries) > 1:
        k = len(entries)
        pos = entries.index(k)
        index += (k - 1 - pos) * math.factorial(k - 1)
        del entries[pos]
    return index


def unrank(n: int, index: int) -> Permutation:
    """Inverse of :func:`rank`; works for any n without materializing S_n."""
    if not 0 <= index < math.factorial(n):
        raise ValueError(f"index {index} out of range for S_{n}")
    entries = [1]
    digits = []
    for k in range(n, 1, -1):
        block = math.factorial(k - 1)
        digits.append((k, index // block))
        index %= block
    for k, trunk in reversed(digits):
        entries.insert(k - 1 - trunk, k)
    return Permutation(tuple(entries))
