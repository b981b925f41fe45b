"""Sizes of Sha for the reductions E_p and the counting functions built on them."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .arith import squarefree_decompose, squarefree_decompose_many
from .curve import ApTable
from .errors import InvalidArgument, OutOfRangeError


class ShaRecord(NamedTuple):
    p: int
    ap: int
    d: int
    s: int
    r: int
    sha: int


def sha_size(p: int, ap: int) -> ShaRecord:
    """Write 4p - a_p^2 = s^2 r with r squarefree; #Sha_p is s^2, or s^2/4 when that is even."""
    p, ap = int(p), int(ap)
    d = 4 * p - ap * ap
    if d <= 0:
        raise InvalidArgument(f"a_p^2 >= 4p for p={p}, a_p={ap}")
    s, r = squarefree_decompose(d)
    sha = s * s if d & 1 else s * s // 4
    return ShaRecord(p, ap, d, s, r, sha)


@dataclass(frozen=True, eq=False)
class ShaTable:
    base: ApTable
    d: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    sha: np.ndarray = field(repr=False)

    @property
    def primes(self) -> np.ndarray:
        return self.base.primes

    @property
    def traces(self) -> np.ndarray:
        return self.base.traces

    @property
    def xmax(self) -> int:
        return self.base.xmax

    def __len__(self) -> int:
        return len(self.d)

    @property
    def records(self) -> list[ShaRecord]:
        cols = (self.primes, self.traces, self.d, self.s, self.r, self.sha)
        return [ShaRecord(*row) for row in zip(*(c.tolist() for c in cols))]

    def cut(self, x: int) -> int:
        """Number of records with p <= x; raises if x is beyond the table."""
        if x > self.xmax:
            raise OutOfRangeError(f"x={x} exceeds table xmax={self.xmax}")
        return self.base.count_up_to(x)


def build_sha_table(table: ApTable) -> ShaTable:
    d = 4 * table.primes - table.traces * table.traces
    s, r = squarefree_decompose_many(d)
    sha = np.where(d & 1, s * s, (s * s) // 4)
    for arr in (d, s, r, sha):
        arr.flags.writeable = False
    return ShaTable(table, d, s, r, sha)


def pi_ts(table: ShaTable, x: int) -> int:
    """Number of good p <= x with trivial Sha_p."""
    k = table.cut(x)
    return int(np.count_nonzero(table.sha[:k] == 1))


def pi_n(table: ShaTable, n: int, x: int) -> int:
    """Number of good p <= x with n^2 dividing #Sha_p."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    k = table.cut(x)
    return int(np.count_nonzero(table.sha[:k] % (n * n) == 0))


def d_xy(table: ShaTable, x: int, y: float) -> int:
    """D(x, y): the sum of pi_n(x) over integers n in [ceil(y), floor(2 sqrt x)]."""
    if not 1 <= y <= 2 * math.sqrt(x):
        raise InvalidArgument(f"need 1 <= y <= 2 sqrt(x), got y={y}")
    top = math.isqrt(4 * x)
    k = table.cut(x)
    # n^2 | t^2 iff n | t, where #Sha_p = t^2
    roots = np.where(table.d[:k] & 1, table.s[:k], table.s[:k] // 2)
    return int(sum(np.count_nonzero(roots % n == 0) for n in range(math.ceil(y), top + 1)))


def s_m(table: ShaTable, m: int, x: int) -> int:
    """S_m(x): primes p <= x with m (4p - a_p^2) a perfect square, tested directly."""
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    k = table.cut(x)
    count = 0
    for d in table.d[:k].tolist():
        v = m * d
        root = math.isqrt(v)
        count += root * root == v
    return count


def s_m_kernel(table: ShaTable, m: int, x: int) -> int:
    """S_m(x) via squarefree kernels: m d is a square iff kernel(m) == kernel(d)."""
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    k = table.cut(x)
    km = squarefree_decompose(m)[1]
    return int(np.count_nonzero(table.r[:k] == km))


def sha_histogram(table: ShaTable, x: int) -> dict[int, int]:
    k = table.cut(x)
    return dict(sorted(Counter(table.sha[:k].tolist()).items()))
