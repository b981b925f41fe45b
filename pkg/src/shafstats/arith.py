"""Integer arithmetic kernel: sieving, primality, factorization, Jacobi symbols."""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, InvalidArgument

# Largest bound primes_up_to will accept; the prime array costs ~8 bytes per prime.
MAX_SIEVE_BOUND = 2**34
SIEVE_BLOCK = 2**20
TRIAL_DIVISION_LIMIT = 10**6

# Strong-pseudoprime bases; deterministic for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True, eq=False)
class PrimeSeq:
    bound: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return (int(p) for p in self.primes)

    def __getitem__(self, i):
        return self.primes[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrimeSeq):
            return NotImplemented
        return self.bound == other.bound and np.array_equal(self.primes, other.primes)

    def count_up_to(self, x: int) -> int:
        """pi(x) for x <= bound."""
        if x > self.bound:
            raise InvalidArgument(f"x={x} exceeds sieve bound {self.bound}")
        return int(np.searchsorted(self.primes, x, side="right"))

    def tolist(self) -> list[int]:
        return self.primes.tolist()


class Factorization(NamedTuple):
    n: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> int:
        out = 1
        for q, e in self.factors:
            out *= q**e
        return out


def _simple_sieve(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for q in range(3, math.isqrt(n) + 1, 2):
        if flags[q]:
            flags[q * q :: 2 * q] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_up_to(x: int, block: int = SIEVE_BLOCK) -> PrimeSeq:
    """All primes <= x by a segmented sieve of Eratosthenes.

    >>> primes_up_to(10).tolist()
    [2, 3, 5, 7]
    """
    x = int(x)
    if x < 0:
        raise InvalidArgument("x must be non-negative")
    if x > MAX_SIEVE_BOUND:
        raise CapacityError(f"bound {x} too large for segmented sieve (limit {MAX_SIEVE_BOUND})")
    if x <= block:
        return PrimeSeq(x, _simple_sieve(x))
    base = _simple_sieve(math.isqrt(x))
    chunks = [base]
    lo = int(base[-1]) + 1 if len(base) else 2
    odd_base = base[1:]
    while lo <= x:
        hi = min(lo + block, x + 1)
        seg = np.ones(hi - lo, dtype=bool)
        seg[(lo & 1) :: 2] = False  # evens
        for q in odd_base:
            q = int(q)
            if q * q >= hi:
                break
            start = max(q * q, ((lo + q - 1) // q) * q)
            seg[start - lo :: q] = False
        chunks.append(np.flatnonzero(seg).astype(np.int64) + lo)
        lo = hi
    return PrimeSeq(x, np.concatenate(chunks))


@functools.lru_cache(maxsize=4)
def _cached_primes(x: int) -> np.ndarray:
    return primes_up_to(x).primes


def _small_primes() -> np.ndarray:
    return _cached_primes(TRIAL_DIVISION_LIMIT)


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        y = pow(a, d, n)
        if y == 1 or y == n - 1:
            continue
        for _ in range(s - 1):
            y = y * y % n
            if y == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int, rng: random.Random) -> int:
    # Returns a non-trivial factor of the odd composite n.
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> Factorization:
    """Complete factorization: trial division to 10**6, then Pollard-Brent rho."""
    n = int(n)
    if n < 1:
        raise InvalidArgument("factorize needs n >= 1")
    orig, counts = n, {}
    for q in _small_primes():
        q = int(q)
        if q * q > n:
            break
        if n % q == 0:
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            counts[q] = e
    if n > 1:
        stack = [n]
        rng = random.Random(n)
        while stack:
            c = stack.pop()
            if is_prime(c):
                counts[c] = counts.get(c, 0) + 1
                continue
            r = math.isqrt(c)
            if r * r == c:
                stack += [r, r]
                continue
            g = _pollard_brent(c, rng)
            stack += [g, c // g]
    return Factorization(orig, tuple(sorted(counts.items())))


def squarefree_decompose(n: int) -> tuple[int, int]:
    """The unique (s, r) with n = s*s*r and r squarefree."""
    n = int(n)
    if n < 1:
        raise InvalidArgument("squarefree_decompose needs n >= 1")
    s = r = 1
    for q, e in factorize(n).factors:
        s *= q ** (e // 2)
        if e & 1:
            r *= q
    return s, r


def squarefree_decompose_many(values: Sequence[int] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised squarefree_decompose for arrays of positive integers below 2**62.

    Strips every prime up to the cube root of max(values); whatever remains
    has at most two prime factors, so it is either a perfect square or
    squarefree.
    """
    rem = np.asarray(values, dtype=np.int64).copy()
    if rem.size == 0:
        return rem.copy(), rem.copy()
    if rem.min() < 1:
        raise InvalidArgument("values must be positive")
    s = np.ones_like(rem)
    r = np.ones_like(rem)
    top = int(rem.max())
    cube = int(round(top ** (1 / 3)))
    while cube**3 < top:
        cube += 1
    for q in primes_up_to(cube).primes.tolist():
        idx = np.flatnonzero(rem % q == 0)
        e = np.zeros(len(idx), dtype=np.int64)
        sub = rem[idx]
        while len(idx):
            hit = sub % q == 0
            if not hit.any():
                break
            sub = np.where(hit, sub // q, sub)
            e += hit
        rem[idx] = sub
        s[idx] *= q ** (e // 2)
        r[idx] *= np.where(e & 1, q, 1)
    root = np.sqrt(rem.astype(np.float64)).astype(np.int64)
    # exact correction of the float estimate
    for _ in range(2):
        root = np.where(root * root > rem, root - 1, root)
        root = np.where((root + 1) * (root + 1) <= rem, root + 1, root)
    square = root * root == rem
    s = np.where(square, s * root, s)
    r = np.where(square, r, r * rem)
    return s, r


def is_squarefree(n: int) -> bool:
    return squarefree_decompose(n)[0] == 1


def jacobi(k: int, n: int) -> int:
    """Jacobi symbol (k/n) for odd positive n.

    >>> jacobi(2, 15)
    1
    """
    n = int(n)
    if n <= 0 or n % 2 == 0:
        raise InvalidArgument(f"jacobi modulus must be odd and positive, got {n}")
    k = int(k) % n
    t = 1
    while k:
        while k % 2 == 0:
            k //= 2
            if n % 8 in (3, 5):
                t = -t
        k, n = n, k
        if k % 4 == 3 and n % 4 == 3:
            t = -t
        k %= n
    return t if n == 1 else 0


@functools.lru_cache(maxsize=256)
def jacobi_table(n: int) -> np.ndarray:
    """Array whose k-th entry is (k/n), for 0 <= k < n."""
    if n <= 0 or n % 2 == 0:
        raise InvalidArgument(f"jacobi modulus must be odd and positive, got {n}")
    if n == 1:
        return np.ones(1, dtype=np.int8)
    fac = factorize(n).factors
    out = np.ones(n, dtype=np.int8)
    ks = np.arange(n, dtype=np.int64)
    for q, e in fac:
        if e % 2 == 0:
            out[ks % q == 0] = 0
            continue
        sq = np.full(q, -1, dtype=np.int8)
        sq[(np.arange(q, dtype=np.int64) ** 2) % q] = 1
        sq[0] = 0
        out *= sq[ks % q]
    out.flags.writeable = False
    return out
