"""The fixed curve y^2 = x^3 + a x + b over Q and its Frobenius traces."""

from __future__ import annotations

import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from . import arith
from .errors import BadPrimeError, DisambiguationError, InvalidArgument, SingularCurveError

log = logging.getLogger(__name__)

NAIVE_THRESHOLD = 10**4
# Below this the Hasse interval can hold two multiples of every point order
# on both the curve and its twist, so BSGS is not guaranteed to terminate.
BSGS_MIN_PRIME = 457
BSGS_RETRY_BUDGET = 200
BLOCK_PRIMES = 2048

# j-invariants of the 13 CM curves over Q (class number one orders).
CM_J_INVARIANTS = frozenset(
    {
        0,
        1728,
        -3375,
        8000,
        54000,
        287496,
        -32768,
        16581375,
        -884736,
        -12288000,
        -884736000,
        -147197952000,
        -262537412640768000,
    }
)


@dataclass(frozen=True)
class CurveQ:
    a: int
    b: int
    delta: int
    bad_primes: tuple[int, ...]

    def is_good(self, p: int) -> bool:
        return p > 3 and self.delta % p != 0

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b)


def new_curve(a: int, b: int) -> CurveQ:
    a, b = int(a), int(b)
    delta = -16 * (4 * a**3 + 27 * b**2)
    if delta == 0:
        raise SingularCurveError(f"y^2 = x^3 + {a}x + {b} is singular")
    bad = {2, 3} | {q for q, _ in arith.factorize(abs(delta)).factors}
    return CurveQ(a, b, delta, tuple(sorted(bad)))


def j_invariant(curve: CurveQ) -> Fraction:
    a3 = curve.a**3
    return Fraction(6912 * a3, 4 * a3 + 27 * curve.b**2)


def is_cm(curve: CurveQ) -> bool:
    j = j_invariant(curve)
    return j.denominator == 1 and j.numerator in CM_J_INVARIANTS


def rational_two_torsion(curve: CurveQ) -> list[int]:
    """Rational roots of x^3 + a x + b (all integral, since the cubic is monic)."""
    a, b = curve.a, curve.b
    if b == 0:
        cands = {0}
        if a <= 0:
            r = math.isqrt(-a)
            if r * r == -a:
                cands |= {r, -r}
    else:
        cands = set()
        for q, e in arith.factorize(abs(b)).factors:
            cands = cands or {1}
            cands = {c * q**k for c in cands for k in range(e + 1)}
        cands = cands or {1}
        cands |= {-c for c in cands}
    return sorted(x for x in cands if x**3 + a * x + b == 0)


def has_irrational_two_torsion(curve: CurveQ) -> bool:
    """True when some point of order two is not defined over Q.

    Proxy flag only: a positive density of trivial-Sha reductions is expected
    exactly in this case.
    """
    return len(rational_two_torsion(curve)) < 3


def _check_prime(curve: CurveQ, p: int) -> None:
    if not curve.is_good(p):
        raise BadPrimeError(f"p={p} is bad (or <= 3) for curve {curve.key}")


def ap_naive(curve: CurveQ, p: int) -> int:
    """a_p = -sum_x (x^3+ax+b / p), by a full scan of F_p."""
    p = int(p)
    _check_prime(curve, p)
    a, b = curve.a % p, curve.b % p
    if p < 2**31:
        xs = np.arange(p, dtype=np.int64)
        rhs = ((xs * xs % p) * xs + a * xs + b) % p
        chi = np.full(p, -1, dtype=np.int8)
        chi[xs * xs % p] = 1
        chi[0] = 0
        return -int(chi[rhs].sum(dtype=np.int64))
    total = 0
    for x in range(p):
        f = (x * x * x + a * x + b) % p
        if f:
            total += 1 if pow(f, (p - 1) // 2, p) == 1 else -1
    return -total


# Affine points are (x, y) tuples; None is the point at infinity.


def _add(P, Q, A, p):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _mul(k, P, A, p):
    R = None
    while k:
        if k & 1:
            R = _add(R, P, A, p)
        k >>= 1
        if k:
            P = _add(P, P, A, p)
    return R


def _multiples_in_interval(P, A, p, lo, hi) -> set[int]:
    """All N in [lo, hi] with N*P = O, by baby-step giant-step on x-coordinates."""
    m = math.isqrt((hi - lo) // 2) + 1
    baby = {}
    pts = [None]
    Q = None
    for j in range(1, m + 1):
        Q = _add(Q, P, A, p)
        if Q is None or Q[0] in baby:
            return _small_order_multiples(P, A, p, lo, hi)
        baby[Q[0]] = j
        pts.append(Q)
    out = set()
    step = 2 * m + 1
    stride = _add(_add(Q, Q, A, p), P, A, p)
    c = lo + m
    G = _mul(c, P, A, p)
    while c - m <= hi:
        if G is None:
            out.add(c)
        else:
            j = baby.get(G[0])
            if j is not None:
                out.add(c - j if pts[j][1] == G[1] else c + j)
        G = _add(G, stride, A, p)
        c += step
    return {n for n in out if lo <= n <= hi}


def _small_order_multiples(P, A, p, lo, hi) -> set[int]:
    order, Q = 1, P
    while Q is not None:
        Q = _add(Q, P, A, p)
        order += 1
    first = -(-lo // order) * order
    return set(range(first, hi + 1, order))


def ap_bsgs(curve: CurveQ, p: int, seed: int | None = None) -> int:
    """a_p via Mestre-style order finding on the curve and its quadratic twist.

    Each random x with f = x^3+ax+b != 0 gives the point (x f, f^2) on
    y^2 = X^3 + a f^2 X + b f^3, which is the curve itself when f is a square
    and the twist otherwise. Candidate group orders are intersected until a
    single one is left in the Hasse interval.
    """
    p = int(p)
    _check_prime(curve, p)
    if p <= BSGS_MIN_PRIME:
        return ap_naive(curve, p)
    a, b = curve.a % p, curve.b % p
    width = math.isqrt(4 * p)
    lo, hi = p + 1 - width, p + 1 + width
    rng = random.Random(seed if seed is not None else f"{curve.a}:{curve.b}:{p}")
    cands: set[int] | None = None
    half = (p - 1) // 2
    for _ in range(BSGS_RETRY_BUDGET):
        x = rng.randrange(p)
        f = (x * x * x + a * x + b) % p
        if f == 0:
            continue
        f2 = f * f % p
        A = a * f2 % p
        found = _multiples_in_interval((x * f % p, f2), A, p, lo, hi)
        if pow(f, half, p) != 1:
            found = {2 * p + 2 - t for t in found}
        cands = found if cands is None else cands & found
        if len(cands) == 1:
            return p + 1 - cands.pop()
        if not cands:
            break
    raise DisambiguationError(f"could not isolate #E(F_{p}) for curve {curve.key}")


def compute_ap(curve: CurveQ, p: int, threshold: int = NAIVE_THRESHOLD) -> int:
    if p < threshold or p <= BSGS_MIN_PRIME:
        return ap_naive(curve, p)
    return ap_bsgs(curve, p)


class ApRecord(NamedTuple):
    p: int
    ap: int


@dataclass(frozen=True, eq=False)
class ApTable:
    curve: CurveQ
    xmax: int
    primes: np.ndarray = field(repr=False)
    traces: np.ndarray = field(repr=False)

    def __post_init__(self):
        primes = np.ascontiguousarray(self.primes, dtype=np.int64)
        traces = np.ascontiguousarray(self.traces, dtype=np.int64)
        if primes.shape != traces.shape:
            raise InvalidArgument("primes and traces differ in length")
        if len(primes):
            if np.any(np.diff(primes) <= 0):
                raise InvalidArgument("primes must be strictly increasing")
            if primes[-1] > self.xmax or primes[0] <= 3:
                raise InvalidArgument("record outside (3, xmax]")
            if np.any(traces * traces > 4 * primes):
                raise InvalidArgument("record violates the Hasse bound")
        primes.flags.writeable = False
        traces.flags.writeable = False
        object.__setattr__(self, "primes", primes)
        object.__setattr__(self, "traces", traces)

    @classmethod
    def from_records(cls, curve: CurveQ, xmax: int, records: Iterable[tuple[int, int]]) -> ApTable:
        recs = list(records)
        return cls(
            curve,
            int(xmax),
            np.array([r[0] for r in recs], dtype=np.int64),
            np.array([r[1] for r in recs], dtype=np.int64),
        )

    def __len__(self) -> int:
        return len(self.primes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ApTable):
            return NotImplemented
        return (
            self.curve == other.curve
            and self.xmax == other.xmax
            and np.array_equal(self.primes, other.primes)
            and np.array_equal(self.traces, other.traces)
        )

    @property
    def records(self) -> list[ApRecord]:
        return [ApRecord(p, t) for p, t in zip(self.primes.tolist(), self.traces.tolist())]

    def count_up_to(self, x: int) -> int:
        return int(np.searchsorted(self.primes, x, side="right"))

    def check_x(self, x: int) -> None:
        from .errors import OutOfRangeError

        if x > self.xmax:
            raise OutOfRangeError(f"x={x} exceeds table xmax={self.xmax}")


class _Counter:
    """Counts a_p evaluations requested by trace_table (for cache tests)."""

    def __init__(self):
        self.count = 0


AP_COUNTER = _Counter()


def _ap_block(a: int, b: int, primes: list[int], threshold: int) -> list[int]:
    curve = new_curve(a, b)
    return [compute_ap(curve, p, threshold) for p in primes]


def good_primes(curve: CurveQ, lo: int, hi: int) -> np.ndarray:
    """Good primes p with max(lo, 3) < p <= hi."""
    if hi < 5:
        return np.zeros(0, dtype=np.int64)
    ps = arith.primes_up_to(hi).primes
    ps = ps[ps > max(lo, 3)]
    bad = np.array(curve.bad_primes, dtype=np.int64)
    return ps[~np.isin(ps, bad)]


def compute_traces(curve: CurveQ, primes: np.ndarray, workers: int = 1, threshold: int = NAIVE_THRESHOLD) -> np.ndarray:
    plist = [int(p) for p in primes]
    blocks = [plist[i : i + BLOCK_PRIMES] for i in range(0, len(plist), BLOCK_PRIMES)]
    out: list[int] = []
    if workers <= 1 or len(blocks) <= 1:
        for blk in blocks:
            out += _ap_block(curve.a, curve.b, blk, threshold)
            log.debug("traced %d primes up to %d", len(blk), blk[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_ap_block, curve.a, curve.b, blk, threshold) for blk in blocks]
            # merge strictly in block order so the result does not depend on scheduling
            for blk, fut in zip(blocks, futs):
                out += fut.result()
                log.debug("traced %d primes up to %d", len(blk), blk[-1])
    AP_COUNTER.count += len(plist)
    return np.array(out, dtype=np.int64)


def trace_table(curve: CurveQ, x: int, workers: int = 1, threshold: int = NAIVE_THRESHOLD) -> ApTable:
    x = int(x)
    if x < 0:
        raise InvalidArgument("x must be non-negative")
    if is_cm(curve):
        log.warning("curve %s has CM; the statistics assume a non-CM curve", curve.key)
    ps = good_primes(curve, 3, x)
    log.info("tracing %d good primes up to %d with %d worker(s)", len(ps), x, workers)
    return ApTable(curve, x, ps, compute_traces(curve, ps, workers, threshold))
