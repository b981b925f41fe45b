"""Jacobi-symbol sums behind the square sieve, each reported next to its expected size."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

from . import arith
from .arith import is_prime, is_squarefree, jacobi, jacobi_table
from .curve import ApTable
from .errors import EmptyWindowError, InvalidArgument, OutOfRangeError

log = logging.getLogger(__name__)

# Moduli above this are evaluated symbol by symbol instead of through a lookup table.
TABLE_MODULUS_LIMIT = 1 << 22


@dataclass(frozen=True)
class SumReport:
    """An exact sum next to its predicted main term and a reference bound.

    ``residual`` is |value - main_term|, computed in rational arithmetic from
    whatever was stored (floats are converted exactly).
    """

    value: int | Fraction | float
    main_term: int | Fraction | float
    bound: float
    meta: dict = field(default_factory=dict)
    residual: Fraction = field(init=False)

    def __post_init__(self):
        if self.bound < 0:
            raise InvalidArgument("bound must be non-negative")
        object.__setattr__(self, "residual", abs(Fraction(self.value) - Fraction(self.main_term)))


def _symbols(values: np.ndarray, n: int) -> np.ndarray:
    """(v/n) for each entry of a non-negative int64 array."""
    if n <= TABLE_MODULUS_LIMIT:
        return jacobi_table(n)[values % n].astype(np.int64)
    return np.array([jacobi(v, n) for v in values.tolist()], dtype=np.int64)


def u_sum(table: ApTable, x: int, n: int) -> int:
    """U(x; n) = sum over all primes p <= x of ((a_p^2 - 4p) / n), with a_p = 1 at bad p."""
    if n < 1 or n % 2 == 0:
        raise InvalidArgument(f"n must be odd and positive, got {n}")
    table.check_x(x)
    k = table.count_up_to(x)
    ps, ts = table.primes[:k], table.traces[:k]
    vals = (ts * ts - 4 * ps) % n
    total = int(_symbols(vals, n).sum())
    total += sum(jacobi(1 - 4 * q, n) for q in table.curve.bad_primes if q <= x)
    return total


def prime_count(table: ApTable, x: int) -> int:
    """pi(x) recovered from the table: good primes plus bad ones (2 and 3 included)."""
    table.check_x(x)
    return table.count_up_to(x) + sum(1 for q in table.curve.bad_primes if q <= x)


def lemma1_report(table: ApTable, x: int, l1: int, l2: int) -> SumReport:
    """U(x; l1 l2) against pi(x) / ((l1^2-1)(l2^2-1)) and the (l1 l2)^3 sqrt(x) log(l1 l2 x) error shape."""
    if l1 == l2:
        raise InvalidArgument("l1 and l2 must be distinct")
    for ell in (l1, l2):
        if ell <= 3 or not is_prime(ell):
            raise InvalidArgument(f"{ell} is not a prime > 3")
        if table.curve.delta % ell == 0:
            raise InvalidArgument(f"{ell} divides the discriminant")
    if x < 1:
        raise InvalidArgument("x must be >= 1")
    n = l1 * l2
    pi_x = prime_count(table, x)
    main = Fraction(pi_x, (l1 * l1 - 1) * (l2 * l2 - 1))
    return SumReport(
        value=u_sum(table, x, n),
        main_term=main,
        bound=n**3 * math.sqrt(x) * math.log(n * x),
        meta={"x": x, "l1": min(l1, l2), "l2": max(l1, l2), "pi_x": pi_x},
    )


def _check_odd_squarefree(s: int) -> None:
    if s < 3 or s % 2 == 0 or not is_squarefree(s):
        raise InvalidArgument(f"s={s} must be an odd squarefree integer >= 3")


def burgess_sum(u: int, v: int, s: int) -> SumReport:
    """Sum of (m/s) over integers m in [u - v, u], with reference bound v^(1/2) s^(3/16)."""
    if not 1 <= v <= u:
        raise InvalidArgument(f"need u >= v >= 1, got u={u}, v={v}")
    _check_odd_squarefree(s)
    chi = jacobi_table(s) if s <= TABLE_MODULUS_LIMIT else None
    if chi is None:
        value = sum(jacobi(m, s) for m in range(u - v, u + 1))
    else:
        prefix = np.concatenate(([0], np.cumsum(chi, dtype=np.int64)))

        def upto(N):  # sum of chi(m) for 0 <= m < N
            q, rem = divmod(N, s)
            return q * int(prefix[-1]) + int(prefix[rem])

        value = upto(u + 1) - upto(u - v)
    return SumReport(
        value=value,
        main_term=0,
        bound=math.sqrt(v) * s ** (3 / 16),
        meta={"u": u, "v": v, "s": s},
    )


def squarefree_flags(n: int, odd_only: bool = False) -> np.ndarray:
    """Boolean array indexed 0..n, True at squarefree integers."""
    flags = np.ones(n + 1, dtype=bool)
    flags[0] = False
    for q in range(2, math.isqrt(n) + 1):
        flags[q * q :: q * q] = False
    if odd_only:
        flags[::2] = False
    return flags


def hb_double_sum(X: int, Y: int, f: Mapping[int, float | int | Fraction]) -> SumReport:
    """sum over odd squarefree s <= Y of |sum over squarefree m <= X of f(m) (m/s)|^2.

    The bound reported is (X + Y) * sum |f(m)|^2, i.e. the mean-square
    estimate with its (XY)^o(1) factor dropped; ``meta['ratio']`` is value/bound.
    """
    if X < 1 or Y < 1:
        raise InvalidArgument("X and Y must be >= 1")
    items = sorted((int(m), w) for m, w in f.items() if w != 0)
    for m, _ in items:
        if not 1 <= m <= X or not is_squarefree(m):
            raise InvalidArgument(f"weight given at m={m}, which is not a squarefree integer in [1, {X}]")
    ms = np.array([m for m, _ in items], dtype=np.int64)
    ws = [w for _, w in items]
    exact = all(isinstance(w, Rational) for w in ws)
    if exact and all(isinstance(w, int) for w in ws) and sum(abs(w) for w in ws) < 2**62:
        warr = np.array(ws, dtype=np.int64)
    else:
        warr = np.array([Fraction(w) if exact else float(w) for w in ws], dtype=object)
    total = Fraction(0) if exact else []
    for s in np.flatnonzero(squarefree_flags(Y, odd_only=True)).tolist():
        if len(ms) >= s or s <= 4096:
            chi = _symbols(ms, s)
        else:
            chi = np.array([jacobi(m, s) for m in ms.tolist()], dtype=np.int64)
        if warr.dtype == object:
            terms = [w * c for w, c in zip(warr.tolist(), chi.tolist()) if c]
            inner = sum(terms, Fraction(0)) if exact else math.fsum(terms)
        else:
            inner = int(np.dot(warr, chi))
        if exact:
            total += inner * inner
        else:
            total.append(inner * inner)
    value = total if exact else math.fsum(total)
    if exact and isinstance(value, Fraction) and value.denominator == 1:
        value = value.numerator
    energy = math.fsum(float(w) ** 2 for w in ws)
    bound = (X + Y) * energy
    return SumReport(
        value=value,
        main_term=0,
        bound=bound,
        meta={"X": X, "Y": Y, "ratio": float(value) / bound if bound else 0.0},
    )


@dataclass(frozen=True)
class SieveConfig:
    z: float
    ell_primes: tuple[int, ...]
    z_floor_ok: bool
    u: float

    @property
    def empty(self) -> bool:
        return not self.ell_primes


def make_sieve_config(u: float, z: float, bad_primes: Iterable[int] = ()) -> SieveConfig:
    """Primes l in [z, 2z], minus 2, 3 and the bad primes; flags whether z >= (log u)^2."""
    if z < 2:
        raise InvalidArgument("z must be >= 2")
    if u < 1:
        raise InvalidArgument("u must be >= 1")
    excluded = {2, 3} | set(bad_primes)
    ells = tuple(p for p in arith.primes_up_to(math.floor(2 * z)) if p >= z and p not in excluded)
    config = SieveConfig(float(z), ells, z >= math.log(u) ** 2, float(u))
    if config.empty:
        log.warning("sieve window [%s, %s] has no usable primes", z, 2 * z)
    return config


def suggested_z(v: float, x: float, short: bool = False) -> float:
    """The balancing choice of z: (vx)^(1/14) for windows starting at 1, else (vx)^(4/59)."""
    return (v * x) ** (1 / 14 if short else 4 / 59)


def square_sieve_rhs(table, m: int, x: int, config: SieveConfig) -> SumReport:
    """Square-sieve majorant for S_m(x).

    value = L^-2 * sum over good p <= x of (sum over l in the window of
    (m d_p / l))^2, where d_p = 4p - a_p^2 and L is the number of usable l.
    This is the n-sum weighted by w_m(n) collapsed onto primes; every p is
    kept even when m d_p > 4x^2, so the value always majorises S_m(x) termwise.
    Normalised by L^2 rather than by the count of all primes in the window.
    """
    from .sha_stats import s_m

    if m < 1:
        raise InvalidArgument("m must be >= 1")
    if config.empty:
        raise EmptyWindowError(f"no usable primes in [{config.z}, {2 * config.z}]")
    if x > table.xmax:
        raise OutOfRangeError(f"x={x} exceeds table xmax={table.xmax}")
    k = table.cut(x)
    d = table.d[:k]
    inner = np.zeros(len(d), dtype=np.int64)
    for ell in config.ell_primes:
        inner += jacobi_table(ell)[(m % ell) * (d % ell) % ell]
    L = len(config.ell_primes)
    value = Fraction(int(np.dot(inner, inner)), L * L)
    sm = s_m(table, m, x)
    return SumReport(
        value=value,
        main_term=sm,
        bound=float(value),
        meta={
            "x": x,
            "m": m,
            "z": config.z,
            "L": L,
            "ell_primes": list(config.ell_primes),
            "z_floor_ok": config.z_floor_ok,
            "s_m": sm,
            "ratio": float(value) / sm if sm else None,
            "normalisation": "L^2 (usable primes), not pi(z)^2",
        },
    )
