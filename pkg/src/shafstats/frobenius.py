"""Frobenius fields Q(sqrt(-m)) of the reductions and their counting functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arith import is_squarefree, squarefree_decompose
from .charsums import SumReport
from .errors import DegenerateFitError, InvalidArgument
from .sha_stats import ShaTable


def frobenius_m(p: int, ap: int) -> int:
    """Squarefree m with Q(sqrt(a_p^2 - 4p)) = Q(sqrt(-m))."""
    d = 4 * int(p) - int(ap) ** 2
    if d <= 0:
        raise InvalidArgument(f"a_p^2 >= 4p for p={p}, a_p={ap}")
    return squarefree_decompose(d)[1]


@dataclass(frozen=True, eq=False)
class FrobeniusIndex:
    base: ShaTable
    by_m: dict[int, np.ndarray] = field(repr=False)

    @property
    def xmax(self) -> int:
        return self.base.xmax

    def __len__(self) -> int:
        return len(self.by_m)


def build_index(table: ShaTable) -> FrobeniusIndex:
    r = table.r
    order = np.argsort(r, kind="stable")
    keys, starts = np.unique(r[order], return_index=True)
    groups = np.split(table.primes[order], starts[1:]) if len(order) else []
    by_m = {}
    for key, grp in zip(keys.tolist(), groups):
        grp.flags.writeable = False
        by_m[key] = grp
    return FrobeniusIndex(table, by_m)


def _bucket_count(index: FrobeniusIndex, m: int, x: int) -> int:
    bucket = index.by_m.get(m)
    if bucket is None:
        return 0
    return int(np.searchsorted(bucket, x, side="right"))


def pi_K(index: FrobeniusIndex, m: int, x: int) -> int:
    """Number of good p <= x whose Frobenius field is Q(sqrt(-m))."""
    if m < 1 or not is_squarefree(m):
        raise InvalidArgument(f"m={m} is not a positive squarefree integer")
    index.base.cut(x)
    return _bucket_count(index, m, x)


def sigma(index: FrobeniusIndex, x: int, u: int, v: int) -> int:
    """sigma(x; u, v): sum of pi_K(m, x) over squarefree m in [u - v, u]."""
    if not (1 <= v <= u <= 4 * x):
        raise InvalidArgument(f"need 4x >= u >= v >= 1, got x={x}, u={u}, v={v}")
    index.base.cut(x)
    return sum(_bucket_count(index, m, x) for m in index.by_m if u - v <= m <= u)


def m_set(index: FrobeniusIndex, x: int) -> tuple[set[int], int | None]:
    """M(x) = {m : pi_K(m, x) > 0} and its largest element (None when empty)."""
    index.base.cut(x)
    ms = {m for m, bucket in index.by_m.items() if len(bucket) and bucket[0] <= x}
    return ms, (max(ms) if ms else None)


def lang_trotter_regressor(x: float) -> float:
    return math.sqrt(x) / math.log(x)


def fit_beta(xs: Sequence[float], counts: Sequence[float]) -> tuple[float, list[float]]:
    """Unweighted least squares of counts against sqrt(x)/log x through the origin."""
    if len(xs) != len(counts) or not xs:
        raise InvalidArgument("need matching, non-empty checkpoints and counts")
    if all(c == 0 for c in counts):
        raise DegenerateFitError("all counts are zero; beta is undefined")
    g = [lang_trotter_regressor(x) for x in xs]
    beta = math.fsum(gi * ci for gi, ci in zip(g, counts)) / math.fsum(gi * gi for gi in g)
    return beta, [c - beta * gi for c, gi in zip(counts, g)]


def lang_trotter_fit(index: FrobeniusIndex, m: int, checkpoints: Sequence[int]) -> SumReport:
    if m < 1 or not is_squarefree(m):
        raise InvalidArgument(f"m={m} is not a positive squarefree integer")
    xs = sorted(int(x) for x in checkpoints)
    if not xs or xs[0] < 2:
        raise InvalidArgument("checkpoints must be >= 2")
    counts = [pi_K(index, m, x) for x in xs]
    beta, residuals = fit_beta(xs, counts)
    return SumReport(
        value=counts[-1],
        main_term=beta * lang_trotter_regressor(xs[-1]),
        bound=0.0,
        meta={
            "m": m,
            "beta_hat": beta,
            "checkpoints": xs,
            "counts": counts,
            "residuals": residuals,
        },
    )
