"""Decentralization metrics for a weighted validator set.

All functions take a :class:`~stakeweight.model.WeightedSet` whose validators
are already in canonical (weight-descending) order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Iterable

from .errors import EmptySetError, OutOfRangeError
from .model import WeightedSet

LIVENESS = (1, 3)
SAFETY = (2, 3)


@dataclass(frozen=True)
class MetricsReport:
    chain: str
    scheme: str
    m: int
    gini: float
    nakamoto_liveness: int
    rho_liveness: float
    nakamoto_safety: int
    rho_safety: float
    epsilon_by_delta: dict[int, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "chain": self.chain,
            "scheme": self.scheme,
            "m": self.m,
            "gini": self.gini,
            "nakamoto_liveness": self.nakamoto_liveness,
            "rho_liveness": self.rho_liveness,
            "nakamoto_safety": self.nakamoto_safety,
            "rho_safety": self.rho_safety,
            "epsilon_by_delta": {str(d): e for d, e in sorted(self.epsilon_by_delta.items())},
        }


def _check(ws: WeightedSet):
    if ws.m == 0:
        raise EmptySetError()


def gini(ws: WeightedSet) -> float:
    """Discrete Gini index of the weights, clamped to [0, 1].

    Uses the sorted form ``sum_i (2i - m - 1) w_(i) / (m * W)`` with weights
    ascending and ``i`` counted from 1; this equals the mean absolute
    pairwise difference divided by twice the mean.
    """
    _check(ws)
    m = ws.m
    asc = ws.weights[::-1]
    if ws.exact:
        num = sum((2 * i - m - 1) * w for i, w in enumerate(asc, 1))
        g = Fraction(num, m * ws.total_weight)
        return float(min(max(g, 0), 1))
    return gini_of_values(asc)


def gini_of_values(values: Iterable[float]) -> float:
    """Gini of an arbitrary vector of non-negative reals (any order)."""
    xs = sorted(values)
    if not xs:
        raise EmptySetError()
    m = len(xs)
    total = math.fsum(xs)
    num = math.fsum((2 * i - m - 1) * x for i, x in enumerate(xs, 1))
    return min(max(num / (m * total), 0.0), 1.0)


def lorenz_points(ws: WeightedSet) -> list[tuple[float, float]]:
    """Lorenz curve vertices, from (0, 0) to (1, 1), weights taken ascending."""
    _check(ws)
    m = ws.m
    total = ws.total_weight
    pts = [(0.0, 0.0)]
    for k, cum in enumerate(accumulate(ws.weights[::-1]), 1):
        pts.append((k / m, cum / total))
    # the cumulative float sum can land a hair off 1
    pts[-1] = (1.0, 1.0)
    return pts


def gini_from_lorenz(points: Iterable[tuple[float, float]]) -> float:
    """Gini as one minus twice the trapezoid area under a Lorenz curve."""
    pts = list(points)
    area = math.fsum((x1 - x0) * (y1 + y0) / 2 for (x0, y0), (x1, y1) in zip(pts, pts[1:]))
    return 1.0 - 2.0 * area


def _smallest_prefix(ws: WeightedSet, frac: tuple[int, int]) -> int:
    _check(ws)
    num, den = frac
    for k, partial in enumerate(accumulate(ws.weights), 1):
        if ws.reaches(partial, num, den):
            return k
    # only reachable through float drift on the final prefix
    return ws.m


def nakamoto_liveness(ws: WeightedSet) -> int:
    """Fewest validators holding at least a third of the total weight.

    Taking the heaviest validators first is optimal: for any k, the k largest
    weights maximize the k-subset sum.
    """
    return _smallest_prefix(ws, LIVENESS)


def nakamoto_safety(ws: WeightedSet) -> int:
    """Fewest validators whose combined weight forms a two-thirds quorum."""
    return _smallest_prefix(ws, SAFETY)


def scale_nakamoto(n: int, m: int) -> float:
    if not (isinstance(n, int) and isinstance(m, int)) or m < 1 or not 1 <= n <= m:
        raise OutOfRangeError(f"need 1 <= n <= m, got n={n}, m={m}")
    return n / m * 100


def percentile_index(delta: int, m: int) -> int:
    """Ascending-order index of the delta-th percentile validator."""
    return delta * (m - 1) // 100


def epsilon(ws: WeightedSet, delta: int) -> float:
    """Multiplicative excess of the heaviest weight over the delta-th percentile one.

    ``eps = w_max / w_delta - 1``; zero when all weights are equal.
    """
    _check(ws)
    if isinstance(delta, bool) or not isinstance(delta, int) or not 0 <= delta <= 100:
        raise OutOfRangeError(f"delta must be an integer percent in [0, 100], got {delta!r}")
    w_max = ws.weights[0]
    w_delta = ws.weights[ws.m - 1 - percentile_index(delta, ws.m)]
    if ws.exact:
        return float(Fraction(w_max, w_delta) - 1)
    return max(w_max / w_delta - 1.0, 0.0)


DEFAULT_DELTAS = (0, 50)


def full_report(ws: WeightedSet, deltas: Iterable[int] = DEFAULT_DELTAS) -> MetricsReport:
    _check(ws)
    n_l = nakamoto_liveness(ws)
    n_s = nakamoto_safety(ws)
    return MetricsReport(
        chain=ws.snapshot.chain,
        scheme=ws.scheme.value,
        m=ws.m,
        gini=gini(ws),
        nakamoto_liveness=n_l,
        rho_liveness=scale_nakamoto(n_l, ws.m),
        nakamoto_safety=n_s,
        rho_safety=scale_nakamoto(n_s, ws.m),
        epsilon_by_delta={d: epsilon(ws, d) for d in deltas},
    )
