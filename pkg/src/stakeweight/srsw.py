"""Quorum thresholds, epoch rewards, top-M admission and Sybil-split analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import DuplicateIndexError, EmptySetError, ValidatorIndexError
from .model import SHARE_TOL, ValidatorSnapshot, WeightedSet, WeightScheme, canonicalize

# Exhaustive split enumeration is used up to this stake; beyond it the
# closed-form candidate search in _split_candidates takes over.
ENUMERATION_LIMIT = 200_000

# strict: only s > s_M is rewarded (the M-th validator itself earns nothing)
# inclusive: s >= s_M is rewarded
ADMISSION_RULES = ("strict", "inclusive")


@dataclass(frozen=True)
class EconParams:
    alpha: float
    cap_m: int
    sybil_cost: float = 0.0
    scheme: WeightScheme = WeightScheme.SRSW
    admission: str = "strict"

    def __post_init__(self):
        object.__setattr__(self, "scheme", WeightScheme.parse(self.scheme))
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not isinstance(self.cap_m, int) or self.cap_m < 1:
            raise ValueError(f"cap_m must be a positive integer, got {self.cap_m!r}")
        if self.sybil_cost < 0:
            raise ValueError(f"sybil cost must be >= 0, got {self.sybil_cost}")
        if self.admission not in ADMISSION_RULES:
            raise ValueError(f"admission must be one of {ADMISSION_RULES}, got {self.admission!r}")


@dataclass(frozen=True)
class QuorumThreshold:
    scheme: WeightScheme
    threshold: Fraction | float
    total_weight: int | float

    def admits(self, weight_sum) -> bool:
        """Whether ``weight_sum`` of attesting weight reaches the quorum."""
        if self.scheme.exact and isinstance(weight_sum, int):
            return 3 * weight_sum >= 2 * self.total_weight
        return weight_sum / self.total_weight >= 2 / 3 - SHARE_TOL


def quorum_threshold(ws: WeightedSet) -> QuorumThreshold:
    if ws.m == 0:
        raise EmptySetError()
    if ws.exact:
        threshold = Fraction(2 * ws.total_weight, 3)
    else:
        threshold = 2 * ws.total_weight / 3
    return QuorumThreshold(ws.scheme, threshold, ws.total_weight)


def meets_quorum(ws: WeightedSet, subset: Iterable[int]) -> bool:
    idx = list(subset)
    seen = set()
    for i in idx:
        if isinstance(i, bool) or not isinstance(i, int) or not 0 <= i < ws.m:
            raise ValidatorIndexError(f"validator index {i!r} out of range for m={ws.m}")
        if i in seen:
            raise DuplicateIndexError(f"validator index {i} repeated")
        seen.add(i)
    if ws.exact:
        partial = sum(ws.weights[i] for i in idx)
    else:
        partial = math.fsum(ws.weights[i] for i in idx)
    return quorum_threshold(ws).admits(partial)


def select_top_m(candidates: ValidatorSnapshot, cap_m: int) -> tuple[ValidatorSnapshot, int]:
    """Admit the ``cap_m`` highest-staked candidates.

    Returns the admitted snapshot and the admission threshold ``s_M``, the
    stake of the last admitted validator. Ties at the boundary go to the
    lexicographically smaller address.
    """
    if not candidates.validators:
        raise EmptySetError("candidate set")
    if cap_m < 1:
        raise ValueError("cap_m must be >= 1")
    ordered = canonicalize(candidates)
    chosen = ordered.validators[:cap_m]
    return ValidatorSnapshot(ordered.chain, ordered.captured_at, chosen), chosen[-1].stake


def earns(stake, threshold_stake, admission: str = "strict") -> bool:
    if admission == "inclusive":
        return stake >= threshold_stake
    return stake > threshold_stake


def reward(stake, params: EconParams, threshold_stake) -> float:
    """Per-epoch reward ``alpha * w(stake)``, or zero below the admission threshold."""
    if not earns(stake, threshold_stake, params.admission):
        return 0.0
    return params.alpha * params.scheme.weight(stake)


@dataclass(frozen=True)
class SplitVerdict:
    stake: int
    single_reward: float
    best_split: tuple[int, int] | None
    best_split_reward: float
    rational_to_split: bool

    @property
    def gain(self) -> float:
        return self.best_split_reward - self.single_reward


def _split_reward(a: int, b: int, params: EconParams, threshold_stake) -> float:
    return reward(a, params, threshold_stake) + reward(b, params, threshold_stake) - params.sybil_cost


def _split_candidates(stake: int, threshold_stake) -> set[int]:
    # Split (a, stake - a) with a <= stake // 2. Where both halves earn, the
    # summed reward is concave in a (SRSW) or flat (linear), so the middle
    # wins; where only the larger half earns, the smallest a wins. The
    # admission boundaries are added for safety around the step.
    half = stake // 2
    cands = {1, half}
    t = int(threshold_stake) if threshold_stake >= 0 else 0
    for a in (t - 1, t, t + 1, stake - t - 1, stake - t, stake - t + 1):
        if 1 <= a <= half:
            cands.add(a)
    return cands


def sybil_split_analysis(stake: int, params: EconParams, threshold_stake) -> SplitVerdict:
    """Compare one identity holding ``stake`` against every two-way split of it.

    Splitting is rational when some split's summed reward, net of the Sybil
    cost, strictly beats the single-identity reward.
    """
    if stake < 1:
        raise ValueError("stake must be >= 1")
    single = reward(stake, params, threshold_stake)
    if stake < 2:
        return SplitVerdict(stake, single, None, -math.inf, False)
    if stake <= ENUMERATION_LIMIT:
        splits: Iterable[int] = range(1, stake // 2 + 1)
    else:
        splits = sorted(_split_candidates(stake, threshold_stake))
    best_a, best = None, -math.inf
    for a in splits:
        r = _split_reward(a, stake - a, params, threshold_stake)
        if r > best:
            best_a, best = a, r
    # linear splits tie the single reward up to float rounding
    slack = 1e-12 * max(1.0, abs(single))
    return SplitVerdict(stake, single, (stake - best_a, best_a), best, best - single > slack)
