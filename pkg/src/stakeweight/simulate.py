"""Reward compounding across epochs and stake-weighted proposer sampling.

Randomness comes from numpy's PCG64 bit generator seeded with an unsigned
64-bit integer; the algorithm name and seed travel with every histogram.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySetError, InvalidHorizonError
from .metrics import gini_of_values
from .model import ValidatorSnapshot, WeightedSet, WeightScheme, apply_weights
from .srsw import EconParams, earns

PRNG_NAME = "numpy.PCG64"
DEFAULT_EPOCHS_PER_YEAR = 365
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RewardTrajectory:
    addresses: tuple[str, ...]
    scheme: WeightScheme
    alpha: float
    epochs: tuple[int, ...]
    # stakes_by_validator[i][t] is validator i's stake after epoch t (t=0 is the initial state)
    stakes_by_validator: tuple[tuple[float, ...], ...]
    thresholds: tuple[float, ...]

    def final_stakes(self) -> list[float]:
        return [row[-1] for row in self.stakes_by_validator]

    def growth(self) -> list[float]:
        return [row[-1] / row[0] for row in self.stakes_by_validator]

    def rewards(self) -> list[list[float]]:
        """Per-epoch reward for each validator (one entry per epoch step)."""
        return [[b - a for a, b in zip(row, row[1:])] for row in self.stakes_by_validator]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "validator_address", "stake"])
        for t in self.epochs:
            for addr, row in zip(self.addresses, self.stakes_by_validator):
                w.writerow([t, addr, repr(row[t])])
        return buf.getvalue()


def per_epoch_alpha(annual_rate: float, epochs_per_year: int = DEFAULT_EPOCHS_PER_YEAR) -> float:
    """Spread an annual inflation fraction (0.045 for 4.5%) evenly over the epochs of a year."""
    if epochs_per_year is None or epochs_per_year < 1:
        raise InvalidHorizonError("epochs_per_year must be a positive integer")
    if not annual_rate > 0:
        raise ValueError("annual rate must be > 0")
    return annual_rate / epochs_per_year


def _threshold(stakes: list[float], cap_m: int) -> float:
    # stake of the cap_m-th ranked validator; ranking ties do not change the value
    return sorted(stakes, reverse=True)[min(cap_m, len(stakes)) - 1]


def simulate_rewards(
    snapshot: ValidatorSnapshot,
    params: EconParams,
    epochs: int,
    annual_rate: float | None = None,
    epochs_per_year: int | None = None,
    threshold_stake: float | None = None,
) -> RewardTrajectory:
    """Compound ``s <- s + alpha * w(s)`` over ``epochs`` epochs.

    With ``annual_rate`` the per-epoch alpha is ``annual_rate / epochs_per_year``
    and ``params.alpha`` is ignored. A fixed ``threshold_stake`` pins the
    admission threshold; when omitted it is recomputed every epoch as the
    stake of the ``params.cap_m``-th ranked validator.
    """
    if isinstance(epochs, bool) or not isinstance(epochs, int) or epochs < 1:
        raise InvalidHorizonError(f"epochs must be a positive integer, got {epochs!r}")
    if not snapshot.validators:
        raise EmptySetError()
    if annual_rate is not None:
        if epochs_per_year is None:
            raise InvalidHorizonError("annual_rate requires epochs_per_year")
        alpha = per_epoch_alpha(annual_rate, epochs_per_year)
    else:
        alpha = params.alpha
    weight = params.scheme.weight
    current = [float(v.stake) for v in snapshot.validators]
    history = [[s] for s in current]
    thresholds = []
    for _ in range(epochs):
        t_stake = threshold_stake if threshold_stake is not None else _threshold(current, params.cap_m)
        thresholds.append(float(t_stake))
        current = [
            s + alpha * weight(s) if earns(s, t_stake, params.admission) else s
            for s in current
        ]
        for row, s in zip(history, current):
            row.append(s)
    return RewardTrajectory(
        addresses=tuple(v.address for v in snapshot.validators),
        scheme=params.scheme,
        alpha=alpha,
        epochs=tuple(range(epochs + 1)),
        stakes_by_validator=tuple(tuple(r) for r in history),
        thresholds=tuple(thresholds),
    )


def linear_closed_form(stake: float, alpha: float, t: int) -> float:
    return stake * (1.0 + alpha) ** t


def trajectory_gini(traj: RewardTrajectory, t: int = -1) -> float:
    """Gini of the (real-valued) stake vector at epoch ``t``."""
    return gini_of_values(row[t] for row in traj.stakes_by_validator)


@dataclass(frozen=True)
class ProposerHistogram:
    addresses: tuple[str, ...]
    scheme: WeightScheme
    draws: int
    seed: int
    counts: tuple[int, ...]
    expected_share: tuple[float, ...]
    prng: str = PRNG_NAME

    def empirical_share(self) -> list[float]:
        return [c / self.draws for c in self.counts]

    def max_deviation(self) -> float:
        return max(abs(e - x) for e, x in zip(self.empirical_share(), self.expected_share))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["validator_address", "count", "expected_share"])
        for a, c, e in zip(self.addresses, self.counts, self.expected_share):
            w.writerow([a, c, repr(e)])
        return buf.getvalue()


def _shares(ws: WeightedSet) -> tuple[float, ...]:
    if ws.exact:
        total = ws.total_weight
        return tuple(w / total for w in ws.weights)
    arr = np.asarray(ws.weights, dtype=np.float64)
    return tuple((arr / math.fsum(ws.weights)).tolist())


def proposer_distribution(ws: WeightedSet, draws: int, seed: int) -> ProposerHistogram:
    """Draw ``draws`` proposers i.i.d. with probability proportional to weight."""
    if ws.m == 0:
        raise EmptySetError()
    if isinstance(draws, bool) or not isinstance(draws, int) or draws < 1:
        raise InvalidHorizonError(f"draws must be a positive integer, got {draws!r}")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    shares = _shares(ws)
    p = np.asarray(shares, dtype=np.float64)
    p = p / p.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    picks = rng.choice(ws.m, size=draws, p=p)
    counts = np.bincount(picks, minlength=ws.m)
    return ProposerHistogram(
        addresses=tuple(v.address for v in ws.snapshot.validators),
        scheme=ws.scheme,
        draws=draws,
        seed=seed,
        counts=tuple(int(c) for c in counts),
        expected_share=shares,
    )


@dataclass(frozen=True)
class ProposerComparison:
    linear: ProposerHistogram
    srsw: ProposerHistogram
    linear_share_gini: float
    srsw_share_gini: float


def compare_proposer_concentration(snapshot: ValidatorSnapshot, draws: int, seed: int) -> ProposerComparison:
    lin = proposer_distribution(apply_weights(snapshot, WeightScheme.LINEAR), draws, seed)
    sq = proposer_distribution(apply_weights(snapshot, WeightScheme.SRSW), draws, seed)
    return ProposerComparison(
        linear=lin,
        srsw=sq,
        linear_share_gini=gini_of_values(lin.expected_share),
        srsw_share_gini=gini_of_values(sq.expected_share),
    )
