"""Domain types: validators, snapshots, weighting schemes and weighted sets.

Stakes are Python ints end to end. Under the linear scheme weights are the
stakes themselves, so every threshold test is done in integer arithmetic.
Square-root weights are floats; comparisons on them use an absolute
tolerance of ``SHARE_TOL`` on weights normalized by the total.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .errors import DuplicateAddressError, EmptySetError, NegativeStakeError

SHARE_TOL = 1e-9

# math.sqrt(int) converts through float first, which overflows past ~1.8e308
_FLOAT_SAFE_BITS = 1000


def sqrt_stake(stake: int) -> float:
    """Square root of a non-negative integer as a correctly scaled double."""
    if stake < 0:
        raise ValueError("square root of a negative stake")
    if stake.bit_length() <= _FLOAT_SAFE_BITS:
        return math.sqrt(stake)
    # keep ~120 significant bits, take an exact integer root, then rescale
    shift = stake.bit_length() - 240
    shift += shift & 1
    return math.ldexp(float(math.isqrt(stake >> shift)), shift // 2)


class WeightScheme(str, enum.Enum):
    LINEAR = "linear"
    SRSW = "srsw"

    def weight(self, stake):
        """Map a stake to a consensus weight under this scheme."""
        if self is WeightScheme.LINEAR:
            return stake
        if isinstance(stake, int):
            return sqrt_stake(stake)
        return math.sqrt(stake)

    @property
    def exact(self) -> bool:
        return self is WeightScheme.LINEAR

    @classmethod
    def parse(cls, value: "str | WeightScheme") -> "WeightScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown weight scheme {value!r}; expected 'linear' or 'srsw'") from None


@dataclass(frozen=True)
class Validator:
    address: str
    stake: int
    moniker: str | None = None

    def __post_init__(self):
        if not isinstance(self.address, str) or not self.address:
            raise ValueError("validator address must be a non-empty string")
        if isinstance(self.stake, bool) or not isinstance(self.stake, int):
            raise TypeError(f"stake must be an int, got {type(self.stake).__name__}")
        if self.stake < 0:
            raise NegativeStakeError(self.address, self.stake)
        if self.stake == 0:
            raise ValueError(f"validator {self.address!r} has zero stake")


def _sort_key(v: Validator):
    return (-v.stake, v.address)


@dataclass(frozen=True)
class ValidatorSnapshot:
    chain: str
    captured_at: datetime
    validators: tuple[Validator, ...]

    def __post_init__(self):
        object.__setattr__(self, "validators", tuple(self.validators))
        if self.captured_at.tzinfo is None:
            object.__setattr__(self, "captured_at", self.captured_at.replace(tzinfo=timezone.utc))
        else:
            object.__setattr__(self, "captured_at", self.captured_at.astimezone(timezone.utc))

    @property
    def m(self) -> int:
        return len(self.validators)

    @property
    def stakes(self) -> list[int]:
        return [v.stake for v in self.validators]

    @property
    def total_stake(self) -> int:
        return sum(v.stake for v in self.validators)

    def is_canonical(self) -> bool:
        keys = [_sort_key(v) for v in self.validators]
        return all(a < b for a, b in zip(keys, keys[1:]))

    @classmethod
    def from_stakes(
        cls,
        stakes: Iterable[int],
        chain: str = "synthetic",
        captured_at: datetime | None = None,
        prefix: str = "val",
    ) -> "ValidatorSnapshot":
        """Build a canonical snapshot from bare stakes, naming validators ``{prefix}{i:04d}``."""
        vals = [Validator(f"{prefix}{i:04d}", int(s)) for i, s in enumerate(stakes)]
        when = captured_at or datetime(1970, 1, 1, tzinfo=timezone.utc)
        return canonicalize(cls(chain, when, tuple(vals)))


def canonicalize(snapshot: ValidatorSnapshot) -> ValidatorSnapshot:
    """Return the snapshot with validators ordered by stake desc, address asc."""
    if not snapshot.validators:
        raise EmptySetError()
    seen = set()
    for v in snapshot.validators:
        if v.address in seen:
            raise DuplicateAddressError(v.address)
        seen.add(v.address)
    ordered = tuple(sorted(snapshot.validators, key=_sort_key))
    if ordered == snapshot.validators:
        return snapshot
    return ValidatorSnapshot(snapshot.chain, snapshot.captured_at, ordered)


@dataclass(frozen=True)
class WeightedSet:
    snapshot: ValidatorSnapshot
    scheme: WeightScheme
    weights: tuple = field(repr=False)
    total_weight: float | int

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def exact(self) -> bool:
        return self.scheme.exact

    def share(self, partial) -> float:
        return partial / self.total_weight

    def reaches(self, partial, num: int, den: int) -> bool:
        """True iff ``partial >= num/den * total_weight``.

        Exact for linear weights; for square-root weights the comparison is
        made on the normalized share with absolute slack ``SHARE_TOL``.
        """
        if self.exact and isinstance(partial, int):
            return den * partial >= num * self.total_weight
        return partial / self.total_weight >= num / den - SHARE_TOL


def apply_weights(snapshot: ValidatorSnapshot, scheme: WeightScheme | str) -> WeightedSet:
    scheme = WeightScheme.parse(scheme)
    if not snapshot.validators:
        raise EmptySetError()
    if not snapshot.is_canonical():
        snapshot = canonicalize(snapshot)
    if scheme is WeightScheme.LINEAR:
        weights = tuple(v.stake for v in snapshot.validators)
        total = sum(weights)
    else:
        weights = tuple(sqrt_stake(v.stake) for v in snapshot.validators)
        total = math.fsum(weights)
    return WeightedSet(snapshot, scheme, weights, total)


def weigh_stakes(stakes: Sequence[int], scheme: WeightScheme | str = WeightScheme.LINEAR) -> WeightedSet:
    """Shortcut for tests and notebooks: weights for a bare list of stakes."""
    return apply_weights(ValidatorSnapshot.from_stakes(stakes), scheme)
