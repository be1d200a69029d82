import math
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stakeweight import srsw
from stakeweight.errors import DuplicateIndexError, EmptySetError, ValidatorIndexError
from stakeweight.model import Validator, ValidatorSnapshot, WeightScheme, weigh_stakes
from stakeweight.srsw import (
    EconParams,
    meets_quorum,
    quorum_threshold,
    reward,
    select_top_m,
    sybil_split_analysis,
)

from conftest import hp_sqrt


def params(scheme="srsw", alpha=1.0, cost=0.0, admission="strict"):
    return EconParams(alpha=alpha, cap_m=100, sybil_cost=cost, scheme=scheme, admission=admission)


class TestQuorum:
    def test_uniform_three(self):
        q = quorum_threshold(weigh_stakes([1, 1, 1]))
        assert q.threshold == 2

    def test_linear_fraction(self):
        q = quorum_threshold(weigh_stakes([4, 3, 2, 1]))
        assert q.threshold == Fraction(20, 3)

    def test_srsw_threshold(self):
        q = quorum_threshold(weigh_stakes([4, 3, 2, 1], "srsw"))
        oracle = 2 * sum(hp_sqrt(s) for s in (4, 3, 2, 1)) / 3
        assert q.threshold == pytest.approx(float(oracle), abs=1e-12)
        assert q.threshold == pytest.approx(4.0975, abs=1e-4)

    def test_meets_quorum_examples(self):
        assert meets_quorum(weigh_stakes([5, 5, 5]), [0, 2])
        ws = weigh_stakes([4, 3, 2, 1])
        assert meets_quorum(ws, [0, 1])
        assert not meets_quorum(ws, [0])
        assert not meets_quorum(ws, [])

    def test_meets_quorum_srsw(self):
        ws = weigh_stakes([4, 3, 2, 1], "srsw")
        assert not meets_quorum(ws, [0, 1])
        assert meets_quorum(ws, [0, 1, 2])

    def test_bad_indices(self):
        ws = weigh_stakes([4, 3])
        with pytest.raises(ValidatorIndexError):
            meets_quorum(ws, [2])
        with pytest.raises(ValidatorIndexError):
            meets_quorum(ws, [-1])
        with pytest.raises(DuplicateIndexError):
            meets_quorum(ws, [0, 0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 10**15), min_size=1, max_size=8), st.sampled_from(["linear", "srsw"]))
def test_quorum_monotone(stakes, scheme):
    ws = weigh_stakes(stakes, scheme)
    idx = range(ws.m)
    for k in range(ws.m + 1):
        for sub in combinations(idx, k):
            if meets_quorum(ws, sub):
                for extra in set(idx) - set(sub):
                    assert meets_quorum(ws, sub + (extra,))


@given(st.integers(1, 40), st.integers(1, 10**9))
def test_uniform_weights_reduce_to_count_rule(m, s):
    for scheme in ("linear", "srsw"):
        ws = weigh_stakes([s] * m, scheme)
        for k in range(m + 1):
            assert meets_quorum(ws, range(k)) == (k >= math.ceil(2 * m / 3))


class TestTopM:
    def test_basic(self):
        chosen, s_m = select_top_m(ValidatorSnapshot.from_stakes([5, 4, 3, 2, 1]), 3)
        assert chosen.stakes == [5, 4, 3] and s_m == 3

    def test_cap_not_binding(self):
        chosen, s_m = select_top_m(ValidatorSnapshot.from_stakes([5, 4, 3]), 10)
        assert chosen.m == 3 and s_m == 3

    def test_tie_goes_to_smaller_address(self):
        from datetime import datetime, timezone

        vals = (Validator("p", 5), Validator("z", 3), Validator("c", 3), Validator("a", 1))
        snap = ValidatorSnapshot("t", datetime(2023, 1, 1, tzinfo=timezone.utc), vals)
        chosen, s_m = select_top_m(snap, 2)
        assert [v.address for v in chosen.validators] == ["p", "c"]
        assert s_m == 3

    def test_empty(self):
        from datetime import datetime, timezone

        with pytest.raises(EmptySetError):
            select_top_m(ValidatorSnapshot("t", datetime(2023, 1, 1, tzinfo=timezone.utc), ()), 2)

    @given(st.lists(st.integers(1, 1000), min_size=1, max_size=30), st.integers(1, 40))
    def test_properties(self, stakes, cap):
        snap = ValidatorSnapshot.from_stakes(stakes)
        chosen, s_m = select_top_m(snap, cap)
        assert chosen.m == min(cap, len(stakes))
        rejected = snap.stakes[chosen.m:]
        assert all(a >= b for a in chosen.stakes for b in rejected)
        assert s_m == chosen.stakes[-1]


class TestReward:
    def test_linear(self):
        assert reward(100, params("linear", alpha=0.05), 10) == 5.0

    @pytest.mark.parametrize("scheme", ["linear", "srsw"])
    def test_below_threshold(self, scheme):
        assert reward(10, params(scheme), 10) == 0.0
        assert reward(3, params(scheme), 10) == 0.0

    def test_srsw(self):
        assert reward(4, params("srsw"), 3) == 2.0

    def test_inclusive_admission_pays_threshold_validator(self):
        assert reward(3, params("srsw", admission="inclusive"), 3) == pytest.approx(math.sqrt(3))
        assert reward(3, params("srsw"), 3) == 0.0

    @given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
    def test_non_decreasing_above_threshold(self, t, a, b):
        lo, hi = sorted((a, b))
        for scheme in ("linear", "srsw"):
            p = params(scheme, alpha=0.07)
            if lo > t:
                assert reward(lo, p, t) <= reward(hi, p, t)


class TestSybil:
    def test_worked_example_strict(self):
        v = sybil_split_analysis(4, params("srsw"), 3)
        assert v.single_reward == 2.0
        # (2,2) and (3,1): nobody is strictly above s_M = 3
        assert v.best_split_reward == 0.0
        assert not v.rational_to_split

    def test_worked_example_inclusive(self):
        v = sybil_split_analysis(4, params("srsw", admission="inclusive"), 3)
        assert v.single_reward == 2.0
        assert v.best_split == (3, 1)
        assert v.best_split_reward == pytest.approx(1.7320508, abs=1e-7)
        assert not v.rational_to_split

    def test_linear_is_split_neutral(self):
        v = sybil_split_analysis(4, params("linear"), 0)
        assert v.single_reward == 4.0 and v.best_split_reward == 4.0
        assert not v.rational_to_split

    def test_linear_neutral_with_inexact_alpha(self):
        v = sybil_split_analysis(1001, params("linear", alpha=0.1), 0)
        assert not v.rational_to_split

    def test_srsw_without_cost_splits(self):
        v = sybil_split_analysis(100, params("srsw"), 0)
        assert v.single_reward == 10.0
        assert v.best_split == (50, 50)
        assert v.best_split_reward == pytest.approx(2 * math.sqrt(50))
        assert v.rational_to_split

    def test_cost_deters(self):
        # gain of the even split is 2*sqrt(50) - 10 ~ 4.142
        assert not sybil_split_analysis(100, params("srsw", cost=4.2), 0).rational_to_split
        assert sybil_split_analysis(100, params("srsw", cost=4.1), 0).rational_to_split

    def test_even_split_gain_is_root_two(self):
        for s in (64, 10**4, 10**6):
            v = sybil_split_analysis(s, params("srsw"), 0)
            assert v.best_split_reward / v.single_reward == pytest.approx(math.sqrt(2), rel=1e-12)
            assert v.rational_to_split

    def test_unsplittable(self):
        v = sybil_split_analysis(1, params("srsw"), 0)
        assert v.best_split is None and not v.rational_to_split


@settings(max_examples=150, deadline=None)
@given(
    st.integers(2, 3000),
    st.integers(0, 3000),
    st.sampled_from(["linear", "srsw"]),
    st.sampled_from(["strict", "inclusive"]),
    st.floats(0, 5),
)
def test_candidate_search_matches_enumeration(stake, threshold, scheme, admission, cost):
    p = params(scheme, alpha=0.3, cost=cost, admission=admission)
    full = sybil_split_analysis(stake, p, threshold)
    saved = srsw.ENUMERATION_LIMIT
    srsw.ENUMERATION_LIMIT = 0
    try:
        fast = sybil_split_analysis(stake, p, threshold)
    finally:
        srsw.ENUMERATION_LIMIT = saved
    assert fast.best_split_reward == pytest.approx(full.best_split_reward, rel=1e-12, abs=1e-12)
    assert fast.rational_to_split == full.rational_to_split


def test_huge_stake_uses_candidates():
    v = sybil_split_analysis(10**30, params("srsw"), 0)
    assert v.best_split == (5 * 10**29, 5 * 10**29)
    assert v.rational_to_split


def test_econ_params_validation():
    with pytest.raises(ValueError):
        EconParams(alpha=0, cap_m=1)
    with pytest.raises(ValueError):
        EconParams(alpha=0.1, cap_m=0)
    with pytest.raises(ValueError):
        EconParams(alpha=0.1, cap_m=1, sybil_cost=-1)
    with pytest.raises(ValueError):
        EconParams(alpha=0.1, cap_m=1, admission="maybe")
    assert EconParams(alpha=0.1, cap_m=1, scheme="linear").scheme is WeightScheme.LINEAR
