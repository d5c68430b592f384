import itertools
import math

import pytest

from runnercover.conditions import (MODE_GENERIC, MODE_NINE, TupleCounters,
                                    admits, default_mode, equivalent_gcd_check,
                                    make_profile)
from runnercover.covertab import admissible_candidates, make_params
from runnercover.errors import UsageError


class TestMakeProfile:
    def test_generic_caps(self):
        params = make_params(5, 31, 1)  # M = 186 = 2 * 3 * 31
        profile = make_profile(params, MODE_GENERIC)
        assert profile.per_prime_caps == {2: 3, 3: 3, 31: 3}
        assert profile.three_cap is None and profile.nine_cap is None
        assert profile.valuation_cap == 0

    def test_nine_caps(self):
        params = make_params(8, 81, 1)
        profile = make_profile(params, MODE_NINE)
        assert profile.per_prime_caps == {3: 6}
        assert profile.three_cap == 5
        assert profile.nine_cap == 4
        assert profile.valuation_cap == 3

    def test_nine_requires_k8(self):
        with pytest.raises(UsageError):
            make_profile(make_params(7, 31, 1), MODE_NINE)

    def test_unknown_mode(self):
        with pytest.raises(UsageError):
            make_profile(make_params(8, 31, 1), "stronger")

    def test_default_mode(self):
        assert default_mode(8) == MODE_NINE
        assert default_mode(7) == MODE_GENERIC
        assert default_mode(9) == MODE_GENERIC


def _candidate(params, profile, v):
    for cand in admissible_candidates(params, profile):
        if cand.v == v:
            return cand
    raise AssertionError(f"{v} is not admissible")


class TestAdmits:
    def test_three_cap_blocks_sixth_multiple(self):
        params = make_params(8, 31, 1)
        profile = make_profile(params, MODE_NINE)
        counters = TupleCounters.empty(profile)
        counters.count_div3 = 5
        assert admits(counters, _candidate(params, profile, 6), profile) is False
        assert admits(counters, _candidate(params, profile, 5), profile) is True

    def test_nine_cap(self):
        params = make_params(8, 31, 1)
        profile = make_profile(params, MODE_NINE)
        counters = TupleCounters.empty(profile)
        counters.count_div9 = 4
        counters.count_div3 = 4
        assert admits(counters, _candidate(params, profile, 18), profile) is False

    def test_per_prime_cap(self):
        # generic cap is k - 2 members divisible by any prime dividing M
        params = make_params(7, 163, 1)  # M = 8 * 163
        profile = make_profile(params, MODE_GENERIC)
        counters = TupleCounters.empty(profile)
        counters.count_div_q[2] = 5  # = k - 2
        assert admits(counters, _candidate(params, profile, 4), profile) is False
        assert admits(counters, _candidate(params, profile, 3), profile) is True

    def test_valuation_cap_prime_power(self):
        params = make_params(8, 81, 1)  # a = 4, cap 3
        profile = make_profile(params, MODE_NINE)
        counters = TupleCounters.empty(profile)
        counters.total_valp = 3
        counters.count_div3 = 1
        assert admits(counters, _candidate(params, profile, 3), profile) is False
        assert admits(counters, _candidate(params, profile, 2), profile) is True

    def test_monotone_in_counters(self):
        params = make_params(8, 31, 1)
        profile = make_profile(params, MODE_NINE)
        cands = admissible_candidates(params, profile)
        settings = [(0, 0, 0, 0), (3, 2, 1, 0), (5, 4, 0, 0), (6, 4, 0, 0)]
        for (c3a, c9a, q3a, _), (c3b, c9b, q3b, _) in itertools.product(settings, repeat=2):
            if not (c3a <= c3b and c9a <= c9b and q3a <= q3b):
                continue
            lo = TupleCounters.empty(profile)
            lo.count_div3, lo.count_div9 = c3a, c9a
            lo.count_div_q[3] = q3a
            hi = TupleCounters.empty(profile)
            hi.count_div3, hi.count_div9 = c3b, c9b
            hi.count_div_q[3] = q3b
            for cand in cands[:40]:
                if not admits(lo, cand, profile):
                    assert not admits(hi, cand, profile)

    def test_add_remove_roundtrip_and_recount(self):
        params = make_params(8, 81, 1)
        profile = make_profile(params, MODE_NINE)
        cands = admissible_candidates(params, profile)[:10]
        counters = TupleCounters.empty(profile)
        for cand in cands:
            counters.add(cand)
        recounted = counters.recount(cands)
        assert recounted == counters
        for cand in cands:
            counters.remove(cand)
        assert counters == TupleCounters.empty(profile)


class TestEquivalentGcdCheck:
    def test_seven_multiples_of_three(self):
        members = [3, 6, 12, 15, 21, 24, 33, 1]
        assert equivalent_gcd_check(members, 279) is False

    def test_small_coprimes(self):
        assert equivalent_gcd_check([1, 2, 4, 5, 7, 8, 10, 11], 279) is True

    def test_cap_equivalence_exhaustive(self):
        # for full-length tuples the per-prime caps are exactly condition (i)
        for k, d, c in [(3, 5, 1), (3, 7, 2), (3, 13, 1)]:
            params = make_params(k, d, c)
            profile = make_profile(params, MODE_GENERIC)
            for combo in itertools.combinations(range(1, params.half + 1), k):
                cap_ok = all(
                    sum(1 for v in combo if v % q == 0) <= params.k - 2
                    for q in params.m_primes)
                assert cap_ok == equivalent_gcd_check(list(combo), params.M), combo


class TestCapVsDirectConditions:
    def test_full_condition_equivalence_small(self):
        # composing admits over a tuple == direct (i)+(iv) evaluation
        for k, d, c in [(3, 5, 1), (3, 4, 1), (4, 3, 2)]:
            params = make_params(k, d, c)
            profile = make_profile(params, MODE_GENERIC)
            cands = admissible_candidates(params, profile)
            by_v = {cand.v: cand for cand in cands}
            for size in range(1, k + 1):
                for combo in itertools.combinations(sorted(by_v), size):
                    counters = TupleCounters.empty(profile)
                    cap_ok = True
                    for v in combo:
                        if not admits(counters, by_v[v], profile):
                            cap_ok = False
                            break
                        counters.add(by_v[v])
                    direct = _direct_conditions(combo, params)
                    assert cap_ok == direct, (k, d, c, combo)


def _direct_conditions(combo, params) -> bool:
    """Conditions (i) and (iv) from their definitions, no caps."""
    if len(combo) == params.k:
        if not equivalent_gcd_check(list(combo), params.M):
            return False
    else:
        # for shorter tuples condition (i) constrains primes dividing M to
        # at most k - 2 members, which can only bind when the tuple is big
        for q in params.m_primes:
            if sum(1 for v in combo if v % q == 0) > params.k - 2:
                return False
    product = math.prod(combo)
    return product % params.d != 0
