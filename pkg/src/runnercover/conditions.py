"""Divisibility conditions on a partial tuple, kept as incremental caps.

A tuple is acceptable when

  (i)   every (k-1)-subset S has gcd(S + {M}) = 1,
  (ii)  at most 5 members are divisible by 3        (nine-runner mode only),
  (iii) at most 4 members are divisible by 9        (nine-runner mode only),
  (iv)  the member product is not divisible by d = p**a.

Condition (i) is maintained as a per-prime cap: a prime q | M divides the
gcd of some (k-1)-subset extended by M exactly when q divides at least k-1
members, so (i) holds iff every q | M divides at most k-2 members.  That
makes the whole check O(#primes) per extension instead of subset
enumeration; :func:`equivalent_gcd_check` is the direct form used to
cross-check the equivalence.

Condition (iv) for a prime power d = p**a is a cap of a-1 on the total
p-adic valuation of the tuple.  Members divisible by d are therefore never
candidates at all (they are excluded residue-by-residue), and for a = 1
this already bans every multiple of p.

The nine-runner caps (ii)/(iii) are justified only for k = 8; other k get
the generic profile with (i) and (iv) alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .covertab import Candidate, InstanceParams
from .errors import UsageError

MAX_DIV3 = 5   # nine-runner cap on members divisible by 3
MAX_DIV9 = 4   # nine-runner cap on members divisible by 9
NINE_RUNNER_K = 8

MODE_GENERIC = "generic"
MODE_NINE = "nine"


@dataclass(frozen=True)
class ConditionProfile:
    mode: str
    per_prime_caps: dict[int, int]   # prime q | M  ->  max members divisible by q
    three_cap: int | None            # nine-runner only, else None
    nine_cap: int | None
    valuation_cap: int               # max total p-adic valuation of the product
    params_key: tuple[int, int, int]  # (k, d, c) this profile was built for


def make_profile(params: InstanceParams, mode: str) -> ConditionProfile:
    if mode not in (MODE_GENERIC, MODE_NINE):
        raise UsageError(f"unknown profile mode {mode!r}")
    if mode == MODE_NINE and params.k != NINE_RUNNER_K:
        raise UsageError(
            f"the nine-runner profile is only valid for k = {NINE_RUNNER_K}, got k = {params.k}")
    caps = {q: params.k - 2 for q in params.m_primes}
    return ConditionProfile(
        mode=mode,
        per_prime_caps=caps,
        three_cap=MAX_DIV3 if mode == MODE_NINE else None,
        nine_cap=MAX_DIV9 if mode == MODE_NINE else None,
        valuation_cap=params.a - 1,
        params_key=(params.k, params.d, params.c),
    )


def default_mode(k: int) -> str:
    return MODE_NINE if k == NINE_RUNNER_K else MODE_GENERIC


@dataclass
class TupleCounters:
    """Running divisibility counts for a partial tuple."""

    count_div_q: dict[int, int] = field(default_factory=dict)
    count_div3: int = 0
    count_div9: int = 0
    total_valp: int = 0

    @classmethod
    def empty(cls, profile: ConditionProfile) -> "TupleCounters":
        return cls(count_div_q={q: 0 for q in profile.per_prime_caps})

    def add(self, cand: Candidate) -> None:
        for q in cand.shares:
            self.count_div_q[q] += 1
        self.count_div3 += cand.div3
        self.count_div9 += cand.div9
        self.total_valp += cand.valp

    def remove(self, cand: Candidate) -> None:
        for q in cand.shares:
            self.count_div_q[q] -= 1
        self.count_div3 -= cand.div3
        self.count_div9 -= cand.div9
        self.total_valp -= cand.valp

    def recount(self, members: list[Candidate]) -> "TupleCounters":
        """Fresh counters recomputed from scratch (debug validation)."""
        fresh = TupleCounters(count_div_q={q: 0 for q in self.count_div_q})
        for cand in members:
            fresh.add(cand)
        return fresh


def admits(counters: TupleCounters, cand: Candidate,
           profile: ConditionProfile) -> bool:
    """True iff adding cand keeps every cap satisfied."""
    for q in cand.shares:
        if counters.count_div_q[q] + 1 > profile.per_prime_caps[q]:
            return False
    if profile.three_cap is not None and cand.div3:
        if counters.count_div3 + 1 > profile.three_cap:
            return False
    if profile.nine_cap is not None and cand.div9:
        if counters.count_div9 + 1 > profile.nine_cap:
            return False
    if counters.total_valp + cand.valp > profile.valuation_cap:
        return False
    return True


def equivalent_gcd_check(members: list[int], M: int) -> bool:
    """Direct form of condition (i): every (len-1)-subset S has
    gcd(S + {M}) = 1.  Used to cross-check the per-prime cap encoding."""
    if len(members) < 2:
        return True
    for subset in itertools.combinations(members, len(members) - 1):
        if math.gcd(M, *subset) != 1:
            return False
    return True
