"""Independent brute-force references for the search and the definitions.

Everything here recomputes from first principles: coverage by direct
modular arithmetic, candidate admissibility by a plain divisibility test,
conditions by recounting each subset.  Nothing is shared with the engine's
precomputed tables, so agreement between :func:`exhaustive_bad_cover` and
the real search is meaningful evidence.

Oracles optimize for auditability, not speed, and refuse instances large
enough to make plain enumeration misleading or endless.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

from .conditions import ConditionProfile
from .covertab import InstanceParams
from .errors import ResourceLimitError, UsageError
from .search import COUNTEREXAMPLE, VERIFIED, SearchOutcome, SearchStats

MAX_ORACLE_HALF = 80
MAX_ORACLE_SUBSETS = 10_000_000
MAX_SPEED_SUM = 10_000


@dataclass(frozen=True)
class SpeedSet:
    """A set of distinct positive integer speeds."""

    speeds: tuple[int, ...]

    def __post_init__(self):
        if len(self.speeds) == 0:
            raise UsageError("a speed set needs at least one speed")
        if len(set(self.speeds)) != len(self.speeds):
            raise UsageError(f"speeds must be distinct: {self.speeds}")
        if any(v < 1 for v in self.speeds):
            raise UsageError(f"speeds must be positive: {self.speeds}")

    @property
    def k(self) -> int:
        return len(self.speeds)


def _direct_row(v: int, params: InstanceParams) -> int:
    """Coverage bits of v over targets 1..half, by the raw definition."""
    M, cd = params.M, params.cd
    row = 0
    for j in range(1, params.half + 1):
        r = (v * j) % M
        if r < cd or r > M - cd:
            row |= 1 << (j - 1)
    return row


def exhaustive_bad_cover(params: InstanceParams, profile: ConditionProfile,
                         max_subsets: int = MAX_ORACLE_SUBSETS) -> SearchOutcome:
    """Ground-truth verdict by plain enumeration of all subsets of size <= k.

    No pruning, no ordering heuristics, no shared tables.  Hard size guards
    keep this an oracle rather than a slow twin of the system under test.
    """
    if profile.params_key != (params.k, params.d, params.c):
        raise UsageError("profile and params belong to different instances")
    if params.half > MAX_ORACLE_HALF:
        raise ResourceLimitError(
            f"oracle refuses half = {params.half} > {MAX_ORACLE_HALF}")
    start = time.monotonic()
    cands = [v for v in range(1, params.half + 1) if v % params.d != 0]
    n = len(cands)
    total = sum(math.comb(n, size) for size in range(1, params.k + 1))
    if total > max_subsets:
        raise ResourceLimitError(
            f"oracle refuses {total} subsets ({n} candidates, k = {params.k}), "
            f"limit is {max_subsets}")

    rows = {v: _direct_row(v, params) for v in cands}
    full = (1 << params.half) - 1
    primes = sorted(profile.per_prime_caps)
    checked = 0
    for size in range(1, params.k + 1):
        for subset in itertools.combinations(cands, size):
            checked += 1
            if not _subset_is_bad_cover(subset, rows, full, params, profile, primes):
                continue
            wall = time.monotonic() - start
            return SearchOutcome(COUNTEREXAMPLE, subset,
                                 SearchStats(nodes=checked, wall_seconds=wall))
    wall = time.monotonic() - start
    return SearchOutcome(VERIFIED, None,
                         SearchStats(nodes=checked, wall_seconds=wall))


def _subset_is_bad_cover(subset, rows, full, params, profile, primes) -> bool:
    for q in primes:
        if sum(1 for v in subset if v % q == 0) > profile.per_prime_caps[q]:
            return False
    if profile.three_cap is not None:
        if sum(1 for v in subset if v % 3 == 0) > profile.three_cap:
            return False
    if profile.nine_cap is not None:
        if sum(1 for v in subset if v % 9 == 0) > profile.nine_cap:
            return False
    total_val = 0
    for v in subset:
        while v % params.p == 0:
            v //= params.p
            total_val += 1
    if total_val > profile.valuation_cap:
        return False
    covered = 0
    for v in subset:
        covered |= rows[v]
    return covered == full


def modular_lonely_time(residues: list[int], params: InstanceParams) -> int | None:
    """Smallest t in 0..M-1 staying at distance >= cd from 0 for every
    t*v mod M, or None when the residues cover every time index.

    For a nonempty tuple t = 0 never qualifies, so the scan effectively
    starts at 1; the empty tuple returns 1 by convention so that a returned
    witness is always a usable nonzero time.
    """
    M, cd = params.M, params.cd
    for v in residues:
        if not 0 <= v < M:
            raise UsageError(f"residue {v} outside 0..{M - 1}")
    if not residues:
        return 1
    for t in range(M):
        vulnerable = False
        for v in residues:
            r = (t * v) % M
            if r < cd or r > M - cd:
                vulnerable = True
                break
        if not vulnerable:
            return t
    return None


def lr_holds(speeds: SpeedSet) -> tuple[bool, Fraction | None]:
    """Decide the lonely runner property for an explicit speed set, exactly.

    A time t works when ||t*v|| >= 1/(k+1) for every speed v.  The set of
    working t in [0, 1) is closed and its maximal intervals start at points
    of the form (m + 1/(k+1)) / v, so checking exactly those finitely many
    rationals decides existence; the first one that works is the witness.
    """
    if sum(speeds.speeds) > MAX_SPEED_SUM:
        raise ResourceLimitError(
            f"speed sum {sum(speeds.speeds)} exceeds desk-scale limit {MAX_SPEED_SUM}")
    threshold = Fraction(1, speeds.k + 1)
    for v in sorted(speeds.speeds):
        for m in range(v):
            t = Fraction(m + threshold, v)
            if all(_dist_to_int(t * w) >= threshold for w in speeds.speeds):
                return True, t
    return False, None


def _dist_to_int(x: Fraction) -> Fraction:
    frac = x - math.floor(x)
    return min(frac, 1 - frac)
