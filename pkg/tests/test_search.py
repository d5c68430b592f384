import itertools

import pytest

from runnercover.conditions import TupleCounters
from runnercover.covertab import covers
from runnercover.errors import InternalError, UsageError
from runnercover.oracle import exhaustive_bad_cover
from runnercover.search import (ABORTED, COUNTEREXAMPLE, VERIFIED,
                                SearchOptions, SearchState, find_bad_cover,
                                initial_state, learn_exclusion, prune_extension,
                                select_pivot, validate_witness)

SMALL = [(3, 5, 1, "generic"), (3, 4, 1, "generic"), (3, 7, 2, "generic"),
         (4, 7, 1, "generic"), (4, 11, 2, "generic"), (8, 5, 1, "nine"),
         (8, 7, 1, "nine")]


class TestVerdicts:
    def test_k5_d31_verified(self, instance):
        _, profile, table, cands = instance(5, 31, 1, "generic")
        out = find_bad_cover(table, cands, profile)
        assert out.verdict == VERIFIED
        assert out.witness is None

    def test_small_instances_match_oracle(self, instance):
        for k, d, c, mode in SMALL:
            params, profile, table, cands = instance(k, d, c, mode)
            got = find_bad_cover(table, cands, profile,
                                 SearchOptions(engine="python"))
            expected = exhaustive_bad_cover(params, profile)
            assert got.verdict == expected.verdict, (k, d, c, mode)

    def test_witness_revalidates(self, instance):
        params, profile, table, cands = instance(3, 5, 1, "generic")
        out = find_bad_cover(table, cands, profile)
        assert out.verdict == COUNTEREXAMPLE
        validate_witness(out.witness, params, profile)
        full = set(range(1, params.half + 1))
        covered = {j for j in full if any(covers(v, j, params) for v in out.witness)}
        assert covered == full


class TestSelectPivot:
    def test_matches_direct_column_counts(self, instance):
        params, profile, table, cands = instance(8, 31, 1, "nine")
        state = initial_state(cands, profile)
        got = select_pivot(state, table)
        # independent recount: per-target coverer counts via covers()
        counts = {}
        for j in range(1, params.half + 1):
            counts[j] = sum(1 for c in cands if covers(c.v, j, params))
        best = min(counts.values())
        expected = min(j for j, cnt in counts.items() if cnt == best)
        assert got == expected

    def test_zero_coverer_target_returned(self, instance):
        params, profile, table, cands = instance(8, 31, 1, "nine")
        state = initial_state(cands, profile)
        state.available[-1] = frozenset({1})
        # candidate 1 covers exactly 1..30, so target 31 is the first
        # uncovered target with no coverers at all
        assert select_pivot(state, table) == 31

    def test_tie_broken_by_smallest_index(self, instance):
        params, profile, table, cands = instance(3, 5, 1, "generic")
        state = initial_state(cands, profile)
        got = select_pivot(state, table)
        counts = {j: sum(1 for c in cands if covers(c.v, j, params))
                  for j in range(1, params.half + 1)}
        best = min(counts.values())
        assert got == min(j for j, cnt in counts.items() if cnt == best)

    def test_needs_uncovered_target(self, instance):
        _, profile, table, cands = instance(3, 5, 1, "generic")
        state = initial_state(cands, profile)
        state.covered = table.full_mask
        with pytest.raises(UsageError):
            select_pivot(state, table)


class TestPruneExtension:
    def test_last_slot_prunes_iff_incomplete(self, instance):
        params, profile, table, cands = instance(3, 5, 1, "generic")
        by_v = {c.v: c for c in cands}
        # chosen = {1, 3}: covers {1,2,3,4} | {1,6,7,8}; third slot left
        state = SearchState(
            chosen=[by_v[1], by_v[3]],
            covered=table.row(1) | table.row(3),
            counters=TupleCounters.empty(profile),
            available=[frozenset(by_v) - {1, 3}])
        # 4 completes the cover (adds 5, 9, 10): never pruned
        assert prune_extension(state, by_v[4], table) is False
        # 2 leaves gaps with no slots left: always pruned
        assert prune_extension(state, by_v[2], table) is True

    def test_full_cover_never_pruned(self, instance):
        params, profile, table, cands = instance(3, 5, 1, "generic")
        by_v = {c.v: c for c in cands}
        state = SearchState(
            chosen=[by_v[1], by_v[3]],
            covered=table.row(1) | table.row(3),
            counters=TupleCounters.empty(profile),
            available=[frozenset()])
        # U = 0 after adding 4, even with nothing else available
        assert prune_extension(state, by_v[4], table) is False

    def test_matches_definition(self, instance):
        params, profile, table, cands = instance(4, 7, 1, "generic")
        by_v = {c.v: c for c in cands}
        k = params.k
        for first in list(by_v)[:6]:
            state = SearchState(
                chosen=[by_v[first]],
                covered=table.row(first),
                counters=TupleCounters.empty(profile),
                available=[frozenset(by_v) - {first}])
            for x in list(by_v)[:8]:
                if x == first:
                    continue
                tentative = state.covered | table.row(x)
                uncovered = params.half - tentative.bit_count()
                best = max((table.row(v) & ~tentative).bit_count()
                           for v in state.available_now)
                expected = (uncovered > 0) and best * (k - 2) < uncovered
                assert prune_extension(state, by_v[x], table) == expected


class TestLearnExclusion:
    def test_scoped_removal(self, instance):
        _, profile, table, cands = instance(3, 5, 1, "generic")
        state = initial_state(cands, profile)
        state.available.append(state.available[-1])  # descend one level
        before_root = state.available[0]
        state = learn_exclusion(state, cands[0])
        assert cands[0].v not in state.available[-1]
        assert state.available[0] == before_root  # outer depth untouched


class TestHeuristicNeutrality:
    def test_toggles_never_change_verdict(self, instance):
        for k, d, c, mode in SMALL:
            _, profile, table, cands = instance(k, d, c, mode)
            outcomes = {}
            for pruning, learning, mrv in itertools.product([True, False], repeat=3):
                opts = SearchOptions(pruning=pruning, learning=learning,
                                     mrv=mrv, engine="python")
                out = find_bad_cover(table, cands, profile, opts)
                outcomes[(pruning, learning, mrv)] = out
            verdicts = {out.verdict for out in outcomes.values()}
            assert len(verdicts) == 1, (k, d, c, mode)

    def test_learning_never_increases_nodes(self, instance):
        for k, d, c, mode in SMALL:
            _, profile, table, cands = instance(k, d, c, mode)
            if find_bad_cover(table, cands, profile).verdict != VERIFIED:
                continue  # node counts only comparable on exhausted trees
            base = find_bad_cover(table, cands, profile, SearchOptions(
                learning=False, engine="python"))
            learned = find_bad_cover(table, cands, profile, SearchOptions(
                learning=True, engine="python"))
            assert learned.stats.nodes <= base.stats.nodes, (k, d, c, mode)

    def test_determinism_single_worker(self, instance):
        for k, d, c, mode in [(4, 11, 2, "generic"), (3, 5, 1, "generic")]:
            _, profile, table, cands = instance(k, d, c, mode)
            runs = [find_bad_cover(table, cands, profile) for _ in range(2)]
            assert runs[0].verdict == runs[1].verdict
            assert runs[0].witness == runs[1].witness
            assert runs[0].stats.nodes == runs[1].stats.nodes
            assert runs[0].stats.prune_hits == runs[1].stats.prune_hits
            assert runs[0].stats.exclusions == runs[1].stats.exclusions


class TestEngineEquivalence:
    def test_compiled_matches_python(self, instance):
        for k, d, c, mode in SMALL + [(5, 31, 1, "generic")]:
            _, profile, table, cands = instance(k, d, c, mode)
            py = find_bad_cover(table, cands, profile, SearchOptions(engine="python"))
            nb = find_bad_cover(table, cands, profile, SearchOptions(engine="compiled"))
            assert py.verdict == nb.verdict
            assert py.witness == nb.witness
            assert py.stats.nodes == nb.stats.nodes
            assert py.stats.prune_hits == nb.stats.prune_hits
            assert py.stats.exclusions == nb.stats.exclusions

    def test_compiled_rejects_toggles(self, instance):
        _, profile, table, cands = instance(3, 5, 1, "generic")
        with pytest.raises(UsageError):
            find_bad_cover(table, cands, profile,
                           SearchOptions(pruning=False, engine="compiled"))


class TestAbort:
    def test_timeout_aborts_not_verifies(self, instance):
        _, profile, table, cands = instance(8, 31, 1, "nine")
        for engine in ("python", "compiled"):
            out = find_bad_cover(table, cands, profile, SearchOptions(
                engine=engine, timeout_seconds=0.2))
            assert out.verdict == ABORTED
            assert out.witness is None
            assert out.abort_reason


class TestWorkers:
    def test_counterexample_with_workers(self, instance):
        params, profile, table, cands = instance(3, 5, 1, "generic")
        out = find_bad_cover(table, cands, profile, SearchOptions(workers=2))
        assert out.verdict == COUNTEREXAMPLE
        validate_witness(out.witness, params, profile)

    def test_verified_stats_match_sequential(self, instance):
        _, profile, table, cands = instance(4, 11, 2, "generic")
        seq = find_bad_cover(table, cands, profile)
        par = find_bad_cover(table, cands, profile, SearchOptions(workers=2))
        assert par.verdict == VERIFIED
        assert par.stats.nodes == seq.stats.nodes
        assert par.stats.prune_hits == seq.stats.prune_hits
        assert par.stats.exclusions == seq.stats.exclusions

    def test_bad_worker_count(self, instance):
        _, profile, table, cands = instance(3, 5, 1, "generic")
        with pytest.raises(UsageError):
            find_bad_cover(table, cands, profile, SearchOptions(workers=0))


class TestWitnessValidation:
    def test_corrupted_witness_is_fatal(self, instance):
        params, profile, table, cands = instance(3, 5, 1, "generic")
        out = find_bad_cover(table, cands, profile)
        broken = out.witness[:-1]
        with pytest.raises(InternalError):
            validate_witness(broken, params, profile)

    def test_repeated_member_is_fatal(self, instance):
        params, profile, _, _ = instance(3, 5, 1, "generic")
        with pytest.raises(InternalError):
            validate_witness((1, 1, 3), params, profile)
