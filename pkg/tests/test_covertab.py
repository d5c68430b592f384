import math

import pytest

from runnercover.conditions import make_profile
from runnercover.covertab import (admissible_candidates, build_table, covers,
                                  load_table, make_params, save_table,
                                  table_memory_estimate)
from runnercover.errors import ResourceLimitError, UsageError


class TestMakeParams:
    def test_derived_fields(self):
        params = make_params(8, 31, 1)
        assert (params.M, params.cd, params.half) == (279, 31, 139)
        assert (params.p, params.a) == (31, 1)
        assert params.m_primes == (3, 31)

    def test_prime_power(self):
        params = make_params(8, 81, 1)
        assert (params.p, params.a, params.M) == (3, 4, 729)

    def test_rejects_bad_inputs(self):
        with pytest.raises(UsageError):
            make_params(2, 5, 1)
        with pytest.raises(UsageError):
            make_params(3, 12, 1)  # not a prime power
        with pytest.raises(UsageError):
            make_params(3, 5, 0)
        with pytest.raises(UsageError):
            make_params(3, 1, 1)


class TestCovers:
    def test_examples_d31(self):
        params = make_params(8, 31, 1)
        assert covers(1, 15, params) is True
        assert covers(1, 31, params) is False

    def test_time_zero_always_covered(self):
        for k, d, c in [(8, 31, 1), (3, 5, 1), (5, 13, 2)]:
            params = make_params(k, d, c)
            for v in range(params.M):
                assert covers(v, 0, params)

    def test_range_validation(self):
        params = make_params(3, 5, 1)
        with pytest.raises(UsageError):
            covers(params.M, 1, params)
        with pytest.raises(UsageError):
            covers(1, -1, params)

    def test_symmetries(self):
        # v covers j  <=>  v covers M-j  <=>  M-v covers j
        for k, d, c in [(3, 5, 1), (4, 7, 1), (8, 3, 2)]:
            params = make_params(k, d, c)
            for v in range(1, params.M):
                for j in range(1, params.M):
                    base = covers(v, j, params)
                    assert covers(v, params.M - j, params) == base
                    assert covers(params.M - v, j, params) == base


class TestBuildTable:
    def test_row_of_one(self):
        table = build_table(make_params(8, 31, 1))
        expected = 0
        for j in range(1, 31):
            expected |= 1 << (j - 1)
        assert table.row(1) == expected

    def test_coprime_row_popcount(self):
        # for gcd(v, M) = 1 the folded row covers exactly cd - 1 targets;
        # checked against a direct recount via covers()
        params = make_params(8, 31, 1)
        table = build_table(params)
        for v in range(1, params.half + 1):
            recount = sum(1 for j in range(1, params.half + 1)
                          if covers(v, j, params))
            assert table.row(v).bit_count() == recount
            if math.gcd(v, params.M) == 1:
                assert recount == params.cd - 1

    def test_matches_dense_recompute(self):
        # independent double loop over (v, j)
        params = make_params(3, 5, 1)
        table = build_table(params)
        for v in range(1, params.half + 1):
            dense = 0
            for j in range(1, params.half + 1):
                r = (v * j) % params.M
                if min(r, params.M - r) < params.cd:
                    dense |= 1 << (j - 1)
            assert table.row(v) == dense

    def test_folded_rows_match_unfolded_partner(self):
        params = make_params(4, 7, 1)
        table = build_table(params)
        for v in range(1, params.half + 1):
            partner_row = 0
            for j in range(1, params.half + 1):
                if covers(params.M - v, j, params):
                    partner_row |= 1 << (j - 1)
            assert table.row(v) == partner_row

    def test_memory_budget(self):
        params = make_params(8, 31, 1)
        need = table_memory_estimate(params)
        with pytest.raises(ResourceLimitError) as err:
            build_table(params, memory_budget=need - 1)
        assert str(need) in str(err.value)

    def test_row_bounds(self):
        table = build_table(make_params(3, 5, 1))
        with pytest.raises(UsageError):
            table.row(0)
        with pytest.raises(UsageError):
            table.row(11)


class TestAdmissibleCandidates:
    def test_d31_count(self, instance):
        _, _, _, cands = instance(8, 31, 1, "nine")
        assert len(cands) == 135
        assert {c.v for c in cands} == set(range(1, 140)) - {31, 62, 93, 124}

    def test_k5_d31_count(self, instance):
        _, _, _, cands = instance(5, 31, 1, "generic")
        assert len(cands) == 90

    def test_d81_count(self, instance):
        params, _, _, cands = instance(8, 81, 1, "nine")
        assert params.half == 364
        assert len(cands) == 360
        assert {v for v in range(1, 365) if v % 81 == 0} == {81, 162, 243, 324}
        assert all(c.v % 81 != 0 for c in cands)

    def test_attributes(self, instance):
        params, _, _, cands = instance(8, 81, 1, "nine")
        by_v = {c.v: c for c in cands}
        assert by_v[27].valp == 3 and by_v[27].div9 and by_v[27].div3
        assert by_v[6].valp == 1 and by_v[6].div3 and not by_v[6].div9
        assert by_v[2].valp == 0 and by_v[2].shares == frozenset()
        assert by_v[9].shares == frozenset({3})

    def test_profile_mismatch_rejected(self):
        params31 = make_params(8, 31, 1)
        profile37 = make_profile(make_params(8, 37, 1), "nine")
        with pytest.raises(UsageError):
            admissible_candidates(params31, profile37)


class TestTableCache:
    def test_roundtrip(self, tmp_path):
        table = build_table(make_params(8, 17, 3))
        path = tmp_path / "table.bin"
        save_table(table, path)
        loaded = load_table(path)
        assert loaded.params == table.params
        assert loaded.rows == table.rows
        assert loaded.checksum() == table.checksum()

    def test_tamper_detected(self, tmp_path):
        table = build_table(make_params(3, 5, 1))
        path = tmp_path / "table.bin"
        save_table(table, path)
        data = bytearray(path.read_bytes())
        data[60] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(UsageError):
            load_table(path)

    def test_not_a_table(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a table at all")
        with pytest.raises(UsageError):
            load_table(path)
