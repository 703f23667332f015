import bisect
import dataclasses
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from cclab import cellprobe as cp
from cclab import proto
from cclab.cellprobe import CellProbeError, CPScheme, ProbeBudgetError, Table
from cclab.proto import A, Schema


def bisect_pred(S, x):
    S = sorted(S)
    k = bisect.bisect_right(S, x)
    return S[k - 1] if k else -1


def loglog_bound(m):
    return 2 * math.ceil(math.log2(max(1, math.log2(m)))) + 4


sets = st.integers(1, 10).flatmap(lambda logm: st.tuples(
    st.just(2 ** logm),
    st.sets(st.integers(0, 2 ** logm - 1), min_size=1, max_size=min(8, 2 ** logm))))


def test_linear_predecessor_matches_bisect():
    rng = random.Random(0)
    for _ in range(200):
        S = rng.sample(range(100), rng.randint(1, 10))
        x = rng.randrange(100)
        assert cp.predecessor(S, x) == bisect_pred(S, x)


def test_table_validation_and_bytes():
    t = Table(3, 12, [0, 4095, 17])
    assert Table.from_bytes(t.to_bytes()) == t
    assert t.with_cell(1, 5)[1] == 5
    with pytest.raises(CellProbeError):
        Table(2, 4, [16, 0])
    with pytest.raises(CellProbeError):
        Table(3, 4, [1, 2])
    with pytest.raises(CellProbeError):
        Table.from_bytes(t.to_bytes()[:-1])


def test_probe_budget_enforced():
    def query(x):
        yield 0
        yield 1
        return 0

    greedy = CPScheme("greedy", 2, 1, 1, lambda d: Table(2, 1, [0, 0]), query,
                      lambda d, x: 0, (0,))
    with pytest.raises(ProbeBudgetError):
        cp.run_query(greedy, None, 0)


def test_out_of_range_probe_rejected():
    def query(x):
        yield 5
        return 0

    bad = CPScheme("bad", 2, 1, 1, lambda d: Table(2, 1, [0, 0]), query, lambda d, x: 0, (0,))
    with pytest.raises(CellProbeError):
        cp.run_query(bad, None, 0)


def test_trace_csv_lists_every_probe():
    sch = cp.sorted_array_scheme(16, 4)
    S = (1, 5, 9, 12)
    res = cp.run_query(sch, S, 10)
    assert res.answer == 9
    lines = cp.trace_csv([(10, res)]).strip().splitlines()
    assert lines[0] == "query,probe_index,address,contents_hex"
    assert len(lines) == 1 + res.probes_used


@settings(max_examples=150, deadline=None)
@given(sets)
def test_sorted_array_and_xfast_exact(case):
    m, S = case
    n = len(S)
    for kind in ("sorted-array", "xfast"):
        sch = cp.build_predecessor_scheme(kind, m, n, seed=3)
        table = sch.storage(S)
        assert table.s <= sch.s
        for x in range(m):
            res = cp.run_query(sch, S, x, table)
            assert res.answer == bisect_pred(S, x)
            assert res.probes_used <= sch.t


@pytest.mark.parametrize("m", [2, 4, 16, 256, 2 ** 16])
def test_xfast_probe_bound(m):
    rng = random.Random(m)
    n = min(8, m)
    sch = cp.xfast_scheme(m, n, seed=1)
    assert sch.t <= loglog_bound(m)
    queries = range(m) if m <= 256 else [rng.randrange(m) for _ in range(2000)]
    rep = cp.verify_scheme(sch, cp.random_sets(rng, m, n, 5), queries)
    assert rep.max_error == 0
    assert rep.max_probes <= loglog_bound(m)


@settings(max_examples=100, deadline=None)
@given(sets, st.integers(0, 1000))
def test_fks_two_probes(case, seed):
    m, S = case
    sch = cp.fks_rank_scheme(m, len(S), seed)
    table = sch.storage(S)
    ordered = sorted(S)
    for y in range(m):
        res = cp.run_query(sch, S, y, table)
        assert res.probes_used <= 2
        expected = (True, ordered.index(y) + 1) if y in S else (False, 0)
        assert res.answer == expected


def test_fks_space_is_linear_on_average():
    rng = random.Random(4)
    n = 64
    sch = cp.fks_rank_scheme(2 ** 12, n, seed=0)
    sizes = [sch.storage(S).s for S in cp.random_sets(rng, 2 ** 12, n, 20)]
    assert sum(sizes) / len(sizes) <= 6 * n


def test_rank_parity_scheme():
    rng = random.Random(5)
    for n in (1, 3, 8):
        sch = cp.pred_to_rankparity(cp.xfast_scheme(64, n, 2), cp.fks_rank_scheme(64, n, 2))
        for S in cp.random_sets(rng, 64, n, 5):
            table = sch.storage(S)
            for x in range(64):
                res = cp.run_query(sch, S, x, table)
                assert res.answer == ("odd" if sum(y <= x for y in S) % 2 else "even")
                assert res.probes_used <= sch.t


def test_rank_parity_needs_matching_universes():
    with pytest.raises(CellProbeError):
        cp.pred_to_rankparity(cp.xfast_scheme(64, 4), cp.fks_rank_scheme(32, 4))


def test_scheme_to_protocol_schema():
    p = cp.scheme_to_protocol(cp.sorted_array_scheme(16, 4))
    assert p.schema == Schema(A, (2, 4, 2, 4, 2, 4))
    assert str(p.schema) == "[6; 2, 4, 2, 4, 2, 4]^A"


def test_scheme_to_protocol_errs_exactly_like_the_scheme():
    """A scheme checked against the wrong reference keeps the same error as a protocol."""
    base = cp.sorted_array_scheme(16, 2)
    off_by_one = dataclasses.replace(base, problem=lambda S, x: cp.predecessor(S, max(x - 1, 0)))
    data = cp.all_sets(16, 2)
    g = cp.scheme_game(off_by_one, data)
    p = cp.scheme_to_protocol(off_by_one)
    profile = proto.error_profile(p, g)
    for d in data:
        table = off_by_one.storage(d)
        for x in range(16):
            wrong = cp.run_query(off_by_one, d, x, table).answer != off_by_one.problem(d, x)
            assert profile[(x, d)] == int(wrong)
    assert any(profile.values())


def test_bad_inputs_rejected():
    with pytest.raises(CellProbeError):
        cp.sorted_array_scheme(12, 2)
    with pytest.raises(CellProbeError):
        cp.xfast_scheme(16, 0)
    with pytest.raises(CellProbeError):
        cp.sorted_array_scheme(16, 2).storage((1, 2, 3))
    with pytest.raises(CellProbeError):
        cp.build_predecessor_scheme("veb", 16, 2)
