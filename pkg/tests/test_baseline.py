import pytest
from hypothesis import given, strategies as st

from lrapm.baseline import (
    RawRatingTable,
    accumulate_raw,
    adjusted_predict,
    adjusted_table,
    baseline_predict,
    raw_table,
    winston_adjust,
    write_raw_ratings,
)
from lrapm.core import PlayerRatings

from conftest import lineup, possession_set

A, B, C = lineup("a"), lineup("b"), lineup("c")


def test_ten_points_in_ten_possessions():
    t = raw_table(possession_set([(1, A, B, 1)] * 10))
    assert t.off_rating(A) == 100.0
    assert t.def_rating(B) == 100.0


def test_never_on_defense_is_undefined():
    t = raw_table(possession_set([(1, A, B, 1)] * 3))
    assert t.def_rating(A) is None
    assert t.off_rating(B) is None


def test_twenty_six_in_twenty():
    rows = [(2, A, B, 1)] * 6 + [(1, A, B, 1)] * 14
    assert raw_table(possession_set(rows)).off_rating(A) == pytest.approx(130.0)


def test_thirteen_in_ten_is_130():
    # three made threes and four other scores; one three becoming a miss leaves 10
    rows = [(3, A, B, 1)] * 3 + [(1, A, B, 1)] * 4 + [(0, A, B, 1)] * 3
    t = raw_table(possession_set(rows))
    assert t.off_rating(A) == pytest.approx(130.0)
    rows[0] = (0, A, B, 1)
    assert raw_table(possession_set(rows)).off_rating(A) == pytest.approx(100.0)


def test_accumulate_through_week():
    rows = [(2, A, B, 1), (0, A, B, 2), (3, A, B, 3)]
    ps = possession_set(rows)
    assert accumulate_raw(ps, 1).off_rating(A) == 200.0
    assert accumulate_raw(ps, 2).off_rating(A) == 100.0
    assert accumulate_raw(ps, 3).n_possessions == 3
    with pytest.raises(ValueError):
        accumulate_raw(ps, 0)


@pytest.mark.parametrize("raw,avg,want", [(113.2, 0.26, 111.9), (110.0, 0.0, 110.0), (100.0, -0.2, 101.0)])
def test_winston_examples(raw, avg, want):
    assert winston_adjust(raw, avg) == pytest.approx(want)


def league_table(league, off=None, deff=None):
    t = RawRatingTable(league_ppp=league)
    for lu, (n, pts) in (off or {}).items():
        t.off_possessions[lu], t.off_points[lu] = n, pts
    for lu, (n, pts) in (deff or {}).items():
        t.def_possessions[lu], t.def_points[lu] = n, pts
    return t


def test_predict_both_unseen():
    assert baseline_predict(league_table(1.07), A, B) == 1.07


def test_predict_offense_only():
    t = league_table(1.10, off={A: (10, 12)})
    assert baseline_predict(t, A, B) == pytest.approx(1.20)


def test_predict_additive():
    t = league_table(1.10, off={A: (100, 120)}, deff={B: (100, 105)})
    assert baseline_predict(t, A, B) == pytest.approx(1.15)


def test_league_from_data():
    t = raw_table(possession_set([(0, A, B, 1), (2, A, B, 1), (3, A, B, 1), (0, A, B, 1)]))
    assert t.league_ppp == 1.25


rows_strategy = st.lists(
    st.tuples(st.integers(0, 3), st.sampled_from([A, B, C]), st.integers(1, 4)), min_size=1, max_size=40
)


def _materialize(rows):
    # defense must differ from offense
    return [(pts, off, B if off != B else C, wk) for pts, off, wk in rows]


@given(rows_strategy)
def test_incremental_update(rows):
    rows = sorted(_materialize(rows), key=lambda r: r[3])
    ps = possession_set(rows)
    for w in range(1, 4):
        prev, nxt = accumulate_raw(ps, w), accumulate_raw(ps, w + 1)
        week_rows = [r for r in rows if r[3] == w + 1]
        for lu in (A, B, C):
            added = sum(1 for r in week_rows if r[1] == lu)
            added_pts = sum(r[0] for r in week_rows if r[1] == lu)
            assert nxt.off_possessions.get(lu, 0) - prev.off_possessions.get(lu, 0) == added
            assert nxt.off_points.get(lu, 0) - prev.off_points.get(lu, 0) == added_pts


@given(rows_strategy, rows_strategy)
def test_concatenation_between_parts(left, right):
    left, right = _materialize(left), _materialize(right)
    t1, t2 = raw_table(possession_set(left)), raw_table(possession_set(right))
    both = raw_table(possession_set(left + right))
    for lu in (A, B, C):
        parts = [r for r in (t1.off_rating(lu), t2.off_rating(lu)) if r is not None]
        if not parts:
            assert both.off_rating(lu) is None
            continue
        assert min(parts) - 1e-9 <= both.off_rating(lu) <= max(parts) + 1e-9


def test_adjusted_equals_raw_with_zero_ratings():
    ps = possession_set([(2, A, B, 1), (0, A, C, 1), (3, B, C, 1), (1, C, A, 1)])
    zero = PlayerRatings(0.0, {p: 0.0 for p in ps.players()}, {p: 0.0 for p in ps.players()}, 1, 1)
    adj = adjusted_table(ps, zero)
    raw = raw_table(ps)
    for lu in raw.lineups():
        assert adj.off_adj.get(lu) == raw.off_ppp(lu)
        assert adj.def_adj.get(lu) == raw.def_ppp(lu)
        for other in raw.lineups():
            if lu != other:
                assert adjusted_predict(adj, lu, other) == pytest.approx(baseline_predict(raw, lu, other))


def test_adjusted_defense_credits_strong_opponents():
    ps = possession_set([(1, A, B, 1)] * 4)
    strong = PlayerRatings(0.0, {p: 0.002 for p in A}, {}, 1, 1)
    adj = adjusted_table(ps, strong)
    # average opposing offensive rating 0.2 per 100 over five players: 100 - 1.0
    assert adj.def_adj[B] * 100 == pytest.approx(99.0)


def test_write_raw_ratings(tmp_path):
    ps = possession_set([(2, A, B, 1), (1, A, B, 1)])
    path = tmp_path / "raw.csv"
    write_raw_ratings(raw_table(ps), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "p1,p2,p3,p4,p5,off_poss,off_rating,def_poss,def_rating"
    assert lines[1] == "a1,a2,a3,a4,a5,2,150,0,"
    assert lines[2] == "b1,b2,b3,b4,b5,0,,2,150"
