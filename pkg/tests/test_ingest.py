import datetime as dt

import numpy as np
import pytest

from lrapm.core import EmptyData, ParseError, ValidationError
from lrapm.ingest import (
    HEADER,
    league_ppp,
    parse_possessions,
    usage_stats,
    write_possessions,
)
from lrapm.synth import SynthConfig, generate

from conftest import START, lineup, possession_set

ROW = "2,a1,a2,a3,a4,a5,b1,b2,b3,b4,b5,G1,2023-10-24"


def write_csv(tmp_path, rows, header=",".join(HEADER)):
    path = tmp_path / "poss.csv"
    path.write_text("\n".join([header, *rows]) + "\n")
    return path


def test_first_day_is_week_one(tmp_path):
    ps = parse_possessions(write_csv(tmp_path, [ROW]), START)
    (p,) = ps.possessions
    assert p.points == 2 and p.week == 1
    assert p.offense == lineup("a") and p.defense == lineup("b")
    assert ps.weeks == 1


def test_week_boundaries(tmp_path):
    rows = [
        "1,a1,a2,a3,a4,a5,b1,b2,b3,b4,b5,G1,2023-10-30",
        "1,a1,a2,a3,a4,a5,b1,b2,b3,b4,b5,G2,2023-10-31",
        "0,a1,a2,a3,a4,a5,b1,b2,b3,b4,b5,G3,2023-11-14",
    ]
    ps = parse_possessions(write_csv(tmp_path, rows), START)
    assert [p.week for p in ps] == [1, 2, 4]
    assert ps.weeks == 4


def test_points_over_bound(tmp_path):
    with pytest.raises(ValidationError) as exc:
        parse_possessions(write_csv(tmp_path, [ROW.replace("2,", "9,", 1)]), START)
    assert exc.value.line == 2


def test_overlap_rejected(tmp_path):
    with pytest.raises(ValidationError):
        parse_possessions(write_csv(tmp_path, ["2,a1,a2,a3,a4,a5,a1,b2,b3,b4,b5,G1,2023-10-24"]), START)


def test_before_season_start_rejected(tmp_path):
    with pytest.raises(ValidationError):
        parse_possessions(write_csv(tmp_path, [ROW.replace("2023-10-24", "2023-10-01")]), START)


@pytest.mark.parametrize("row", [
    "x,a1,a2,a3,a4,a5,b1,b2,b3,b4,b5,G1,2023-10-24",
    "2,a1,a2,a3,a4,a5,b1,b2,b3,b4,G1,2023-10-24",
    "2,a1,a2,a3,a4,a5,b1,b2,b3,b4,b5,G1,24/10/2023",
])
def test_malformed_rows(tmp_path, row):
    with pytest.raises(ParseError):
        parse_possessions(write_csv(tmp_path, [row]), START)


def test_bad_header(tmp_path):
    with pytest.raises(ParseError):
        parse_possessions(write_csv(tmp_path, [ROW], header="pts,a,b"), START)


def test_game_with_two_dates(tmp_path):
    rows = [ROW, ROW.replace("2023-10-24", "2023-10-25")]
    with pytest.raises(ValidationError):
        parse_possessions(write_csv(tmp_path, rows), START)


def test_skip_bad_rows(tmp_path):
    rows = [ROW, ROW.replace("2,", "9,", 1), "garbage", ROW]
    ps = parse_possessions(write_csv(tmp_path, rows), START, skip_bad_rows=True)
    assert len(ps) == 2
    assert ps.skipped_rows == 2
    assert [p.order for p in ps] == [0, 1]


def test_league_ppp_examples():
    a, b = lineup("a"), lineup("b")
    assert league_ppp(possession_set([(pt, a, b, 1) for pt in [0, 2, 3, 0]])) == 1.25
    assert league_ppp(possession_set([(0, a, b, 1)] * 3)) == 0.0
    with pytest.raises(EmptyData):
        league_ppp([])


def test_league_ppp_synthetic_mean():
    # no player effects: every possession has expected points exactly 1.10
    cfg = SynthConfig(n_teams=8, roster_size=8, weeks=50, games_per_week=10, sd_gamma_off=0, sd_gamma_def=0, seed=3)
    ps, _ = generate(cfg)
    assert len(ps) == 100_000
    assert abs(league_ppp(ps) - 1.10) <= 0.01


def test_usage_stats_single_lineup():
    a, b = lineup("a"), lineup("b")
    u = usage_stats(possession_set([(1, a, b, 1)] * 3))
    assert u.off_counts == {a: 3}
    assert u.off_mean == 3 and u.off_std == 0


def test_usage_stats_population_std():
    a, b, c = lineup("a"), lineup("b"), lineup("c")
    rows = [(1, a, c, 1)] * 10 + [(1, b, c, 1)] * 30
    u = usage_stats(possession_set(rows))
    assert u.off_mean == 20 and u.off_std == 10
    assert u.def_counts == {c: 40}


def test_usage_counts_sum_to_total():
    ps, _ = generate(SynthConfig(n_teams=6, roster_size=9, weeks=3, games_per_week=6, seed=2))
    u = usage_stats(ps)
    assert sum(u.off_counts.values()) == len(ps) == sum(u.def_counts.values())
    assert u.off_hist.sum() == len(u.off_counts)
    assert u.bin_edges[0] == 1 and np.all(np.diff(np.log2(u.bin_edges)) == 1)


def test_usage_stats_empty():
    with pytest.raises(EmptyData):
        usage_stats([])


def test_round_trip(tmp_path):
    ps, _ = generate(SynthConfig(n_teams=4, roster_size=7, weeks=3, games_per_week=2, possessions_per_game=40, seed=5))
    path = tmp_path / "rt.csv"
    write_possessions(ps, path)
    back = parse_possessions(path, ps.season_start)
    assert back.possessions == ps.possessions
    assert back.weeks == ps.weeks
    path2 = tmp_path / "rt2.csv"
    write_possessions(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_weeks_non_decreasing_within_game():
    ps, _ = generate(SynthConfig(n_teams=6, roster_size=8, weeks=4, games_per_week=5, possessions_per_game=30, seed=8))
    last = {}
    for p in ps:
        assert p.week >= last.get(p.game_id, 0)
        last[p.game_id] = p.week


def test_interior_gap_warns(tmp_path, caplog):
    rows = [ROW, ROW.replace("G1,2023-10-24", "G2,2023-11-14")]
    ps = parse_possessions(write_csv(tmp_path, rows), START)
    assert ps.weeks == 4
    assert "weeks without possessions" in caplog.text


def test_split_fraction():
    a, b = lineup("a"), lineup("b")
    ps = possession_set([(1, a, b, w) for w in (1, 1, 2, 2)])
    head, tail = ps.split_fraction(0.5)
    assert len(head) == 2 and len(tail) == 2
    assert [p.week for p in tail] == [2, 2]
    with pytest.raises(ValueError):
        ps.split_fraction(1.0)


def test_possession_dates_respected(tmp_path):
    ps = parse_possessions(write_csv(tmp_path, [ROW]), dt.date(2023, 10, 17))
    assert ps.possessions[0].week == 2
