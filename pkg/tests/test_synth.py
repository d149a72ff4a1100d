import numpy as np
import pytest
from hypothesis import given, strategies as st

from lrapm.core import make_lineup_key
from lrapm.ingest import usage_stats, write_possessions
from lrapm.rapm import fit_rapm
from lrapm.synth import (
    GroundTruth,
    InvalidConfig,
    SynthConfig,
    UnknownPlayer,
    generate,
    generate_seasons,
    point_distribution,
    read_ground_truth,
    true_expected_points,
    write_ground_truth,
)

SMALL = dict(n_teams=6, roster_size=9, weeks=4, games_per_week=6, possessions_per_game=60)


def test_same_seed_same_season(tmp_path):
    a, gt_a = generate(SynthConfig(seed=7, **SMALL))
    b, gt_b = generate(SynthConfig(seed=7, **SMALL))
    assert a.possessions == b.possessions
    assert gt_a.off == gt_b.off
    write_possessions(a, tmp_path / "a.csv")
    write_possessions(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_different_seed_differs():
    a, _ = generate(SynthConfig(seed=7, **SMALL))
    b, _ = generate(SynthConfig(seed=8, **SMALL))
    assert a.possessions != b.possessions


def test_seasons_share_players_not_outcomes():
    (s1, s2), gt = generate_seasons(SynthConfig(seed=1, **SMALL), 2)
    assert s1.players() <= set(gt.off) and s2.players() <= set(gt.off)
    assert [p.points for p in s1] != [p.points for p in s2]
    assert s1.season_label != s2.season_label


def test_shape_of_season():
    cfg = SynthConfig(seed=2, **SMALL)
    ps, gt = generate(cfg)
    assert len(ps) == cfg.weeks * cfg.games_per_week * cfg.possessions_per_game
    assert ps.weeks == cfg.weeks
    assert len(gt.off) == cfg.n_teams * cfg.roster_size
    for p in ps:
        teams_off = {q[:3] for q in p.offense}
        teams_def = {q[:3] for q in p.defense}
        assert len(teams_off) == 1 and len(teams_def) == 1 and teams_off != teams_def


def test_null_model():
    cfg = SynthConfig(sd_gamma_off=0, sd_gamma_def=0, seed=3, **SMALL)
    ps, gt = generate(cfg)
    assert set(gt.off.values()) == {0.0} and set(gt.def_.values()) == {0.0}
    for p in ps.possessions[:200]:
        assert true_expected_points(gt, p.offense, p.defense) == cfg.league_mean_ppp
    r = fit_rapm(ps, 5000, 5000)
    assert max(abs(v) for v in r.off.values()) < 0.02


def test_default_usage_shape():
    ps, _ = generate(SynthConfig(seed=0))
    u = usage_stats(ps)
    assert 10 <= u.off_mean <= 25
    assert u.off_std / u.off_mean >= 2


def gt_with(off, deff, league=1.10):
    return GroundTruth(off, deff, league)


A = make_lineup_key(["a1", "a2", "a3", "a4", "a5"])
B = make_lineup_key(["b1", "b2", "b3", "b4", "b5"])


def test_expected_points_zero_effects():
    gt = gt_with({p: 0.0 for p in A}, {p: 0.0 for p in B})
    assert true_expected_points(gt, A, B) == 1.10


def test_expected_points_sum():
    gt = gt_with(dict(zip(A, [0.05, 0, 0, 0, 0])), dict(zip(B, [0.01, 0.01, 0, 0, 0])))
    assert true_expected_points(gt, A, B) == pytest.approx(1.13)


def test_expected_points_clamped():
    assert true_expected_points(gt_with({p: -0.5 for p in A}, {p: 0.0 for p in B}), A, B) == 0.0
    assert true_expected_points(gt_with({p: 0.5 for p in A}, {p: 0.0 for p in B}), A, B) == 3.0


def test_unknown_player():
    with pytest.raises(UnknownPlayer):
        true_expected_points(gt_with({}, {}), A, B)


@given(st.floats(0.0, 3.0))
def test_point_distribution_exact(mu):
    probs = point_distribution(mu)
    assert probs.shape == (4,)
    assert np.all(probs >= -1e-15)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert probs @ np.arange(4) == pytest.approx(mu, abs=1e-12)


def test_point_distribution_vectorised_and_clamped():
    probs = point_distribution([-1.0, 1.1, 5.0])
    assert probs.shape == (3, 4)
    np.testing.assert_allclose(probs @ np.arange(4), [0.0, 1.1, 3.0])
    assert 0.4 <= probs[1, 0] <= 0.6  # about half of league-average possessions score nothing


def test_empirical_mean_matches_truth():
    cfg = SynthConfig(n_teams=10, roster_size=10, weeks=20, games_per_week=25, possessions_per_game=200,
                      sd_gamma_off=0.05, sd_gamma_def=0.05, seed=9)
    ps, gt = generate(cfg)
    assert len(ps) >= 100_000
    pts = np.array([p.points for p in ps])
    truth = np.array([true_expected_points(gt, p.offense, p.defense) for p in ps])
    assert abs(pts.mean() - truth.mean()) <= 0.01


@pytest.mark.parametrize("kw", [
    dict(roster_size=4), dict(n_teams=1), dict(sd_gamma_off=-0.1), dict(weeks=0),
    dict(league_mean_ppp=3.5), dict(rotation_concentration=-1),
])
def test_invalid_config(kw):
    with pytest.raises(InvalidConfig):
        SynthConfig(**kw)


def test_invalid_season_count():
    with pytest.raises(InvalidConfig):
        generate_seasons(SynthConfig(**SMALL), 0)


def test_ground_truth_round_trip(tmp_path):
    _, gt = generate(SynthConfig(seed=4, **SMALL))
    path = tmp_path / "gt.csv"
    write_ground_truth(gt, path)
    assert path.read_text().splitlines()[0] == "player_id,gamma_off_true,gamma_def_true"
    back = read_ground_truth(path, 1.10)
    assert set(back.off) == set(gt.off)
    for p in gt.off:
        assert back.off[p] == pytest.approx(gt.off[p], rel=1e-5)
