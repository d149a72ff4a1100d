"""Synthetic seasons with known player effects.

Every possession's expected points follow the additive player model
``league + sum(off effects) - sum(def effects)``, clamped to [0, 3], and
realised points are drawn on {0, 1, 2, 3} with exactly that mean. Teams
pick lineups from a fixed per-season pool with Zipf-like usage weights, so
a few lineups soak up most possessions and most lineups barely play.
"""

from __future__ import annotations

import csv
import datetime as dt
import itertools
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Union

import numpy as np

from .core import LrapmError, LineupKey, Possession
from .ingest import DEFAULT_SEASON_START, PossessionSet

MAX_EXPECTED = 3.0
# shape of made-basket outcomes (1, 2, 3 points) given that a possession scores
SCORE_SHAPE = np.array([0.10, 0.75, 0.15])


class InvalidConfig(LrapmError, ValueError):
    pass


class UnknownPlayer(LrapmError, KeyError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_teams: int = 30
    roster_size: int = 15
    weeks: int = 25
    games_per_week: int = 49
    possessions_per_game: int = 200
    sd_gamma_off: float = 0.02
    sd_gamma_def: float = 0.02
    league_mean_ppp: float = 1.10
    # Zipf exponent on a lineup's usage rank within its team's pool
    rotation_concentration: float = 0.95
    # how fast player minutes fall off down the depth chart
    depth_decay: float = 0.25
    lineup_pool: int = 600
    stint_length: int = 6
    seed: int = 0
    season_start: dt.date = DEFAULT_SEASON_START

    def __post_init__(self):
        if self.n_teams < 2:
            raise InvalidConfig("need at least two teams")
        if self.roster_size < 5:
            raise InvalidConfig("roster_size must be >= 5")
        if min(self.weeks, self.games_per_week, self.possessions_per_game, self.lineup_pool, self.stint_length) < 1:
            raise InvalidConfig("counts must be positive")
        if self.sd_gamma_off < 0 or self.sd_gamma_def < 0:
            raise InvalidConfig("effect spreads must be >= 0")
        if not 0.0 <= self.league_mean_ppp <= MAX_EXPECTED:
            raise InvalidConfig("league_mean_ppp outside [0, 3]")
        if self.rotation_concentration < 0 or self.depth_decay < 0:
            raise InvalidConfig("concentration parameters must be >= 0")


@dataclass(frozen=True)
class GroundTruth:
    off: dict
    def_: dict
    league_mean: float
    rosters: dict = field(default_factory=dict)


def point_distribution(mu) -> np.ndarray:
    """Probabilities of scoring 0..3 points with mean ``mu`` (vectorised).

    Below the mean of ``SCORE_SHAPE`` the chance of scoring at all scales
    with ``mu``; above it, mass moves toward three points.
    """
    mu = np.clip(np.asarray(mu, dtype=float), 0.0, MAX_EXPECTED)
    m = SCORE_SHAPE @ np.arange(1, 4)
    out = np.zeros(mu.shape + (4,))
    low = mu <= m
    s = mu[low] / m
    out[low, 0] = 1.0 - s
    out[low, 1:] = s[:, None] * SCORE_SHAPE
    t = (mu[~low] - m) / (MAX_EXPECTED - m)
    out[~low, 1:] = (1.0 - t)[:, None] * SCORE_SHAPE
    out[~low, 3] += t
    return out


def true_expected_points(gt: GroundTruth, off: LineupKey, deff: LineupKey) -> float:
    try:
        raw = gt.league_mean + sum(gt.off[p] for p in off) - sum(gt.def_[p] for p in deff)
    except KeyError as exc:
        raise UnknownPlayer(exc.args[0]) from None
    return min(max(raw, 0.0), MAX_EXPECTED)


def _player_id(team: int, slot: int) -> str:
    return f"t{team:02d}p{slot:02d}"


def _lineup_pool(rng, roster: list, weights: np.ndarray, size: int) -> list:
    """Distinct 5-player lineups ordered from most to least minutes-weighted."""
    n = len(roster)
    if comb(n, 5) <= size:
        subsets = [tuple(c) for c in itertools.combinations(range(n), 5)]
    else:
        seen = {}
        logw = np.log(weights)
        attempts = 0
        while len(seen) < size and attempts < 50 * size:
            # Gumbel top-k draws 5 players without replacement, prob. ~ weights
            keys = logw + rng.gumbel(size=n)
            c = tuple(sorted(np.argpartition(-keys, 5)[:5].tolist()))
            seen.setdefault(c, None)
            attempts += 1
        subsets = list(seen)
    score = np.array([np.log(weights[list(c)]).sum() for c in subsets])
    order = np.argsort(-score, kind="stable")
    subsets = [subsets[i] for i in order]
    return [LineupKey(tuple(roster[i] for i in c)) for c in subsets]


def generate_seasons(cfg: SynthConfig, n_seasons: int = 1) -> tuple:
    """Simulate ``n_seasons`` seasons of the same league; returns (list of PossessionSet, GroundTruth)."""
    if n_seasons < 1:
        raise InvalidConfig("n_seasons must be >= 1")
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_seasons + 1)
    rng = np.random.default_rng(seeds[0])
    rosters = {t: [_player_id(t, s) for s in range(cfg.roster_size)] for t in range(cfg.n_teams)}
    players = [p for t in range(cfg.n_teams) for p in rosters[t]]
    g_off = rng.normal(0.0, cfg.sd_gamma_off, len(players)) if cfg.sd_gamma_off > 0 else np.zeros(len(players))
    g_def = rng.normal(0.0, cfg.sd_gamma_def, len(players)) if cfg.sd_gamma_def > 0 else np.zeros(len(players))
    gt = GroundTruth(
        off=dict(zip(players, g_off.tolist())),
        def_=dict(zip(players, g_def.tolist())),
        league_mean=cfg.league_mean_ppp,
        rosters=rosters,
    )
    seasons = [
        _simulate_season(cfg, gt, np.random.default_rng(seeds[k + 1]), f"synth-s{k + 1}")
        for k in range(n_seasons)
    ]
    return seasons, gt


def generate(cfg: SynthConfig) -> tuple:
    seasons, gt = generate_seasons(cfg, 1)
    return seasons[0], gt


def _simulate_season(cfg: SynthConfig, gt: GroundTruth, rng, label: str) -> PossessionSet:
    depth = np.exp(-cfg.depth_decay * np.arange(cfg.roster_size))
    pools = []
    for t in range(cfg.n_teams):
        # shuffle who starts each season so depth charts differ year to year
        roster = [gt.rosters[t][i] for i in rng.permutation(cfg.roster_size)]
        keys = _lineup_pool(rng, roster, depth, cfg.lineup_pool)
        usage = (np.arange(len(keys)) + 1.0) ** -cfg.rotation_concentration
        usage /= usage.sum()
        off_sum = np.array([sum(gt.off[p] for p in k) for k in keys])
        def_sum = np.array([sum(gt.def_[p] for p in k) for k in keys])
        pools.append((keys, usage, off_sum, def_sum))

    ppg = cfg.possessions_per_game
    n_stints = -(-ppg // cfg.stint_length)
    slot_stint = np.arange(ppg) // cfg.stint_length
    home_has_ball = np.arange(ppg) % 2 == 0
    possessions = []
    game_no = 0
    for week in range(1, cfg.weeks + 1):
        matchups = []
        while len(matchups) < cfg.games_per_week:
            perm = rng.permutation(cfg.n_teams)
            matchups.extend(zip(perm[0::2].tolist(), perm[1::2].tolist()))
        for g, (home, away) in enumerate(matchups[: cfg.games_per_week]):
            game_no += 1
            date = cfg.season_start + dt.timedelta(days=7 * (week - 1) + (7 * g) // cfg.games_per_week)
            gid = f"{label}-g{game_no:05d}"
            hk, hu, ho, hd = pools[home]
            ak, au, ao, ad = pools[away]
            h_lu = rng.choice(len(hk), size=n_stints, p=hu)[slot_stint]
            a_lu = rng.choice(len(ak), size=n_stints, p=au)[slot_stint]
            mu = np.where(
                home_has_ball,
                cfg.league_mean_ppp + ho[h_lu] - ad[a_lu],
                cfg.league_mean_ppp + ao[a_lu] - hd[h_lu],
            )
            cdf = np.cumsum(point_distribution(mu), axis=1)
            pts = (rng.random(ppg)[:, None] >= cdf[:, :3]).sum(axis=1)
            for i in range(ppg):
                if home_has_ball[i]:
                    off, deff = hk[h_lu[i]], ak[a_lu[i]]
                else:
                    off, deff = ak[a_lu[i]], hk[h_lu[i]]
                possessions.append(Possession(int(pts[i]), off, deff, gid, date, len(possessions), week))
    return PossessionSet(tuple(possessions), label, cfg.weeks, season_start=cfg.season_start)


def write_ground_truth(gt: GroundTruth, path: Union[str, Path]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["player_id", "gamma_off_true", "gamma_def_true"])
        for p in sorted(gt.off):
            writer.writerow([p, f"{gt.off[p]:.6g}", f"{gt.def_[p]:.6g}"])


def read_ground_truth(path: Union[str, Path], league_mean: float = float("nan")) -> GroundTruth:
    off, deff = {}, {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            off[row["player_id"]] = float(row["gamma_off_true"])
            deff[row["player_id"]] = float(row["gamma_def_true"])
    return GroundTruth(off, deff, league_mean)
