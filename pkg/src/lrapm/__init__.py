"""Lineup ratings from possession data: RAPM player ratings, prior-centred lineup
regression, raw-rating baselines, and an expanding-window backtest."""

from .core import (
    LineupKey,
    LineupPriorTable,
    LineupRatings,
    PlayerRatings,
    Possession,
    make_lineup_key,
)
from .ingest import PossessionSet, league_ppp, parse_possessions, usage_stats, write_possessions
from .solver import PenaltySpec, RidgeSolution, SparseDesign, build_design, grid_search, solve
from .rapm import fit_rapm, player_rating, select_rapm_lambdas
from .lineup import build_priors, fit_lrapm, predict_matchup, predict_possession, select_lrapm_lambda
from .baseline import accumulate_raw, baseline_predict, winston_adjust
from .backtest import BacktestConfig, bucket_report, delta, expanding_backtest, game_impact
from .synth import SynthConfig, generate, true_expected_points

__version__ = "0.1.0"
