"""Lineup ratings shrunk toward player-informed priors.

Each lineup gets an offensive and a defensive coefficient, encoded +1 when
the lineup is on offense and -1 when it defends, so a possession is
predicted as ``beta0 + beta_off(offense) - beta_def(defense)``. Priors are
league ppp plus the five players' RAPM values; the league term appears in
both priors and cancels in every prediction, leaving ``beta0`` to carry the
league level.
"""

from __future__ import annotations

import csv
import itertools
from collections import Counter
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .core import (
    DEF,
    OFF,
    LineupKey,
    LineupPriorTable,
    LineupRatings,
    LrapmError,
    PlayerRatings,
    make_lineup_key,
    validate_side,
)
from .ingest import PossessionSet, counts_by_lineup
from .rapm import DEFAULT_FALLBACK, player_rating, split_possessions
from .solver import DEFAULT_TOL, LINEUP, PenaltySpec, build_design, design_entities, grid_search, solve

FIT, PRIOR, LEAGUE = "fit", "prior", "league"


class MissingPrior(LrapmError, KeyError):
    pass


def lineup_prior(
    r: Optional[PlayerRatings], lineup: LineupKey, side: str, league_ppp: float, fallback: float = DEFAULT_FALLBACK
) -> float:
    return league_ppp + sum(player_rating(r, p, side, fallback) for p in lineup)


def build_priors(
    r: Optional[PlayerRatings],
    lineups: Iterable[LineupKey],
    league_ppp: float,
    fallback: float = DEFAULT_FALLBACK,
) -> LineupPriorTable:
    lineups = sorted(set(lineups))
    return LineupPriorTable(
        off={lu: lineup_prior(r, lu, OFF, league_ppp, fallback) for lu in lineups},
        def_={lu: lineup_prior(r, lu, DEF, league_ppp, fallback) for lu in lineups},
        league_ppp=float(league_ppp),
        fallback_player_rating=float(fallback),
        player_ratings=r,
    )


def _centers(priors: LineupPriorTable, entities) -> np.ndarray:
    c = np.empty(2 * len(entities))
    try:
        for k, lu in enumerate(entities):
            c[2 * k] = priors.off[lu]
            c[2 * k + 1] = priors.def_[lu]
    except KeyError as exc:
        raise MissingPrior(f"no prior for lineup {exc.args[0]}") from None
    return c


def _penalty(lam: float, lambda_def: Optional[float], centers) -> PenaltySpec:
    if lambda_def is None:
        return PenaltySpec.uniform(len(centers), lam, centers)
    return PenaltySpec.sided(lam, lambda_def, centers)


def fit_lrapm(
    ps: PossessionSet,
    priors: LineupPriorTable,
    lam: float,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    lambda_def: Optional[float] = None,
) -> LineupRatings:
    """Fit lineup coefficients with penalty ``lam * (beta - prior)^2``.

    Passing ``lambda_def`` switches to separate offensive (``lam``) and
    defensive constants.
    """
    if lam < 0 or (lambda_def is not None and lambda_def < 0):
        raise ValueError("lambda must be >= 0")
    design, y = build_design(ps, LINEUP)
    centers = _centers(priors, design.entities)
    sol = solve(design, y, _penalty(lam, lambda_def, centers), tol, max_iter)
    coef = sol.coefficients
    off_n, def_n = counts_by_lineup(ps)
    return LineupRatings(
        beta0=sol.intercept,
        off={lu: float(coef[2 * k]) for k, lu in enumerate(design.entities)},
        def_={lu: float(coef[2 * k + 1]) for k, lu in enumerate(design.entities)},
        lam=float(lam),
        priors=priors,
        lambda_def=None if lambda_def is None else float(lambda_def),
        train_counts={lu: off_n[lu] + def_n[lu] for lu in design.entities},
    )


def select_lrapm_lambda(
    ps: PossessionSet,
    priors: LineupPriorTable,
    split: Union[int, float],
    grid: Iterable,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    threads: Optional[int] = None,
):
    """Choose the lineup lambda by validation RMSE.

    Lineups that only show up in the validation part get a column with no
    training rows, which pins their coefficient to the prior, matching how
    unseen lineups are predicted.
    """
    grid = list(grid)
    train, val = split_possessions(ps, split)
    ents = design_entities(itertools.chain(train, val), LINEUP)
    tr = build_design(train, LINEUP, ents)
    va = build_design(val, LINEUP, ents)
    centers = _centers(priors, ents)
    template = PenaltySpec(np.ones(len(centers)), centers)
    return grid_search(tr, va, grid, template, tol, max_iter, threads)


def lineup_value(lr: LineupRatings, lineup: LineupKey, side: str) -> tuple:
    """Coefficient for ``lineup`` on ``side`` and where it came from.

    Falls back from the fitted coefficient to the prior table, then to a prior
    built from the player ratings, then to league average.
    """
    validate_side(side)
    fitted = lr.off if side == OFF else lr.def_
    if lineup in fitted:
        return fitted[lineup], FIT
    pri = lr.priors
    table = pri.off if side == OFF else pri.def_
    if lineup in table:
        return table[lineup], PRIOR
    if pri.player_ratings is not None:
        return lineup_prior(pri.player_ratings, lineup, side, pri.league_ppp, pri.fallback_player_rating), PRIOR
    return pri.league_ppp, LEAGUE


def predict_possession(lr: LineupRatings, off: LineupKey, deff: LineupKey) -> float:
    return predict_possession_sourced(lr, off, deff)[0]


def predict_possession_sourced(lr: LineupRatings, off: LineupKey, deff: LineupKey) -> tuple:
    """Expected points plus the weakest source used (fit < prior < league)."""
    b_off, s_off = lineup_value(lr, off, OFF)
    b_def, s_def = lineup_value(lr, deff, DEF)
    rank = {FIT: 0, PRIOR: 1, LEAGUE: 2}
    return lr.beta0 + b_off - b_def, max(s_off, s_def, key=rank.__getitem__)


def predict_matchup(lr: LineupRatings, mine: LineupKey, theirs: LineupKey) -> float:
    """Net points per 100 possessions of ``mine`` over ``theirs``."""
    return 100.0 * (predict_possession(lr, mine, theirs) - predict_possession(lr, theirs, mine))


def write_lineup_ratings(lr: LineupRatings, path: Union[str, Path], player_ratings_path: Optional[str] = None) -> None:
    pri = lr.priors
    meta = [
        f"beta0={lr.beta0:.6g}",
        f"lambda={lr.lam:.6g}",
        f"league_ppp={pri.league_ppp:.6g}",
        f"fallback={pri.fallback_player_rating:.6g}",
    ]
    if lr.lambda_def is not None:
        meta.append(f"lambda_def={lr.lambda_def:.6g}")
    if player_ratings_path:
        meta.append(f"player_ratings={player_ratings_path}")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("# " + ",".join(meta) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p1", "p2", "p3", "p4", "p5", "beta_off", "beta_def", "pi_off", "pi_def", "train_possessions"])
        for lu in lr.lineups():
            writer.writerow([
                *lu,
                f"{lr.off[lu]:.6g}",
                f"{lr.def_[lu]:.6g}",
                f"{pri.off[lu]:.6g}",
                f"{pri.def_[lu]:.6g}",
                lr.train_counts.get(lu, 0),
            ])


def read_lineup_ratings(path: Union[str, Path], player_ratings: Optional[PlayerRatings] = None) -> tuple:
    """Load a lineup ratings file; returns ``(LineupRatings, metadata dict)``."""
    meta = {}
    body = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            for item in line[1:].split(","):
                k, _, v = item.strip().partition("=")
                meta[k] = v
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    expected = ["p1", "p2", "p3", "p4", "p5", "beta_off", "beta_def", "pi_off", "pi_def", "train_possessions"]
    if reader.fieldnames != expected:
        raise ValueError(f"{path}: expected header {','.join(expected)}")
    off, deff, pi_off, pi_def, counts = {}, {}, {}, {}, Counter()
    for row in reader:
        lu = make_lineup_key(row[f"p{i}"] for i in range(1, 6))
        off[lu] = float(row["beta_off"])
        deff[lu] = float(row["beta_def"])
        pi_off[lu] = float(row["pi_off"])
        pi_def[lu] = float(row["pi_def"])
        counts[lu] = int(row["train_possessions"])
    priors = LineupPriorTable(
        off=pi_off,
        def_=pi_def,
        league_ppp=float(meta["league_ppp"]),
        fallback_player_rating=float(meta.get("fallback", DEFAULT_FALLBACK)),
        player_ratings=player_ratings,
    )
    lr = LineupRatings(
        beta0=float(meta["beta0"]),
        off=off,
        def_=deff,
        lam=float(meta.get("lambda", "nan")),
        priors=priors,
        lambda_def=float(meta["lambda_def"]) if "lambda_def" in meta else None,
        train_counts=dict(counts),
    )
    return lr, meta
