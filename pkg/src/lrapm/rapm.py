"""Player ratings: ridge regression over offense/defense dummies shrunk to zero."""

from __future__ import annotations

import csv
import itertools
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .core import DEF, OFF, EmptyData, PlayerRatings, validate_side
from .ingest import PossessionSet
from .solver import (
    DEFAULT_TOL,
    PLAYER,
    PenaltySpec,
    build_design,
    design_entities,
    grid_search,
    solve,
)

# -1 per 100 possessions, expressed in ppp
DEFAULT_FALLBACK = -0.01


def fit_rapm(
    ps: PossessionSet,
    lambda_off: float,
    lambda_def: float,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
) -> PlayerRatings:
    if lambda_off < 0 or lambda_def < 0:
        raise ValueError("lambdas must be >= 0")
    design, y = build_design(ps, PLAYER)
    penalty = PenaltySpec.sided(lambda_off, lambda_def, np.zeros(design.n_cols))
    sol = solve(design, y, penalty, tol, max_iter)
    coef = sol.coefficients
    return PlayerRatings(
        gamma0=sol.intercept,
        off={p: float(coef[2 * k]) for k, p in enumerate(design.entities)},
        def_={p: float(coef[2 * k + 1]) for k, p in enumerate(design.entities)},
        lambda_off=float(lambda_off),
        lambda_def=float(lambda_def),
        n_possessions=design.n_rows,
    )


def split_possessions(ps: PossessionSet, split: Union[int, float]) -> tuple:
    """Train/validation split: a float is a chronological fraction, an int a last training week."""
    if isinstance(split, float):
        train, val = ps.split_fraction(split)
    else:
        train, val = ps.through_week(split), ps.select(lambda p: p.week > split)
    if not train or not val:
        raise EmptyData(f"split {split!r} leaves an empty train or validation set")
    return train, val


def select_rapm_lambdas(
    ps: PossessionSet,
    split: Union[int, float],
    grid: Iterable,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    threads: Optional[int] = None,
) -> tuple:
    """Pick the (lambda_off, lambda_def) pair in ``grid`` with the lowest validation RMSE.

    Build a Cartesian grid with :func:`product_grid`.
    """
    pairs = [(float(a), float(b)) for a, b in grid]
    if not pairs:
        raise EmptyData("empty lambda grid")
    train, val = split_possessions(ps, split)
    # shared columns: players only in validation keep their zero prior
    ents = design_entities(itertools.chain(train, val), PLAYER)
    tr = build_design(train, PLAYER, ents)
    va = build_design(val, PLAYER, ents)
    template = PenaltySpec(np.ones(tr[0].n_cols), np.zeros(tr[0].n_cols))
    best = grid_search(tr, va, pairs, template, tol, max_iter, threads)
    return float(best[0]), float(best[1])


def product_grid(off_candidates: Sequence[float], def_candidates: Sequence[float]) -> list:
    return [(float(a), float(b)) for a, b in itertools.product(off_candidates, def_candidates)]


def player_rating(r: Optional[PlayerRatings], player, side: str, fallback: float = DEFAULT_FALLBACK) -> float:
    validate_side(side)
    if r is None:
        return fallback
    table = r.off if side == OFF else r.def_
    return table.get(player, fallback)


def predict_rapm(r: PlayerRatings, offense, defense, fallback: float = DEFAULT_FALLBACK) -> float:
    return (
        r.gamma0
        + sum(player_rating(r, p, OFF, fallback) for p in offense)
        - sum(player_rating(r, p, DEF, fallback) for p in defense)
    )


def write_player_ratings(r: PlayerRatings, path: Union[str, Path]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# gamma0={r.gamma0:.6g},lambda_off={r.lambda_off:.6g},lambda_def={r.lambda_def:.6g},"
            f"n_possessions={r.n_possessions}\n"
        )
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["player_id", "gamma_off", "gamma_def"])
        for p in r.players():
            writer.writerow([p, f"{r.off[p]:.6g}", f"{r.def_[p]:.6g}"])


def read_player_ratings(path: Union[str, Path]) -> PlayerRatings:
    meta = {}
    off, deff = {}, {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            for item in line[1:].split(","):
                k, _, v = item.strip().partition("=")
                meta[k] = v
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    if reader.fieldnames != ["player_id", "gamma_off", "gamma_def"]:
        raise ValueError(f"{path}: expected header player_id,gamma_off,gamma_def")
    for row in reader:
        off[row["player_id"]] = float(row["gamma_off"])
        deff[row["player_id"]] = float(row["gamma_def"])
    return PlayerRatings(
        gamma0=float(meta.get("gamma0", "nan")),
        off=off,
        def_=deff,
        lambda_off=float(meta.get("lambda_off", "nan")),
        lambda_def=float(meta.get("lambda_def", "nan")),
        n_possessions=int(meta.get("n_possessions", 0)),
    )
