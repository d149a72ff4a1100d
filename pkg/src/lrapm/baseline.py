"""Raw lineup ratings, the opponent-adjusted variant, and baseline predictions."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .core import LineupKey, Possession, PlayerRatings
from .rapm import DEFAULT_FALLBACK, player_rating


@dataclass
class RawRatingTable:
    off_possessions: dict = field(default_factory=lambda: defaultdict(int))
    off_points: dict = field(default_factory=lambda: defaultdict(int))
    def_possessions: dict = field(default_factory=lambda: defaultdict(int))
    def_points: dict = field(default_factory=lambda: defaultdict(int))
    league_ppp: float = 0.0
    n_possessions: int = 0

    def add(self, p: Possession) -> None:
        self.off_possessions[p.offense] += 1
        self.off_points[p.offense] += p.points
        self.def_possessions[p.defense] += 1
        self.def_points[p.defense] += p.points
        self.n_possessions += 1

    def off_ppp(self, lineup: LineupKey) -> Optional[float]:
        n = self.off_possessions.get(lineup, 0)
        return self.off_points[lineup] / n if n else None

    def def_ppp(self, lineup: LineupKey) -> Optional[float]:
        n = self.def_possessions.get(lineup, 0)
        return self.def_points[lineup] / n if n else None

    def off_rating(self, lineup: LineupKey) -> Optional[float]:
        """Points scored per 100 possessions, or None if never on offense."""
        ppp = self.off_ppp(lineup)
        return None if ppp is None else 100.0 * ppp

    def def_rating(self, lineup: LineupKey) -> Optional[float]:
        ppp = self.def_ppp(lineup)
        return None if ppp is None else 100.0 * ppp

    def lineups(self) -> list:
        return sorted(set(self.off_possessions) | set(self.def_possessions))


def raw_table(possessions: Iterable[Possession]) -> RawRatingTable:
    t = RawRatingTable()
    total = 0
    for p in possessions:
        t.add(p)
        total += p.points
    t.league_ppp = total / t.n_possessions if t.n_possessions else 0.0
    return t


def accumulate_raw(ps: Iterable[Possession], through_week: int) -> RawRatingTable:
    if through_week < 1:
        raise ValueError("through_week must be >= 1")
    return raw_table(p for p in ps if p.week <= through_week)


def winston_adjust(raw_rating: float, avg_opponent_rating: float) -> float:
    """Subtract five times the average per-100 rating of the opposing players."""
    return raw_rating - 5.0 * avg_opponent_rating


def baseline_predict(t: RawRatingTable, off: LineupKey, deff: LineupKey) -> float:
    """Additive deviations from league average; a missing rate counts as league average."""
    lg = t.league_ppp
    o = t.off_ppp(off)
    d = t.def_ppp(deff)
    return (lg if o is None else o) + (lg if d is None else d) - lg


@dataclass
class AdjustedRatingTable:
    """Raw table with each lineup's rates corrected for the opponents it faced.

    ``off_adj[L]``/``def_adj[L]`` are in ppp and are absent where the raw rate is.
    """

    raw: RawRatingTable
    off_adj: dict
    def_adj: dict

    @property
    def league_ppp(self) -> float:
        return self.raw.league_ppp


def adjusted_table(
    possessions: Iterable[Possession],
    ratings: PlayerRatings,
    fallback: float = DEFAULT_FALLBACK,
) -> AdjustedRatingTable:
    poss = list(possessions)
    raw = raw_table(poss)
    opp_def = defaultdict(float)  # summed mean opposing defender rating, per offensive lineup
    opp_off = defaultdict(float)
    for p in poss:
        opp_def[p.offense] += sum(player_rating(ratings, q, "def", fallback) for q in p.defense) / 5
        opp_off[p.defense] += sum(player_rating(ratings, q, "off", fallback) for q in p.offense) / 5
    off_adj, def_adj = {}, {}
    for lu, n in raw.off_possessions.items():
        # strong opposing defenders depress the raw offensive rate, so add back
        off_adj[lu] = raw.off_ppp(lu) + 5.0 * opp_def[lu] / n
    for lu, n in raw.def_possessions.items():
        def_adj[lu] = winston_adjust(100.0 * raw.def_ppp(lu), 100.0 * opp_off[lu] / n) / 100.0
    return AdjustedRatingTable(raw, off_adj, def_adj)


def adjusted_predict(t: AdjustedRatingTable, off: LineupKey, deff: LineupKey) -> float:
    lg = t.league_ppp
    return t.off_adj.get(off, lg) + t.def_adj.get(deff, lg) - lg


def write_raw_ratings(t: RawRatingTable, path: Union[str, Path]) -> None:
    def fmt(v):
        return "" if v is None else f"{v:.6g}"

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p1", "p2", "p3", "p4", "p5", "off_poss", "off_rating", "def_poss", "def_rating"])
        for lu in t.lineups():
            writer.writerow([
                *lu,
                t.off_possessions.get(lu, 0),
                fmt(t.off_rating(lu)),
                t.def_possessions.get(lu, 0),
                fmt(t.def_rating(lu)),
            ])


__all__ = [
    "AdjustedRatingTable",
    "RawRatingTable",
    "accumulate_raw",
    "adjusted_predict",
    "adjusted_table",
    "baseline_predict",
    "raw_table",
    "winston_adjust",
    "write_raw_ratings",
]
