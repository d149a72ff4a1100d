"""Reading, writing and summarising possession files."""

from __future__ import annotations

import csv
import datetime as dt
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .core import (
    EmptyData,
    InvalidPossession,
    ParseError,
    Possession,
    ValidationError,
    make_lineup_key,
)

logger = logging.getLogger(__name__)

HEADER = [
    "points",
    "off1", "off2", "off3", "off4", "off5",
    "def1", "def2", "def3", "def4", "def5",
    "game_id", "game_date",
]
DEFAULT_SEASON_START = dt.date(2023, 10, 24)


@dataclass(frozen=True)
class PossessionSet:
    possessions: tuple
    season_label: str = ""
    weeks: int = 0
    skipped_rows: int = 0
    season_start: dt.date = DEFAULT_SEASON_START

    def __len__(self):
        return len(self.possessions)

    def __iter__(self):
        return iter(self.possessions)

    def __bool__(self):
        return bool(self.possessions)

    def select(self, keep) -> "PossessionSet":
        return PossessionSet(
            tuple(p for p in self.possessions if keep(p)),
            self.season_label,
            self.weeks,
            season_start=self.season_start,
        )

    def through_week(self, week: int) -> "PossessionSet":
        return self.select(lambda p: p.week <= week)

    def in_week(self, week: int) -> "PossessionSet":
        return self.select(lambda p: p.week == week)

    def split_fraction(self, fraction: float) -> tuple:
        """Chronological split: the first ``fraction`` of rows, then the rest."""
        if not 0.0 < fraction < 1.0:
            raise ValueError("fraction must lie in (0, 1)")
        cut = int(round(len(self.possessions) * fraction))
        head = PossessionSet(self.possessions[:cut], self.season_label, self.weeks, season_start=self.season_start)
        tail = PossessionSet(self.possessions[cut:], self.season_label, self.weeks, season_start=self.season_start)
        return head, tail

    def lineups(self) -> set:
        out = set()
        for p in self.possessions:
            out.add(p.offense)
            out.add(p.defense)
        return out

    def players(self) -> set:
        return {pid for lu in self.lineups() for pid in lu}


def from_possessions(
    possessions: Iterable[Possession],
    season_label: str = "",
    season_start: dt.date = DEFAULT_SEASON_START,
) -> PossessionSet:
    poss = tuple(possessions)
    weeks = max((p.week for p in poss), default=0)
    _check_weeks(poss, weeks)
    return PossessionSet(poss, season_label, weeks, season_start=season_start)


def week_of(game_date: dt.date, season_start: dt.date, week_length_days: int = 7) -> int:
    return 1 + (game_date - season_start).days // week_length_days


def _check_weeks(possessions: Sequence[Possession], weeks: int) -> None:
    present = {p.week for p in possessions}
    missing = [w for w in range(1, weeks + 1) if w not in present]
    if missing:
        logger.warning("weeks without possessions: %s", missing)


def parse_possessions(
    path: Union[str, Path],
    season_start: dt.date = DEFAULT_SEASON_START,
    week_length_days: int = 7,
    skip_bad_rows: bool = False,
    season_label: Optional[str] = None,
) -> PossessionSet:
    """Parse a possession CSV and assign week indices.

    Rows that fail validation raise :class:`ValidationError` unless
    ``skip_bad_rows`` is set, in which case they are counted and dropped.
    """
    if week_length_days < 1:
        raise ValueError("week_length_days must be >= 1")
    path = Path(path)
    possessions = []
    skipped = 0
    game_dates: dict = {}
    last_week: dict = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise ParseError(1, f"expected header {','.join(HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                poss = _parse_row(row, lineno, len(possessions), season_start, week_length_days)
                gid = poss.game_id
                if gid in game_dates and game_dates[gid] != poss.game_date:
                    raise ValidationError(lineno, f"game {gid} has more than one date")
                if poss.week < last_week.get(gid, 0):
                    raise ValidationError(lineno, f"week decreases within game {gid}")
            except (ParseError, ValidationError) as exc:
                if not skip_bad_rows:
                    raise
                logger.warning("skipping %s", exc)
                skipped += 1
                continue
            game_dates[gid] = poss.game_date
            last_week[gid] = poss.week
            possessions.append(poss)
    if skipped:
        logger.warning("%d rows skipped in %s", skipped, path)
    weeks = max((p.week for p in possessions), default=0)
    _check_weeks(possessions, weeks)
    return PossessionSet(
        tuple(possessions),
        season_label if season_label is not None else path.stem,
        weeks,
        skipped,
        season_start,
    )


def _parse_row(row, lineno, order, season_start, week_length_days) -> Possession:
    if len(row) != len(HEADER):
        raise ParseError(lineno, f"expected {len(HEADER)} fields, got {len(row)}")
    try:
        points = int(row[0])
    except ValueError:
        raise ParseError(lineno, f"points not an integer: {row[0]!r}") from None
    try:
        game_date = dt.date.fromisoformat(row[12].strip())
    except ValueError:
        raise ParseError(lineno, f"bad game_date {row[12]!r}") from None
    game_id = row[11].strip()
    if not game_id:
        raise ParseError(lineno, "empty game_id")
    week = week_of(game_date, season_start, week_length_days)
    try:
        offense = make_lineup_key(row[1:6])
        defense = make_lineup_key(row[6:11])
        return Possession(points, offense, defense, game_id, game_date, order, week)
    except (ValueError, InvalidPossession) as exc:
        raise ValidationError(lineno, str(exc)) from None


def write_possessions(ps: Iterable[Possession], path: Union[str, Path]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for p in ps:
            writer.writerow([p.points, *p.offense, *p.defense, p.game_id, p.game_date.isoformat()])


def league_ppp(ps: Iterable[Possession]) -> float:
    pts = [p.points for p in ps]
    if not pts:
        raise EmptyData("no possessions")
    return sum(pts) / len(pts)


@dataclass
class LineupUsageStats:
    off_counts: dict
    def_counts: dict
    off_mean: float
    off_std: float
    def_mean: float
    def_std: float
    bin_edges: np.ndarray = field(repr=False)
    off_hist: np.ndarray = field(repr=False)
    def_hist: np.ndarray = field(repr=False)

    def rows(self):
        """Histogram rows ``(lo, hi, n_off, n_def)`` for plotting."""
        for i in range(len(self.bin_edges) - 1):
            yield int(self.bin_edges[i]), int(self.bin_edges[i + 1]), int(self.off_hist[i]), int(self.def_hist[i])


def usage_stats(ps: Iterable[Possession]) -> LineupUsageStats:
    off, deff = counts_by_lineup(ps)
    if not off:
        raise EmptyData("no possessions")
    off_arr = np.fromiter(off.values(), dtype=float)
    def_arr = np.fromiter(deff.values(), dtype=float)
    top = max(off_arr.max(), def_arr.max())
    # powers of two: [1,2), [2,4), ... for a log-log plot
    edges = 2.0 ** np.arange(0, int(np.floor(np.log2(top))) + 2)
    return LineupUsageStats(
        off_counts=dict(off),
        def_counts=dict(deff),
        off_mean=float(off_arr.mean()),
        off_std=float(off_arr.std()),
        def_mean=float(def_arr.mean()),
        def_std=float(def_arr.std()),
        bin_edges=edges,
        off_hist=np.histogram(off_arr, edges)[0],
        def_hist=np.histogram(def_arr, edges)[0],
    )


def counts_by_lineup(ps: Iterable[Possession]) -> tuple:
    """Offensive and defensive possession counts per lineup."""
    off = Counter()
    deff = Counter()
    for p in ps:
        off[p.offense] += 1
        deff[p.defense] += 1
    return off, deff


__all__ = [
    "HEADER",
    "LineupUsageStats",
    "PossessionSet",
    "counts_by_lineup",
    "from_possessions",
    "league_ppp",
    "parse_possessions",
    "usage_stats",
    "week_of",
    "write_possessions",
]
