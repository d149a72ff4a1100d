"""Domain types shared across the toolkit.

Ratings are kept in points per possession (ppp) everywhere except the raw
lineup ratings in :mod:`lrapm.baseline`, which follow the usual per-100
convention.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

PlayerId = str

LINEUP_SIZE = 5
MAX_POINTS = 6
OFF, DEF = "off", "def"


class LrapmError(Exception):
    """Base class for every error raised by the toolkit."""


class DuplicatePlayer(LrapmError, ValueError):
    pass


class BadLineupSize(LrapmError, ValueError):
    pass


class InvalidPossession(LrapmError, ValueError):
    pass


class EmptyData(LrapmError, ValueError):
    pass


class ParseError(LrapmError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(LrapmError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True, order=True)
class LineupKey:
    """Five distinct players, stored sorted so that order never matters."""

    players: tuple

    def __post_init__(self):
        if len(self.players) != LINEUP_SIZE:
            raise BadLineupSize(f"lineup needs {LINEUP_SIZE} players, got {len(self.players)}")
        if len(set(self.players)) != LINEUP_SIZE:
            raise DuplicatePlayer(f"duplicate player in lineup {self.players}")
        if tuple(sorted(self.players)) != self.players:
            object.__setattr__(self, "players", tuple(sorted(self.players)))

    def __iter__(self):
        return iter(self.players)

    def __len__(self):
        return LINEUP_SIZE

    def __str__(self):
        return ",".join(self.players)


def make_lineup_key(players: Iterable[Union[str, int]]) -> LineupKey:
    tokens = tuple(str(p).strip() for p in players)
    if any(not t for t in tokens):
        raise ValueError("empty player id")
    return LineupKey(tokens)


def parse_lineup(text: str) -> LineupKey:
    """Parse ``"p1,p2,p3,p4,p5"`` into a key."""
    return make_lineup_key(text.split(","))


@dataclass(frozen=True)
class Possession:
    points: int
    offense: LineupKey
    defense: LineupKey
    game_id: str
    game_date: dt.date
    order: int
    week: int = 1

    def __post_init__(self):
        if not 0 <= self.points <= MAX_POINTS:
            raise InvalidPossession(f"points {self.points} outside [0, {MAX_POINTS}]")
        shared = set(self.offense.players) & set(self.defense.players)
        if shared:
            raise InvalidPossession(f"players on both units: {sorted(shared)}")
        if self.week < 1:
            raise InvalidPossession(f"week {self.week} < 1")


@dataclass(frozen=True)
class PlayerRatings:
    """Player-level RAPM fit.

    ``off[p]`` is the ppp player ``p`` adds on offense, ``def_[p]`` the ppp
    they save on defense (positive is good on both sides).
    """

    gamma0: float
    off: Mapping[PlayerId, float]
    def_: Mapping[PlayerId, float]
    lambda_off: float
    lambda_def: float
    n_possessions: int = 0

    def players(self) -> list:
        return sorted(self.off)

    @property
    def lambda_per_possession(self) -> tuple:
        n = max(self.n_possessions, 1)
        return self.lambda_off / n, self.lambda_def / n


@dataclass(frozen=True)
class LineupPriorTable:
    off: Mapping[LineupKey, float]
    def_: Mapping[LineupKey, float]
    league_ppp: float
    fallback_player_rating: float
    # kept so priors can be built on demand for lineups first seen at prediction time
    player_ratings: Optional[PlayerRatings] = None


@dataclass(frozen=True)
class LineupRatings:
    beta0: float
    off: Mapping[LineupKey, float]
    def_: Mapping[LineupKey, float]
    lam: float
    priors: LineupPriorTable
    lambda_def: Optional[float] = None
    train_counts: Mapping[LineupKey, int] = field(default_factory=dict)

    def lineups(self) -> list:
        return sorted(set(self.off) | set(self.def_))


def validate_side(side: str) -> str:
    if side not in (OFF, DEF):
        raise ValueError(f"side must be {OFF!r} or {DEF!r}, got {side!r}")
    return side


def lineup_players(lineups: Sequence[LineupKey]) -> set:
    return {p for lu in lineups for p in lu}
