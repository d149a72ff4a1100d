"""Expanding-window evaluation of lineup ratings against raw-rating baselines.

For each test week ``n`` the models are fit on weeks ``1..n-1`` and scored on
week ``n``. Possessions whose offensive lineup never had the ball in training,
or whose defensive lineup never defended, go to a separate unseen-lineup
track where the raw baseline degenerates to league average.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .baseline import adjusted_predict, adjusted_table, baseline_predict, raw_table
from .core import LrapmError, PlayerRatings
from .ingest import PossessionSet, league_ppp
from .lineup import build_priors, fit_lrapm, predict_possession, select_lrapm_lambda
from .rapm import DEFAULT_FALLBACK
from .solver import DEFAULT_TOL, _threads

logger = logging.getLogger(__name__)

DEFAULT_EDGES = (0, 10, 25, 50, 100, 250, 500, math.inf)
DEFAULT_LINEUP_GRID = (10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0, 30000.0, 100000.0)


class InsufficientWeeks(LrapmError, ValueError):
    pass


class ZeroBaseline(LrapmError, ZeroDivisionError):
    pass


class OverlapError(LrapmError):
    pass


def delta(rmse_model: float, rmse_baseline: float) -> float:
    """Relative change in RMSE; negative means the model beat the baseline.

    Two zero errors count as no change.
    """
    if rmse_baseline == 0:
        if rmse_model == 0:
            return 0.0
        raise ZeroBaseline("baseline RMSE is zero")
    return (rmse_model - rmse_baseline) / rmse_baseline


def _safe_delta(m: float, b: float) -> float:
    try:
        return delta(m, b)
    except ZeroBaseline:
        return math.nan


def game_impact(delta_ppp: float, league_ppp: float, possessions_per_game: int) -> float:
    """Points per game implied by a relative per-possession improvement."""
    return abs(delta_ppp) * league_ppp * possessions_per_game


@dataclass(frozen=True)
class BacktestConfig:
    first_test_week: int = 5
    lam: Optional[float] = None
    lambda_grid: tuple = DEFAULT_LINEUP_GRID
    reselect_each_week: bool = False
    lambda_def: Optional[float] = None
    bucket_edges: tuple = DEFAULT_EDGES
    include_unseen: bool = True
    include_adjusted: bool = False
    fallback_rating: float = DEFAULT_FALLBACK
    tol: float = DEFAULT_TOL
    max_iter: Optional[int] = None
    audit: bool = True
    threads: Optional[int] = None

    def __post_init__(self):
        if self.first_test_week < 2:
            raise ValueError("first_test_week must be >= 2")
        edges = list(self.bucket_edges)
        if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("bucket edges must be strictly increasing")
        if self.lam is None and not self.lambda_grid:
            raise ValueError("need a fixed lambda or a lambda grid")


@dataclass(frozen=True)
class WeekRow:
    week: int
    rmse_model: float
    rmse_baseline: float
    delta: float
    n: int
    rmse_adjusted: Optional[float] = None


@dataclass(frozen=True)
class BucketRow:
    lo: float
    hi: float
    rmse_model: float
    rmse_baseline: float
    delta: float
    n: int


@dataclass(frozen=True)
class AuditRow:
    week: int
    n_train: int
    n_test: int
    overlap: int


@dataclass
class BacktestReport:
    weekly: list
    unseen: list
    buckets: list
    lambdas: dict
    audit: list = field(default_factory=list)
    # per-prediction columns: week, bucket key, squared errors, unseen flag
    records: dict = field(default_factory=dict, repr=False)

    def _pooled(self, mask) -> tuple:
        r = self.records
        n = int(mask.sum())
        if n == 0:
            return math.nan, math.nan, 0
        return float(np.sqrt(r["se_model"][mask].mean())), float(np.sqrt(r["se_baseline"][mask].mean())), n

    def overall(self) -> WeekRow:
        m, b, n = self._pooled(~self.records["unseen"])
        return WeekRow(0, m, b, _safe_delta(m, b), n)

    def unseen_overall(self) -> WeekRow:
        m, b, n = self._pooled(self.records["unseen"])
        return WeekRow(0, m, b, _safe_delta(m, b), n)


def bucket_report(report: BacktestReport, edges: Sequence[float] = DEFAULT_EDGES) -> list:
    """Pool squared errors over all test weeks by training-sample bucket.

    Buckets are half-open ``[lo, hi)``; empty buckets are left out.
    """
    edges = list(edges)
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("bucket edges must be strictly increasing")
    r = report.records
    seen = ~r["unseen"]
    rows = []
    for lo, hi in zip(edges, edges[1:]):
        mask = seen & (r["key"] >= lo) & (r["key"] < hi)
        m, b, n = report._pooled(mask)
        if n:
            rows.append(BucketRow(lo, hi, m, b, _safe_delta(m, b), n))
    return rows


def _choose_lambda(train: PossessionSet, val_week: int, cfg: BacktestConfig, ratings, threads):
    if cfg.lam is not None:
        return cfg.lam
    grid = list(cfg.lambda_grid)
    if len(grid) == 1:
        return float(grid[0])
    if val_week < 2:
        raise InsufficientWeeks("lambda selection needs at least two training weeks")
    lg = league_ppp(train)
    priors = build_priors(ratings, train.lineups(), lg, cfg.fallback_rating)
    return float(select_lrapm_lambda(train, priors, val_week - 1, grid, cfg.tol, cfg.max_iter, threads))


def expanding_backtest(ps: PossessionSet, cfg: BacktestConfig, player_ratings: Optional[PlayerRatings]) -> BacktestReport:
    weeks = max((p.week for p in ps), default=0)
    if weeks < cfg.first_test_week:
        raise InsufficientWeeks(f"data spans {weeks} weeks, first test week is {cfg.first_test_week}")
    threads = _threads(cfg.threads)

    first_train = ps.select(lambda p: p.week < cfg.first_test_week)
    fixed_lam = None
    if not cfg.reselect_each_week:
        fixed_lam = _choose_lambda(first_train, cfg.first_test_week - 1, cfg, player_ratings, threads)
        logger.info("lineup lambda %.6g", fixed_lam)

    def run_week(n):
        train = ps.select(lambda p: p.week < n)
        test = ps.in_week(n)
        if not test:
            return None
        lam = fixed_lam if fixed_lam is not None else _choose_lambda(train, n - 1, cfg, player_ratings, 1)
        lg = league_ppp(train)
        raw = raw_table(train)
        priors = build_priors(player_ratings, train.lineups() | test.lineups(), lg, cfg.fallback_rating)
        lr = fit_lrapm(train, priors, lam, cfg.tol, cfg.max_iter, cfg.lambda_def)
        adj = adjusted_table(train, player_ratings, cfg.fallback_rating) if cfg.include_adjusted else None

        audit = None
        if cfg.audit:
            overlap = len({p.order for p in train} & {p.order for p in test})
            if overlap:
                raise OverlapError(f"week {n}: {overlap} possessions both trained on and tested")
            audit = AuditRow(n, len(train), len(test), overlap)

        m = len(test)
        y = np.empty(m)
        pm = np.empty(m)
        pb = np.empty(m)
        pa = np.full(m, math.nan)
        key = np.empty(m)
        unseen = np.empty(m, dtype=bool)
        for i, p in enumerate(test):
            n_off = raw.off_possessions.get(p.offense, 0)
            n_def = raw.def_possessions.get(p.defense, 0)
            y[i] = p.points
            pm[i] = predict_possession(lr, p.offense, p.defense)
            pb[i] = baseline_predict(raw, p.offense, p.defense)
            if adj is not None:
                pa[i] = adjusted_predict(adj, p.offense, p.defense)
            key[i] = min(n_off, n_def)
            unseen[i] = n_off == 0 or n_def == 0
        return {
            "week": np.full(m, n),
            "key": key,
            "unseen": unseen,
            "se_model": (pm - y) ** 2,
            "se_baseline": (pb - y) ** 2,
            "se_adjusted": (pa - y) ** 2,
            "lam": lam,
            "audit": audit,
        }

    test_weeks = list(range(cfg.first_test_week, weeks + 1))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run_week, test_weeks))
    else:
        results = [run_week(n) for n in test_weeks]
    results = [r for r in results if r is not None]

    cols = ("week", "key", "unseen", "se_model", "se_baseline", "se_adjusted")
    records = {c: np.concatenate([r[c] for r in results]) for c in cols}
    report = BacktestReport(
        weekly=[],
        unseen=[],
        buckets=[],
        lambdas={int(r["week"][0]): r["lam"] for r in results},
        audit=[r["audit"] for r in results if r["audit"] is not None],
        records=records,
    )
    for r in results:
        w = int(r["week"][0])
        for track, rows in ((~r["unseen"], report.weekly), (r["unseen"], report.unseen)):
            if rows is report.unseen and not cfg.include_unseen:
                continue
            if not track.any():
                continue
            m = float(np.sqrt(r["se_model"][track].mean()))
            b = float(np.sqrt(r["se_baseline"][track].mean()))
            a = float(np.sqrt(r["se_adjusted"][track].mean())) if cfg.include_adjusted else None
            rows.append(WeekRow(w, m, b, _safe_delta(m, b), int(track.sum()), a))
    report.buckets = bucket_report(report, cfg.bucket_edges)
    return report


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.6g}"


def write_report(report: BacktestReport, out_dir: Union[str, Path], include_unseen: bool = True) -> list:
    """Write weekly.csv, buckets.csv and (optionally) unseen.csv; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with_adj = any(r.rmse_adjusted is not None for r in report.weekly)
    paths = []

    weekly = out / "weekly.csv"
    header = ["week", "rmse_model", "rmse_baseline", "delta", "n"] + (["rmse_adjusted"] if with_adj else [])
    _write_rows(weekly, header, (
        [r.week, r.rmse_model, r.rmse_baseline, r.delta, r.n] + ([r.rmse_adjusted] if with_adj else [])
        for r in report.weekly
    ))
    paths.append(weekly)

    buckets = out / "buckets.csv"
    _write_rows(buckets, ["lo", "hi", "rmse_model", "rmse_baseline", "delta", "n"], (
        [r.lo, "inf" if math.isinf(r.hi) else r.hi, r.rmse_model, r.rmse_baseline, r.delta, r.n]
        for r in report.buckets
    ))
    paths.append(buckets)

    if include_unseen:
        unseen = out / "unseen.csv"
        _write_rows(unseen, ["week", "rmse_prior", "rmse_league", "delta", "n"], (
            [r.week, r.rmse_model, r.rmse_baseline, r.delta, r.n] for r in report.unseen
        ))
        paths.append(unseen)
    return paths


def _write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def report_dict(report: BacktestReport) -> dict:
    """JSON-friendly mirror of the CSV outputs."""
    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v

    return {
        "lambdas": {str(k): v for k, v in report.lambdas.items()},
        "weekly": [{k: clean(v) for k, v in r.__dict__.items()} for r in report.weekly],
        "buckets": [
            {k: (None if isinstance(v, float) and math.isinf(v) else clean(v)) for k, v in r.__dict__.items()}
            for r in report.buckets
        ],
        "unseen": [{k: clean(v) for k, v in r.__dict__.items()} for r in report.unseen],
        "overall": {k: clean(v) for k, v in report.overall().__dict__.items() if k != "week"},
        "audit": [r.__dict__ for r in report.audit],
    }
