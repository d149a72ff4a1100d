import datetime as dt
import time

import numpy as np
import pytest

from lrapm.core import Possession, make_lineup_key
from lrapm.ingest import from_possessions
from lrapm.rapm import fit_rapm, product_grid, select_rapm_lambdas
from lrapm.synth import SynthConfig, generate_seasons

START = dt.date(2023, 10, 24)

ACCEPTANCE_LINES = []
# wall-clock seconds of the session fixtures, for runtime criteria
TIMINGS = {}


def lineup(prefix, n=5):
    return make_lineup_key(f"{prefix}{i}" for i in range(1, n + 1))


def poss(points, off, deff, week=1, game="G1", order=0):
    date = START + dt.timedelta(days=7 * (week - 1))
    return Possession(points, off, deff, game, date, order, week)


def possession_set(rows):
    """rows: (points, off, def, week) tuples."""
    out = []
    for i, (pts, off, deff, week) in enumerate(rows):
        out.append(poss(pts, off, deff, week, game=f"G{week}", order=i))
    return from_possessions(out)


@pytest.fixture(scope="session")
def league():
    """Two seasons of the default synthetic league; the first rates players."""
    t0 = time.perf_counter()
    (rating_season, eval_season), gt = generate_seasons(SynthConfig(seed=11), 2)
    lam = select_rapm_lambdas(rating_season, 21, product_grid([1000, 3000, 10000], [1000, 3000, 10000]))
    ratings = fit_rapm(rating_season, *lam)
    TIMINGS["league"] = time.perf_counter() - t0
    return rating_season, eval_season, gt, ratings


@pytest.fixture(scope="session")
def league_report(league):
    from lrapm.backtest import BacktestConfig, expanding_backtest

    _, eval_season, _, ratings = league
    t0 = time.perf_counter()
    report = expanding_backtest(eval_season, BacktestConfig(), ratings)
    TIMINGS["backtest"] = time.perf_counter() - t0
    return report


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
