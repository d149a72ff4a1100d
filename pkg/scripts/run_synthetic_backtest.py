"""Rate players on one synthetic season and backtest lineup ratings on the next.

    python scripts/run_synthetic_backtest.py --seed 11 --out results/backtest
"""

import argparse
import logging
import time
from pathlib import Path

from lrapm.backtest import BacktestConfig, expanding_backtest, game_impact, write_report
from lrapm.ingest import league_ppp, usage_stats
from lrapm.rapm import fit_rapm, product_grid, select_rapm_lambdas
from lrapm.synth import SynthConfig, generate_seasons


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--out", default="results/backtest")
    ap.add_argument("--first-test-week", type=int, default=5)
    ap.add_argument("--adjusted", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    t0 = time.perf_counter()
    (rating, season), _ = generate_seasons(SynthConfig(seed=args.seed), 2)
    u = usage_stats(season)
    logging.info("season: %d possessions, %d lineups, usage mean %.1f sd %.1f",
                 len(season), len(u.off_counts), u.off_mean, u.off_std)

    grid = product_grid([1000, 3000, 10000], [1000, 3000, 10000])
    lam = select_rapm_lambdas(rating, rating.weeks - 4, grid)
    ratings = fit_rapm(rating, *lam)
    logging.info("player lambdas %s", lam)

    cfg = BacktestConfig(first_test_week=args.first_test_week, include_adjusted=args.adjusted)
    report = expanding_backtest(season, cfg, ratings)
    paths = write_report(report, Path(args.out))

    ov, un = report.overall(), report.unseen_overall()
    lg = league_ppp(season)
    print(f"lineup lambda: {sorted(set(report.lambdas.values()))}")
    print(f"seen lineups:   delta {ov.delta:+.4f} over {ov.n} possessions "
          f"(~{game_impact(ov.delta, lg, 200):.2f} points per 200-possession game)")
    print(f"unseen lineups: delta {un.delta:+.4f} over {un.n} possessions")
    for b in report.buckets:
        print(f"  [{b.lo:g}, {b.hi:g})  delta {b.delta:+.4f}  n={b.n}")
    print(f"wrote {', '.join(map(str, paths))} in {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
