"""Correlation between fitted and true player effects as the season grows.

Small leagues (8 teams of 8) with effects drawn from N(0, 0.02^2); lambdas are
chosen on the last fifth of each season.
"""

import argparse

import numpy as np

from lrapm.rapm import fit_rapm, product_grid, select_rapm_lambdas
from lrapm.synth import SynthConfig, generate


def corr(fit, truth):
    keys = sorted(truth)
    return float(np.corrcoef([fit[k] for k in keys], [truth[k] for k in keys])[0, 1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--weeks", type=int, nargs="+", default=[25, 50, 100, 250])
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    grid = product_grid(*[[300, 1000, 3000, 10000, 30000]] * 2)
    print("possessions  corr_off (mean, min)   corr_def (mean, min)")
    for weeks in args.weeks:
        offs, defs = [], []
        for seed in range(args.seeds):
            cfg = SynthConfig(n_teams=8, roster_size=8, weeks=weeks, games_per_week=10, seed=seed)
            ps, gt = generate(cfg)
            r = fit_rapm(ps, *select_rapm_lambdas(ps, int(weeks * 0.8), grid))
            offs.append(corr(r.off, gt.off))
            defs.append(corr(r.def_, gt.def_))
        print(f"{len(ps):11d}  {np.mean(offs):.3f}, {min(offs):.3f}          {np.mean(defs):.3f}, {min(defs):.3f}")


if __name__ == "__main__":
    main()
