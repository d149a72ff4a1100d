"""Command-line entry point: ``lrapm {synth,fit-rapm,fit-lrapm,predict,backtest}``.

Exit codes: 0 success, 1 runtime or model error, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import backtest as bt
from .core import LrapmError, parse_lineup
from .ingest import DEFAULT_SEASON_START, league_ppp, parse_possessions, write_possessions
from .lineup import (
    build_priors,
    fit_lrapm,
    predict_matchup,
    predict_possession_sourced,
    read_lineup_ratings,
    select_lrapm_lambda,
    write_lineup_ratings,
)
from .rapm import (
    DEFAULT_FALLBACK,
    fit_rapm,
    product_grid,
    read_player_ratings,
    select_rapm_lambdas,
    write_player_ratings,
)
from .synth import SynthConfig, generate_seasons, read_ground_truth, write_ground_truth

logger = logging.getLogger("lrapm")


class UsageError(Exception):
    pass


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _floats(text: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None
    if not vals:
        raise UsageError(f"empty number list {text!r}")
    return vals


def parse_pair_grid(spec: str) -> list:
    """``"a,b,c"`` searches the product with itself; ``"off=a,b;def=c,d"`` sets each side."""
    if "=" not in spec:
        vals = _floats(spec)
        return product_grid(vals, vals)
    sides = {}
    for part in spec.split(";"):
        name, _, vals = part.partition("=")
        sides[name.strip()] = _floats(vals)
    if set(sides) != {"off", "def"}:
        raise UsageError(f"grid spec needs off= and def= parts: {spec!r}")
    return product_grid(sides["off"], sides["def"])


def parse_buckets(spec: str) -> tuple:
    edges = []
    for tok in spec.split(","):
        tok = tok.strip().lower()
        if tok in ("inf", "infinity"):
            edges.append(math.inf)
        else:
            try:
                edges.append(float(tok))
            except ValueError:
                raise UsageError(f"bad bucket edge {tok!r}") from None
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise UsageError("bucket edges must be strictly increasing")
    return tuple(edges)


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _val_split(ps, val_weeks: int) -> int:
    last = max(p.week for p in ps)
    cut = last - val_weeks
    if val_weeks < 1 or cut < 1:
        raise UsageError(f"--val-weeks {val_weeks} leaves no training weeks")
    return cut


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_teams=args.teams,
        roster_size=args.roster_size,
        weeks=args.weeks,
        games_per_week=args.games_per_week,
        possessions_per_game=args.possessions_per_game,
        sd_gamma_off=args.sd_off,
        sd_gamma_def=args.sd_def,
        league_mean_ppp=args.league_ppp,
        rotation_concentration=args.concentration,
        lineup_pool=args.lineup_pool,
        seed=args.seed,
        season_start=args.season_start,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n_seasons = 2 if args.rating_season else 1
    seasons, gt = generate_seasons(cfg, n_seasons)
    files = {}
    if args.rating_season:
        files["rating_possessions"] = out / "rating_possessions.csv"
        write_possessions(seasons[0], files["rating_possessions"])
    files["possessions"] = out / "possessions.csv"
    write_possessions(seasons[-1], files["possessions"])
    files["ground_truth"] = out / "ground_truth.csv"
    write_ground_truth(gt, files["ground_truth"])
    payload = {"files": {k: str(v) for k, v in files.items()}, "possessions": len(seasons[-1]), "seed": args.seed}
    _emit(args, payload, "\n".join(f"wrote {v}" for v in files.values()))
    return 0


def cmd_fit_rapm(args) -> int:
    ps = parse_possessions(args.possessions, args.season_start, skip_bad_rows=args.skip_bad_rows)
    if args.grid:
        grid = parse_pair_grid(args.grid)
        lam_off, lam_def = select_rapm_lambdas(ps, _val_split(ps, args.val_weeks), grid)
    else:
        if args.lambda_off is None or args.lambda_def is None:
            raise UsageError("give --lambda-off and --lambda-def, or --grid")
        lam_off, lam_def = args.lambda_off, args.lambda_def
    r = fit_rapm(ps, lam_off, lam_def)
    write_player_ratings(r, args.out)
    payload = {
        "out": args.out,
        "gamma0": r.gamma0,
        "lambda_off": lam_off,
        "lambda_def": lam_def,
        "lambda_off_per_possession": r.lambda_per_possession[0],
        "lambda_def_per_possession": r.lambda_per_possession[1],
        "players": len(r.off),
    }
    lines = [f"wrote {args.out}: {len(r.off)} players, gamma0={r.gamma0:.6g}, "
             f"lambda_off={lam_off:.6g}, lambda_def={lam_def:.6g}"]
    if args.ground_truth:
        gt = read_ground_truth(_existing(args.ground_truth))
        common = sorted(set(gt.off) & set(r.off))
        c_off = float(np.corrcoef([r.off[p] for p in common], [gt.off[p] for p in common])[0, 1])
        c_def = float(np.corrcoef([r.def_[p] for p in common], [gt.def_[p] for p in common])[0, 1])
        payload.update(corr_off=c_off, corr_def=c_def)
        lines.append(f"correlation with ground truth: off={c_off:.6g} def={c_def:.6g}")
    if args.json:
        Path(args.out).with_suffix(".json").write_text(json.dumps({
            "gamma0": r.gamma0, "lambda_off": lam_off, "lambda_def": lam_def,
            "players": {p: {"gamma_off": r.off[p], "gamma_def": r.def_[p]} for p in r.players()},
        }, sort_keys=True))
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_fit_lrapm(args) -> int:
    ps = parse_possessions(args.possessions, args.season_start, skip_bad_rows=args.skip_bad_rows)
    ratings = read_player_ratings(args.player_ratings)
    lg = league_ppp(ps)
    priors = build_priors(ratings, ps.lineups(), lg, args.fallback_rating)
    if args.grid:
        lam = select_lrapm_lambda(ps, priors, _val_split(ps, args.val_weeks), _floats(args.grid))
    elif args.lam is not None:
        lam = args.lam
    else:
        raise UsageError("give --lambda or --grid")
    lr = fit_lrapm(ps, priors, lam, lambda_def=args.lambda_def)
    write_lineup_ratings(lr, args.out, str(Path(args.player_ratings).resolve()))
    if args.json:
        Path(args.out).with_suffix(".json").write_text(json.dumps({
            "beta0": lr.beta0, "lambda": lam, "league_ppp": lg,
            "lineups": [
                {"players": list(lu), "beta_off": lr.off[lu], "beta_def": lr.def_[lu],
                 "pi_off": priors.off[lu], "pi_def": priors.def_[lu],
                 "train_possessions": lr.train_counts.get(lu, 0)}
                for lu in lr.lineups()
            ],
        }, sort_keys=True))
    payload = {"out": args.out, "beta0": lr.beta0, "lambda": lam, "lineups": len(lr.off), "league_ppp": lg}
    _emit(args, payload, f"wrote {args.out}: {len(lr.off)} lineups, beta0={lr.beta0:.6g}, lambda={lam:.6g}")
    return 0


def cmd_predict(args) -> int:
    try:
        off = parse_lineup(args.off)
        deff = parse_lineup(args.def_)
    except ValueError as exc:
        raise UsageError(f"bad lineup: {exc}") from None
    model = _existing(args.model)
    lr, meta = read_lineup_ratings(model)
    ratings_path = args.player_ratings or meta.get("player_ratings")
    if ratings_path and Path(ratings_path).is_file():
        lr, _ = read_lineup_ratings(model, read_player_ratings(ratings_path))
    elif args.player_ratings:
        raise UsageError(f"no such file: {args.player_ratings}")
    if args.per_100:
        value = predict_matchup(lr, off, deff)
        _, s1 = predict_possession_sourced(lr, off, deff)
        _, s2 = predict_possession_sourced(lr, deff, off)
        source = max(s1, s2, key=["fit", "prior", "league"].index)
        unit = "net_per_100"
    else:
        value, source = predict_possession_sourced(lr, off, deff)
        unit = "ppp"
    _emit(args, {"value": value, "source": source, "unit": unit}, f"value={value:.6g} unit={unit} source={source}")
    return 0


def cmd_backtest(args) -> int:
    ps = parse_possessions(args.possessions, args.season_start, skip_bad_rows=args.skip_bad_rows)
    ratings = read_player_ratings(args.player_ratings)
    kw = {}
    if args.lam is not None:
        kw["lam"] = args.lam
    elif args.grid:
        kw["lambda_grid"] = tuple(_floats(args.grid))
    if args.buckets:
        kw["bucket_edges"] = parse_buckets(args.buckets)
    cfg = bt.BacktestConfig(
        first_test_week=args.first_test_week,
        include_unseen=not args.no_unseen,
        include_adjusted=args.adjusted,
        reselect_each_week=args.reselect,
        fallback_rating=args.fallback_rating,
        **kw,
    )
    report = bt.expanding_backtest(ps, cfg, ratings)
    paths = bt.write_report(report, args.out, cfg.include_unseen)
    summary = bt.report_dict(report)
    if args.json:
        (Path(args.out) / "report.json").write_text(json.dumps(summary, sort_keys=True))
    ov = report.overall()
    text = [f"wrote {', '.join(str(p) for p in paths)}",
            f"overall: rmse_model={ov.rmse_model:.6g} rmse_baseline={ov.rmse_baseline:.6g} "
            f"delta={ov.delta:.6g} n={ov.n}"]
    _emit(args, {"files": [str(p) for p in paths], "overall": summary["overall"], "lambdas": summary["lambdas"]},
          "\n".join(text))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrapm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, possessions=True):
        p.add_argument("--json", action="store_true", help="JSON summary on stdout plus a .json mirror")
        if possessions:
            p.add_argument("--possessions", required=True)
            p.add_argument("--season-start", type=_date, default=DEFAULT_SEASON_START)
            p.add_argument("--skip-bad-rows", action="store_true")

    p = sub.add_parser("synth", help="generate a synthetic season with known player effects")
    common(p, possessions=False)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--teams", type=int, default=SynthConfig.n_teams)
    p.add_argument("--roster-size", type=int, default=SynthConfig.roster_size)
    p.add_argument("--weeks", type=int, default=SynthConfig.weeks)
    p.add_argument("--games-per-week", type=int, default=SynthConfig.games_per_week)
    p.add_argument("--possessions-per-game", type=int, default=SynthConfig.possessions_per_game)
    p.add_argument("--sd-off", type=float, default=SynthConfig.sd_gamma_off)
    p.add_argument("--sd-def", type=float, default=SynthConfig.sd_gamma_def)
    p.add_argument("--league-ppp", type=float, default=SynthConfig.league_mean_ppp)
    p.add_argument("--concentration", type=float, default=SynthConfig.rotation_concentration)
    p.add_argument("--lineup-pool", type=int, default=SynthConfig.lineup_pool)
    p.add_argument("--season-start", type=_date, default=DEFAULT_SEASON_START)
    p.add_argument("--rating-season", action="store_true", help="also write a prior season for player ratings")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit-rapm", help="fit player ratings")
    common(p)
    p.add_argument("--lambda-off", type=float)
    p.add_argument("--lambda-def", type=float)
    p.add_argument("--grid", help="'a,b,c' or 'off=a,b;def=c,d'")
    p.add_argument("--val-weeks", type=int, default=4)
    p.add_argument("--ground-truth", help="report correlation against a synthetic ground truth")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_rapm)

    p = sub.add_parser("fit-lrapm", help="fit lineup ratings shrunk toward player priors")
    common(p)
    p.add_argument("--player-ratings", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda-def", type=float, help="separate defensive lambda (default: same as --lambda)")
    p.add_argument("--grid", help="comma-separated lambda candidates")
    p.add_argument("--val-weeks", type=int, default=4)
    p.add_argument("--fallback-rating", type=float, default=DEFAULT_FALLBACK)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_lrapm)

    p = sub.add_parser("predict", help="expected points for a lineup matchup")
    common(p, possessions=False)
    p.add_argument("--model", required=True)
    p.add_argument("--off", required=True)
    p.add_argument("--def", dest="def_", required=True)
    p.add_argument("--player-ratings")
    p.add_argument("--per-100", action="store_true", help="net points per 100 possessions of --off over --def")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("backtest", help="expanding-window comparison against raw ratings")
    common(p)
    p.add_argument("--player-ratings", required=True)
    p.add_argument("--first-test-week", type=int, default=5)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--grid", help="comma-separated lambda candidates")
    p.add_argument("--buckets", help="comma-separated edges, e.g. 0,10,25,50,100,250,500,inf")
    p.add_argument("--reselect", action="store_true", help="re-select lambda every week")
    p.add_argument("--adjusted", action="store_true", help="also score the opponent-adjusted baseline")
    p.add_argument("--no-unseen", action="store_true")
    p.add_argument("--fallback-rating", type=float, default=DEFAULT_FALLBACK)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_backtest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    for attr in ("player_ratings", "possessions"):
        path = getattr(args, attr, None)
        if path is not None and args.command != "predict" and not Path(path).is_file():
            parser.error(f"no such file: {path}")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (LrapmError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
