"""Command-line entry point: ``rankpromo run|figure|compare|solve-f``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import analytics, experiments
from .core import ConfigError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _scenario(path: str) -> experiments.ScenarioConfig:
    if path.startswith("bundled:"):
        return experiments.bundled_scenario(path.split(":", 1)[1])
    return experiments.load_config(path)


def cmd_run(args) -> int:
    scenario = _scenario(args.config)
    if args.seed is not None:
        scenario = replace(scenario, seeds=(args.seed,))
    results = experiments.run_scenario(scenario, args.out, jobs=args.jobs)
    for (label, seed), series in results.items():
        s = experiments.summarize(series)
        print(f"{label} seed={seed} qpc={s['qpc']:.4f} normalized={s['qpc_normalized']:.4f} "
              f"tbp_top={s['tbp_top']:.1f}")
    return EXIT_OK


def cmd_figure(args) -> int:
    seeds = range(args.seeds)
    curves = experiments.run_figure(args.figure_id, args.scale, args.out, seeds=seeds,
                                    measure_days=args.measure_days, jobs=args.jobs)
    for c in curves:
        print(f"{c.name}: {len(c.rows)} points -> {Path(args.out) / (c.name + '.csv')}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _scenario(args.config)
    if scenario.sweep is not None:
        raise ConfigError("compare takes a single scenario; remove the [sweep] section")
    out = args.out or "compare.csv"
    rows = experiments.compare_analytic_vs_sim(scenario, jobs=args.jobs, out=out)
    for name, an, mean, se, gap in rows:
        print(f"{name:18s} analytic={an:<12.6g} sim={mean:<12.6g} +/- {se:<10.3g} gap={gap:.3g}")
    return EXIT_OK


def cmd_solve_f(args) -> int:
    scenario = _scenario(args.config)
    F = analytics.solve_visit_function(scenario.community, scenario.ranking)
    print(f"converged={F.converged} iterations={F.iterations} F(0)={F.f_zero:.6g} "
          f"alpha={F.alpha:.6g} beta={F.beta:.6g} gamma={F.gamma:.6g}")
    if args.out:
        F.to_csv(args.out)
    else:
        F.to_csv(sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rankpromo",
                                description="Randomized rank promotion: simulation and analysis")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario file")
    r.add_argument("config", help="scenario file, or bundled:<name>")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default="out")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("figure", help="reproduce one figure's curves")
    f.add_argument("figure_id", choices=experiments.FIGURES)
    f.add_argument("--scale", type=float, default=experiments.DESK_SCALE)
    f.add_argument("--out", default="out")
    f.add_argument("--seeds", type=int, default=len(experiments.DEFAULT_SEEDS))
    f.add_argument("--measure-days", type=int, default=experiments.DEFAULT_MEASURE_DAYS)
    f.add_argument("--jobs", type=int, default=1)
    f.set_defaults(func=cmd_figure)

    c = sub.add_parser("compare", help="analytic model next to simulation")
    c.add_argument("config")
    c.add_argument("--out")
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("solve-f", help="solve for the visit function and dump it as CSV")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve_f)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
