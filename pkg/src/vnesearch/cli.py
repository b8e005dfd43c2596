"""Command-line entry point: ``vnesearch generate|run|stats``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .network import Disconnected, graph_stats
from .placement import ALGOS, AlgoConfig
from .scenarios import (
    DisconnectedTopology,
    GenerationFailure,
    ParseError,
    ScenarioConfig,
    gen_pss,
    gen_scenario,
    read_scenario,
    read_topology,
    write_scenario,
)
from .simulator import aggregate, run_batch, write_results_csv, write_slices_csv

JOBS_ENV = "VNESEARCH_JOBS"

log = logging.getLogger("vnesearch")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _echo(header: str, values: dict) -> None:
    print(f"# {header} " + json.dumps(values, sort_keys=True, default=str), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vnesearch", description="Online virtual network embedding search")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a scenario JSON file")
    g.add_argument("kind", choices=["waxman", "er", "pss", "zoo"])
    g.add_argument("--n", type=int, default=75, help="substrate nodes (waxman, er)")
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--beta", type=float, default=0.2)
    g.add_argument("--p", type=float, default=0.05, help="edge probability (er)")
    g.add_argument("--topology", help="GraphML file (zoo)")
    g.add_argument("--slices", type=int, default=None,
                   help="slice count (default 500, or 100 for pss)")
    g.add_argument("--min-size", type=int, default=7)
    g.add_argument("--max-size", type=int, default=13)
    g.add_argument("--lam", type=float, default=None,
                   help="arrival rate per second (default 0.02, or 0.04 for zoo)")
    g.add_argument("--mu", type=float, default=0.005, help="departure rate per second")
    g.add_argument("--i", type=int, default=0, help="PSS size shift")
    g.add_argument("--reuse", type=float, default=0.93, help="PSS node reuse probability")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", "-o", required=True)

    r = sub.add_parser("run", help="simulate an algorithm over a scenario")
    r.add_argument("scenario")
    r.add_argument("--algo", choices=ALGOS, default="nepa")
    r.add_argument("--n", type=int, default=None, help="iterations per level (nepa 5, nrpa 7)")
    r.add_argument("--level", type=int, default=3)
    r.add_argument("--refine-level", type=int, default=2)
    r.add_argument("--k", type=int, default=16, help="refinement candidates per move")
    r.add_argument("--x", type=int, default=None, help="max refinement moves (default |V^x|)")
    r.add_argument("--reward", choices=["rc", "afbd"], default="rc")
    r.add_argument("--budget", type=int, default=445, help="UCT link-routing budget")
    r.add_argument("--c", type=float, default=AlgoConfig.c, help="UCT exploration constant")
    r.add_argument("--seeds", type=int, default=1, help="number of seeds")
    r.add_argument("--seed-base", type=int, default=0)
    r.add_argument("--jobs", type=int, default=int(os.environ.get(JOBS_ENV, "1")))
    r.add_argument("--out", "-o", default=None, help="results CSV")
    r.add_argument("--slices-out", default=None, help="per-slice CSV")

    s = sub.add_parser("stats", help="distance and clustering statistics of topologies")
    s.add_argument("paths", nargs="+")
    s.add_argument("--csv", default=None)
    return p


def cmd_generate(args) -> int:
    if args.kind == "pss":
        n_slices = 100 if args.slices is None else args.slices
        _echo("generate", {"kind": "pss", "i": args.i, "slices": n_slices,
                           "reuse": args.reuse, "seed": args.seed})
        if not 0 <= args.reuse < 1 or n_slices < 1:
            raise UsageError("reuse must be in [0, 1) and slices >= 1")
        sc = gen_pss(args.i, n_slices, args.reuse, np.random.default_rng(args.seed))
    else:
        lam = args.lam if args.lam is not None else (0.04 if args.kind == "zoo" else 0.02)
        try:
            cfg = ScenarioConfig(
                substrate=args.kind, n=args.n, alpha=args.alpha, beta=args.beta, p=args.p,
                topology=args.topology,
                bw_capacity=(250, 300) if args.kind == "zoo" else (50, 100),
                n_slices=500 if args.slices is None else args.slices,
                slice_size=(args.min_size, args.max_size),
                arrival_rate=lam, departure_rate=args.mu, seed=args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _echo("generate", cfg.__dict__)
        sc = gen_scenario(cfg)
    write_scenario(sc, args.out)
    net = sc.substrate
    print(f"{args.out}: |V|={net.n_nodes} |E|={net.n_edges} slices={len(sc.requests)}")
    return 0


def cmd_run(args) -> int:
    try:
        cfg = AlgoConfig(algo=args.algo, n_iter=args.n, level=args.level,
                         refine_level=args.refine_level, k=args.k, x=args.x,
                         reward=args.reward, budget=args.budget, c=args.c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.seeds < 1 or args.jobs < 1:
        raise UsageError("--seeds and --jobs must be >= 1")
    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    _echo("run", {**cfg.describe(), "scenario": args.scenario, "seeds": seeds, "jobs": args.jobs})
    sc = read_scenario(args.scenario)
    reports = run_batch(sc, {args.algo: cfg}, seeds, jobs=args.jobs)
    if args.out:
        write_results_csv(reports, args.out)
    if args.slices_out:
        write_slices_csv(reports, args.slices_out)
    print(f"{'config':<8} {'seed':>5} {'accept':>8} {'rtc_sum':>8} {'rtc_mean':>8} {'ms/slice':>9}")
    for r in reports:
        print(f"{r.config:<8} {r.seed:>5} {r.acceptance_ratio:>8.4f} {r.revenue_cost_ratio:>8.4f} "
              f"{r.mean_slice_rtc:>8.4f} {r.mean_ms_per_slice:>9.2f}")
    for name, metrics in aggregate(reports).items():
        parts = [f"{m} {iv.mean:.4f} ± {iv.half_width:.4f}" for m, iv in metrics.items()]
        print(f"{name} (99% CI): " + ", ".join(parts))
    return 0


STATS_COLUMNS = ["topology", "nodes", "edges", "mean_distance", "diameter",
                 "distance_stddev", "clustering"]


def cmd_stats(args) -> int:
    rows = []
    for path in args.paths:
        g = read_topology(path)
        st = graph_stats(g)
        rows.append([os.path.basename(path), g.number_of_nodes(), g.number_of_edges(),
                     round(st.mean_distance, 4), st.diameter, round(st.distance_stddev, 4),
                     round(st.clustering_coefficient, 4)])
    print(" ".join(f"{c:>15}" for c in STATS_COLUMNS))
    for row in rows:
        print(" ".join(f"{str(v):>15}" for v in row))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(STATS_COLUMNS)
            w.writerows(rows)
    return 0


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "stats": cmd_stats}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"vnesearch: error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, Disconnected, DisconnectedTopology, GenerationFailure,
            FileNotFoundError, ValueError) as exc:
        print(f"vnesearch: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
