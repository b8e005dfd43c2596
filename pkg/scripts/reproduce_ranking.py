"""Compare NEPA, NRPA-W and UCT on random Waxman scenarios over several seeds.

Defaults reproduce the standard benchmark; raise --lam or change capacities to
study loaded regimes. Writes per-run rows to --out and prints 99% intervals.
"""
import argparse
import os
import time

from vnesearch.placement import AlgoConfig
from vnesearch.scenarios import ScenarioConfig, gen_scenario
from vnesearch.simulator import aggregate, run_batch, write_results_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--slices", type=int, default=500)
    ap.add_argument("--lam", type=float, default=0.02)
    ap.add_argument("--mu", type=float, default=0.005)
    ap.add_argument("--cpu", type=int, nargs=2, default=(50, 100))
    ap.add_argument("--bw", type=int, nargs=2, default=(50, 100))
    ap.add_argument("--algos", nargs="+", default=["nepa", "nrpa-w", "uct"])
    ap.add_argument("--jobs", type=int, default=int(os.environ.get("VNESEARCH_JOBS", "1")))
    ap.add_argument("--out", default="ranking.csv")
    args = ap.parse_args()

    seeds = list(range(args.seeds))
    scenarios = {
        s: gen_scenario(ScenarioConfig(seed=s, n_slices=args.slices, arrival_rate=args.lam,
                                       departure_rate=args.mu, cpu_capacity=tuple(args.cpu),
                                       bw_capacity=tuple(args.bw)))
        for s in seeds
    }
    configs = {a: AlgoConfig(algo=a) for a in args.algos}
    t0 = time.perf_counter()
    reports = run_batch(scenarios, configs, seeds, jobs=args.jobs)
    write_results_csv(reports, args.out)
    print(f"{len(reports)} runs in {time.perf_counter() - t0:.0f}s -> {args.out}")
    for name, m in aggregate(reports).items():
        print(f"{name:<8} acceptance {m['acceptance'].mean:.3f} ± {m['acceptance'].half_width:.3f}"
              f"  rtc_sum {m['rtc_sum'].mean:.3f} ± {m['rtc_sum'].half_width:.3f}")


if __name__ == "__main__":
    main()
