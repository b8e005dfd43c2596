"""Distance and clustering statistics of generated topologies, averaged over draws."""
import argparse
import dataclasses

import numpy as np

from vnesearch.network import graph_stats
from vnesearch.scenarios import gen_er, gen_pss, gen_waxman

CAP = (50, 100)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=10)
    args = ap.parse_args()
    cases = {f"waxman-{n}": (lambda rng, n=n: gen_waxman(n, 0.5, 0.2, CAP, CAP, rng))
             for n in (50, 60, 70, 80, 90, 100)}
    cases.update({f"er-{p}": (lambda rng, p=p: gen_er(100, p, CAP, CAP, rng))
                  for p in (0.03, 0.04, 0.06, 0.08, 0.11, 0.16, 0.2)})
    cases.update({f"pss-{i}": (lambda rng, i=i: gen_pss(i, 100, 0.93, rng).substrate)
                  for i in range(1, 9)})
    print(f"{'topology':<12} {'mean':>6} {'diam':>5} {'std':>6} {'clust':>6}")
    for name, make in cases.items():
        stats = []
        for d in range(args.draws):
            net = make(np.random.default_rng(d))
            if net.is_connected():
                stats.append(graph_stats(net))
        if not stats:
            print(f"{name:<12} (no connected draw)")
            continue
        arr = np.array([dataclasses.astuple(s) for s in stats], dtype=float)
        m = arr.mean(axis=0)
        print(f"{name:<12} {m[0]:>6.2f} {m[1]:>5.1f} {m[2]:>6.2f} {m[3]:>6.3f}")


if __name__ == "__main__":
    main()
